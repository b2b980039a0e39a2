"""Provider-agnostic structured-completion client.

Renders prompt templates, calls a chat-completion endpoint (or a scripted
mock), validates the returned JSON against a schema, and retries with
exponential backoff.  Every exchange is appended to an audit trail.  API keys
are read from environment variables only.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import requests


class GatewayError(Exception):
    pass


class TransportError(GatewayError):
    """Network failure, timeout, rate limit, or server-side error; retryable."""


class ProviderRefused(GatewayError):
    """Terminal client-side rejection (4xx other than 429); not retried."""


class SchemaError(GatewayError):
    """The provider never produced a document matching the request schema."""

    def __init__(self, errors: list[str], attempts: int):
        super().__init__(f"no schema-valid response after {attempts} attempts: {errors}")
        self.errors = errors
        self.attempts = attempts


class UnknownTemplate(KeyError):
    pass


class MissingVariable(KeyError):
    pass


@dataclass(frozen=True)
class ProviderConfig:
    name: str = "mock"
    base_url: str = ""
    model: str = ""
    api_key_env: str = "PHARMSIM_API_KEY"
    temperature: float = 0.2
    timeout: float = 30.0
    max_retries: int = 3
    backoff_base: float = 1.0
    max_in_flight: int = 4

    def validate(self) -> "ProviderConfig":
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must lie in [0, 1]")
        return self


@dataclass(frozen=True)
class CompletionRequest:
    system_prompt: str
    user_prompt: str
    schema: dict
    params: dict = field(default_factory=dict)

    def validate(self) -> "CompletionRequest":
        if not self.system_prompt or not self.user_prompt:
            raise ValueError("prompts must be non-empty")
        if "required" not in self.schema and "items" not in self.schema:
            raise ValueError("schema must declare required keys")
        return self


# ------------------------------------------------------------------ templates

_PLACEHOLDER = re.compile(r"\{\{\s*([a-zA-Z0-9_]+)\s*\}\}")


def _template_root() -> Path:
    return Path(str(resources.files("pharmsim") / "prompts"))


def render_template(template_id: str, variables: dict, search_dir: str | Path | None = None) -> str:
    """Substitute ``{{name}}`` placeholders in the named template.

    Raises UnknownTemplate when the file does not exist and MissingVariable for
    any placeholder without a binding; no unresolved placeholder survives.
    """
    root = Path(search_dir) if search_dir is not None else _template_root()
    path = root / f"{template_id}.txt"
    if not path.exists():
        raise UnknownTemplate(template_id)
    text = path.read_text(encoding="utf-8")

    def _sub(match: re.Match) -> str:
        name = match.group(1)
        if name not in variables:
            raise MissingVariable(name)
        return str(variables[name])

    rendered = _PLACEHOLDER.sub(_sub, text)
    leftover = _PLACEHOLDER.search(rendered)
    if leftover:
        raise MissingVariable(leftover.group(1))
    return rendered


# ------------------------------------------------------------ schema checking

def validate_document(doc, schema: dict, path: str = "$") -> list[str]:
    """Check a parsed JSON document against the subset of JSON Schema we emit.

    Supports type, required, properties, enum, minimum/maximum, items and
    minItems/maxItems, which covers every schema shipped with the package.
    Returns a list of human-readable problems; empty means valid.
    """
    errors: list[str] = []
    expected = schema.get("type")
    type_map = {
        "object": dict,
        "array": list,
        "string": str,
        "boolean": bool,
        "number": (int, float),
        "integer": int,
    }
    if expected is not None:
        py_type = type_map[expected]
        ok = isinstance(doc, py_type)
        if expected in ("number", "integer") and isinstance(doc, bool):
            ok = False
        if not ok:
            errors.append(f"{path}: expected {expected}, got {type(doc).__name__}")
            return errors

    if "enum" in schema and doc not in schema["enum"]:
        errors.append(f"{path}: value {doc!r} not in {schema['enum']}")
    if "minimum" in schema and isinstance(doc, (int, float)) and doc < schema["minimum"]:
        errors.append(f"{path}: {doc} below minimum {schema['minimum']}")
    if "maximum" in schema and isinstance(doc, (int, float)) and doc > schema["maximum"]:
        errors.append(f"{path}: {doc} above maximum {schema['maximum']}")

    if isinstance(doc, dict):
        for key in schema.get("required", []):
            if key not in doc:
                errors.append(f"{path}: missing required key {key!r}")
        for key, sub in schema.get("properties", {}).items():
            if key in doc:
                errors.extend(validate_document(doc[key], sub, f"{path}.{key}"))
    if isinstance(doc, list):
        if "minItems" in schema and len(doc) < schema["minItems"]:
            errors.append(f"{path}: {len(doc)} items, need at least {schema['minItems']}")
        if "maxItems" in schema and len(doc) > schema["maxItems"]:
            errors.append(f"{path}: {len(doc)} items, need at most {schema['maxItems']}")
        if "items" in schema:
            for i, item in enumerate(doc):
                errors.extend(validate_document(item, schema["items"], f"{path}[{i}]"))
    return errors


# ------------------------------------------------------------------ providers

class MockProvider:
    """Deterministic scripted provider for tests and offline runs.

    ``script`` is a sequence whose entries are either response strings or
    exceptions to raise; the sequence is consumed one entry per call, and the
    last entry repeats once exhausted.
    """

    name = "mock"

    def __init__(self, script):
        if callable(script):
            self._fn = script
            self._script = None
        else:
            self._fn = None
            self._script = list(script)
            if not self._script:
                raise ValueError("mock script must not be empty")
        self.calls = 0

    def complete(self, system_prompt: str, user_prompt: str, cfg: ProviderConfig) -> str:
        self.calls += 1
        if self._fn is not None:
            entry = self._fn(system_prompt, user_prompt, self.calls)
        else:
            entry = self._script[min(self.calls - 1, len(self._script) - 1)]
        if isinstance(entry, Exception):
            raise entry
        return entry


class HttpProvider:
    """Chat-completion client over a shared wire contract.

    The three supported header/path dialects ("openai", "azure", "anthropic")
    differ only in auth headers, path, and where the text lives in the reply.
    """

    def __init__(self, cfg: ProviderConfig, session: requests.Session | None = None):
        self.cfg = cfg.validate()
        self.name = cfg.name
        self._session = session or requests.Session()
        self._api_key = os.environ.get(cfg.api_key_env, "")
        if not self._api_key:
            raise ProviderRefused(
                f"API key environment variable {cfg.api_key_env} is not set"
            )

    def _request_parts(self, system_prompt: str, user_prompt: str) -> tuple[str, dict, dict]:
        cfg = self.cfg
        if cfg.name == "anthropic":
            url = cfg.base_url.rstrip("/") + "/v1/messages"
            headers = {"x-api-key": self._api_key, "anthropic-version": "2023-06-01"}
            body = {
                "model": cfg.model,
                "max_tokens": 2048,
                "temperature": cfg.temperature,
                "system": system_prompt,
                "messages": [{"role": "user", "content": user_prompt}],
            }
        else:
            url = cfg.base_url.rstrip("/") + "/chat/completions"
            if cfg.name == "azure":
                headers = {"api-key": self._api_key}
            else:
                headers = {"Authorization": f"Bearer {self._api_key}"}
            body = {
                "model": cfg.model,
                "temperature": cfg.temperature,
                "messages": [
                    {"role": "system", "content": system_prompt},
                    {"role": "user", "content": user_prompt},
                ],
            }
        return url, headers, body

    def _extract_text(self, payload: dict) -> str:
        if self.cfg.name == "anthropic":
            return payload["content"][0]["text"]
        return payload["choices"][0]["message"]["content"]

    def complete(self, system_prompt: str, user_prompt: str, cfg: ProviderConfig) -> str:
        url, headers, body = self._request_parts(system_prompt, user_prompt)
        try:
            resp = self._session.post(url, json=body, headers=headers, timeout=cfg.timeout)
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code >= 400:
            raise ProviderRefused(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return self._extract_text(resp.json())
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed provider response: {exc}") from exc


# -------------------------------------------------------------------- gateway

_CLARIFICATION = (
    "\n\nYour previous reply was rejected: {errors}. "
    "Respond again with a single JSON object that satisfies the schema exactly, "
    "with no surrounding prose."
)


class Gateway:
    """Structured completions with bounded retries and an audit trail."""

    def __init__(
        self,
        provider,
        cfg: ProviderConfig | None = None,
        audit_path: str | Path | None = None,
        sleep=time.sleep,
        clock=time.monotonic,
    ):
        self.provider = provider
        self.cfg = (cfg or ProviderConfig()).validate()
        self.audit_records: list[dict] = []
        self._audit_path = Path(audit_path) if audit_path else None
        self._audit_lock = threading.Lock()
        self._in_flight = threading.Semaphore(self.cfg.max_in_flight)
        self._sleep = sleep
        self._clock = clock

    def complete_structured(self, req: CompletionRequest) -> dict:
        """Return a schema-valid document or raise after 1 + max_retries attempts.

        Retry r sleeps backoff_base * 2**(r-1) seconds.  Schema failures feed
        the validation errors back into the retry prompt; transport failures
        retry unchanged; ProviderRefused is terminal.
        """
        req.validate()
        cfg = self._merged_cfg(req.params)
        max_attempts = 1 + cfg.max_retries
        user_prompt = req.user_prompt
        errors: list[str] = ["no attempt made"]
        attempt_log: list[dict] = []
        started = self._clock()
        last_transport: TransportError | None = None

        with self._in_flight:
            for attempt in range(1, max_attempts + 1):
                if attempt > 1:
                    self._sleep(cfg.backoff_base * 2 ** (attempt - 2))
                try:
                    text = self.provider.complete(req.system_prompt, user_prompt, cfg)
                except TransportError as exc:
                    last_transport = exc
                    errors = [f"transport: {exc}"]
                    attempt_log.append({"attempt": attempt, "status": "transport_error",
                                        "error": str(exc)})
                    continue
                except ProviderRefused as exc:
                    attempt_log.append({"attempt": attempt, "status": "refused",
                                        "error": str(exc)})
                    self._record(req, attempt_log, "refused", started)
                    raise
                last_transport = None
                doc, errors = self._parse_and_check(text, req.schema)
                if not errors:
                    attempt_log.append({"attempt": attempt, "status": "ok"})
                    self._record(req, attempt_log, "ok", started)
                    return doc
                attempt_log.append({"attempt": attempt, "status": "schema_error",
                                    "error": "; ".join(errors)})
                user_prompt = req.user_prompt + _CLARIFICATION.format(errors="; ".join(errors))

        if last_transport is not None:
            self._record(req, attempt_log, "transport_error", started)
            raise TransportError(
                f"transport failed after {max_attempts} attempts: {last_transport}"
            )
        self._record(req, attempt_log, "schema_error", started)
        raise SchemaError(errors, max_attempts)

    @staticmethod
    def _parse_and_check(text: str, schema: dict) -> tuple[dict | None, list[str]]:
        # Providers sometimes wrap JSON in a fenced block; strip it before parsing.
        stripped = text.strip()
        if stripped.startswith("```"):
            stripped = re.sub(r"^```[a-zA-Z]*\n?", "", stripped)
            stripped = re.sub(r"\n?```$", "", stripped)
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as exc:
            return None, [f"invalid JSON: {exc}"]
        errors = validate_document(doc, schema)
        return (doc if not errors else None), errors

    def _merged_cfg(self, overrides: dict) -> ProviderConfig:
        if not overrides:
            return self.cfg
        merged = {**self.cfg.__dict__, **overrides}
        return ProviderConfig(**merged).validate()

    def _record(self, req: CompletionRequest, attempts: list[dict], status: str, started: float):
        record = {
            "ts": time.time(),
            "provider": getattr(self.provider, "name", "unknown"),
            "status": status,
            "attempts": len(attempts),
            "attempt_log": attempts,
            "elapsed_s": round(self._clock() - started, 6),
            "prompt_chars": len(req.system_prompt) + len(req.user_prompt),
        }
        with self._audit_lock:
            self.audit_records.append(record)
            if self._audit_path is not None:
                try:
                    with self._audit_path.open("a", encoding="utf-8") as handle:
                        handle.write(json.dumps(record) + "\n")
                except OSError as exc:
                    print(f"warning: audit log write failed: {exc}")

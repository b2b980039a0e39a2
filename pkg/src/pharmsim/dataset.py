"""Curation pipeline for archived drug-shortage list snapshots.

Turns CSV exports of timestamped shortage-list snapshots into deduplicated
shortage events and resolved ground-truth trajectories with the parameters a
simulation scenario needs.  Every stage is a pure batch transform; malformed
rows are collected in reject/quarantine reports rather than silently dropped,
and running the pipeline twice over the same inputs yields identical output.
"""

from __future__ import annotations

import csv
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path

REASON_CLASSES = ("SupplySide", "DemandSide", "RegulatoryPolicy", "Other")
STATUSES = ("current", "resolved", "discontinued")

REQUIRED_COLUMNS = (
    "snapshot_date", "generic_name", "presentation", "status",
    "reason", "posting_date", "company",
)

# An event is considered resolved once its identifier has been absent from at
# least this many consecutive later snapshots (single gaps happen in noisy
# captures).
RESOLVED_AFTER_MISSING = 2

DAYS_PER_QUARTER = 91.25


class LayoutMismatch(ValueError):
    def __init__(self, file: str, missing: list[str]):
        super().__init__(f"{file}: missing columns {missing}")
        self.file = file
        self.missing = missing


class NoDirectoryMatch(ValueError):
    def __init__(self, raw: str):
        super().__init__(f"no directory match for {raw!r}")
        self.raw = raw


class EmptySet(ValueError):
    pass


@dataclass(frozen=True)
class Ndc9:
    """Nine-digit labeler+product code in canonical hyphenated form."""

    labeler: str
    product: str

    def __post_init__(self):
        if not (len(self.labeler) == 5 and self.labeler.isdigit()):
            raise ValueError(f"labeler must be 5 digits, got {self.labeler!r}")
        if not (len(self.product) == 4 and self.product.isdigit()):
            raise ValueError(f"product must be 4 digits, got {self.product!r}")

    def __str__(self) -> str:
        return f"{self.labeler}-{self.product}"

    @classmethod
    def parse(cls, text: str) -> "Ndc9":
        labeler, product = text.split("-")
        return cls(labeler.zfill(5), product.zfill(4))


@dataclass(frozen=True)
class SnapshotRecord:
    snapshot_date: date
    generic_name: str
    presentation: str
    status: str
    reason_text: str
    posting_date: date
    company: str


@dataclass(frozen=True)
class ShortageEvent:
    """One deduplicated shortage event: a 9-digit NDC plus its posting date."""

    event_id: str
    ndc9: Ndc9
    posting_date: date
    generic_name: str
    company: str
    reason_class: str
    no_reason: bool
    discontinued: bool
    first_seen: date
    last_seen: date
    resolved: bool
    resolution_date: date | None
    sightings: int
    drug_key: str

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "ndc9": str(self.ndc9),
            "posting_date": self.posting_date.isoformat(),
            "generic_name": self.generic_name,
            "company": self.company,
            "reason_class": self.reason_class,
            "no_reason": self.no_reason,
            "discontinued": self.discontinued,
            "first_seen": self.first_seen.isoformat(),
            "last_seen": self.last_seen.isoformat(),
            "resolved": self.resolved,
            "resolution_date": self.resolution_date.isoformat() if self.resolution_date else None,
            "sightings": self.sightings,
            "drug_key": self.drug_key,
        }


@dataclass(frozen=True)
class GtTrajectory:
    """A resolved multi-manufacturer shortage usable as a simulation target."""

    case_id: str
    drug_key: str
    dataset: str  # FDA-Disc or FDA-NR
    event_ids: tuple[str, ...]
    n: int
    T: int
    per_mfr_delta: tuple[float, ...] | None
    first_seen: date
    resolution_date: date
    companies: tuple[str, ...]
    resolved: bool = True
    disruption_prob: float | None = None
    disruption_magnitude: float | None = None

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "drug_key": self.drug_key,
            "dataset": self.dataset,
            "event_ids": list(self.event_ids),
            "n": self.n,
            "T": self.T,
            "per_mfr_delta": list(self.per_mfr_delta) if self.per_mfr_delta else None,
            "first_seen": self.first_seen.isoformat(),
            "resolution_date": self.resolution_date.isoformat(),
            "companies": list(self.companies),
            "resolved": self.resolved,
            "disruption_prob": self.disruption_prob,
            "disruption_magnitude": self.disruption_magnitude,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "GtTrajectory":
        return cls(
            case_id=raw["case_id"],
            drug_key=raw["drug_key"],
            dataset=raw["dataset"],
            event_ids=tuple(raw.get("event_ids", [])),
            n=raw["n"],
            T=raw["T"],
            per_mfr_delta=tuple(raw["per_mfr_delta"]) if raw.get("per_mfr_delta") else None,
            first_seen=date.fromisoformat(raw["first_seen"]),
            resolution_date=date.fromisoformat(raw["resolution_date"]),
            companies=tuple(raw.get("companies", [])),
            resolved=raw.get("resolved", True),
            disruption_prob=raw.get("disruption_prob"),
            disruption_magnitude=raw.get("disruption_magnitude"),
        )


class NdcDirectory:
    """Index of legal (labeler, product) pairs used to segment bare codes."""

    def __init__(self, pairs):
        self._pairs = {(l.zfill(5), p.zfill(4)) for l, p in pairs}

    def __contains__(self, pair) -> bool:
        labeler, product = pair
        return (labeler.zfill(5), product.zfill(4)) in self._pairs

    def __iter__(self):
        return iter(sorted(self._pairs))

    def __len__(self) -> int:
        return len(self._pairs)

    @classmethod
    def from_csv(cls, path: str | Path) -> "NdcDirectory":
        path = Path(path)
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            cols = {c.lower().strip(): c for c in reader.fieldnames or []}
            if "labeler" not in cols or "product" not in cols:
                raise LayoutMismatch(str(path), ["labeler", "product"])
            pairs = [
                (row[cols["labeler"]].strip(), row[cols["product"]].strip())
                for row in reader
                if row.get(cols["labeler"], "").strip()
            ]
        return cls(pairs)


# -------------------------------------------------------------------- parsing

_DATE_FORMATS = ("%Y-%m-%d", "%m/%d/%Y", "%m-%d-%Y")


def _parse_date(text: str) -> date:
    text = (text or "").strip()
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unparseable date: {text!r}")


@dataclass
class ParseResult:
    records: list[SnapshotRecord]
    rejects: list[dict]
    row_count: int = 0


def parse_snapshots(files) -> ParseResult:
    """Read snapshot CSV exports into records, collecting malformed rows.

    Every file must carry the documented column layout; a file missing columns
    raises LayoutMismatch.  Rows that fail to parse (bad dates, empty
    presentation, unknown status) go to the reject report with the reason,
    never silently dropped.  Duplicates within a snapshot are kept; they are
    collapsed later during deduplication.
    """
    records: list[SnapshotRecord] = []
    rejects: list[dict] = []
    rows = 0
    for file in sorted(Path(f) for f in files):
        with file.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            cols = {c.lower().strip(): c for c in reader.fieldnames or []}
            missing = [c for c in REQUIRED_COLUMNS if c not in cols]
            if missing:
                raise LayoutMismatch(str(file), missing)
            for line_no, row in enumerate(reader, start=2):
                rows += 1
                get = lambda name: (row.get(cols[name]) or "").strip()
                problem = None
                snapshot_date = posting_date = None
                try:
                    snapshot_date = _parse_date(get("snapshot_date"))
                except ValueError:
                    problem = "bad snapshot_date"
                if problem is None:
                    try:
                        posting_date = _parse_date(get("posting_date"))
                    except ValueError:
                        problem = "bad posting_date"
                status = get("status").lower()
                if problem is None and not get("presentation"):
                    problem = "empty presentation"
                if problem is None and status not in STATUSES:
                    problem = "bad status"
                if problem is not None:
                    rejects.append({"file": file.name, "line": line_no,
                                    "reason": problem, "raw": dict(row)})
                    continue
                records.append(SnapshotRecord(
                    snapshot_date=snapshot_date,
                    generic_name=get("generic_name"),
                    presentation=get("presentation"),
                    status=status,
                    reason_text=get("reason"),
                    posting_date=posting_date,
                    company=get("company"),
                ))
    return ParseResult(records=records, rejects=rejects, row_count=rows)


# ------------------------------------------------------------- NDC extraction

_HYPHENATED = re.compile(r"\b(\d{4,5})-(\d{3,4})(?:-\d{1,2})?\b")
_BARE = re.compile(r"\b(\d{10,11})\b")


def extract_ndc9(presentation: str, directory: NdcDirectory) -> Ndc9:
    """Pull the 9-digit labeler+product code out of a presentation string.

    Hyphenated codes contribute their first two segments directly (with
    leading zeros restored).  Bare 11-digit strings are the unambiguous
    5-4-2 form.  Bare 10-digit strings have one segment with a dropped
    leading zero, so each legal split is checked against the directory.
    """
    m = _HYPHENATED.search(presentation)
    if m:
        return Ndc9(m.group(1).zfill(5), m.group(2).zfill(4))
    m = _BARE.search(presentation)
    if m:
        digits = m.group(1)
        if len(digits) == 11:
            return Ndc9(digits[:5], digits[5:9])
        candidates = (
            (digits[:5], digits[5:9]),        # 5-4-1: package lost a digit
            ("0" + digits[:4], digits[4:8]),  # 4-4-2: labeler lost its zero
            (digits[:5], "0" + digits[5:8]),  # 5-3-2: product lost its zero
        )
        for labeler, product in candidates:
            if (labeler, product) in directory:
                return Ndc9(labeler, product)
    raise NoDirectoryMatch(presentation)


# ------------------------------------------------------------- classification

_REGULATORY = ("good manufacturing", "gmp", "compliance", "regulatory", "inspection")
_DEMAND = ("demand", "forecast")
_SUPPLY = ("discontinu", "ingredient", "manufactur", "delay", "capacity",
           "production", "shortage of")


def classify_reason(reason_text: str) -> tuple[str, bool]:
    """Map a manufacturer-reported cause onto the four-way taxonomy.

    Returns ``(reason_class, no_reason)``; empty text is Other with the
    no_reason flag set.  Regulatory keywords are checked first so that
    'failure to satisfy Good Manufacturing Practice' does not fall into the
    supply bucket via 'manufacturing'.
    """
    text = (reason_text or "").strip().lower()
    if not text:
        return "Other", True
    if any(k in text for k in _REGULATORY):
        return "RegulatoryPolicy", False
    if any(k in text for k in _DEMAND):
        return "DemandSide", False
    if any(k in text for k in _SUPPLY):
        return "SupplySide", False
    return "Other", False


# ------------------------------------------------------------------- drug key

_STRENGTH = re.compile(
    r"\d+(?:\.\d+)?\s*(?:mg/ml|mcg/ml|units?/ml|mg|mcg|g|ml|%|units?|meq)", re.I
)
_FORMS = ("injection", "infusion", "solution", "suspension", "tablet", "capsule",
          "vial", "syringe", "cream", "ointment", "powder", "kit")


def drug_key(generic_name: str, presentation: str) -> str:
    """Normalize molecule + strength + dosage form into a grouping key."""
    generic = re.sub(r"\s+", " ", (generic_name or "").strip().lower())
    text = (presentation or "").lower()
    strengths = sorted(s.replace(" ", "") for s in _STRENGTH.findall(text))
    forms = sorted({f for f in _FORMS if f in text})
    return f"{generic}|{'+'.join(strengths)}|{'+'.join(forms)}"


# --------------------------------------------------------------- dedup/events

def dedup_events(
    rows: list[tuple[SnapshotRecord, Ndc9]],
    snapshot_dates: list[date] | None = None,
) -> list[ShortageEvent]:
    """Collapse sightings that share an identifier into one event each.

    The identifier is the 9-digit NDC plus the event's posting date.  An event
    counts as resolved once it is absent from at least RESOLVED_AFTER_MISSING
    later snapshots; its resolution date is the first snapshot it is absent
    from.  ``first_seen`` is the earlier of the posting date and the first
    sighting, so the event's full lifetime is covered even when the shortage
    predates the earliest capture.
    """
    if snapshot_dates is None:
        snapshot_dates = sorted({rec.snapshot_date for rec, _ in rows})
    else:
        snapshot_dates = sorted(set(snapshot_dates))

    groups: dict[tuple[str, date], list[tuple[SnapshotRecord, Ndc9]]] = {}
    for rec, ndc in rows:
        groups.setdefault((str(ndc), rec.posting_date), []).append((rec, ndc))

    events = []
    for (ndc_str, posting), sightings in sorted(groups.items()):
        sightings.sort(key=lambda pair: pair[0].snapshot_date)
        recs = [rec for rec, _ in sightings]
        ndc = sightings[0][1]
        last_seen = recs[-1].snapshot_date
        later = [d for d in snapshot_dates if d > last_seen]
        resolved = len(later) >= RESOLVED_AFTER_MISSING
        reason_text = next((r.reason_text for r in recs if r.reason_text.strip()), "")
        reason_class, no_reason = classify_reason(reason_text)
        discontinued = any(r.status == "discontinued" for r in recs) or \
            "discontinu" in reason_text.lower()
        first_seen = min(posting, recs[0].snapshot_date)
        events.append(ShortageEvent(
            event_id=f"{ndc_str} / {posting.strftime('%m-%d-%Y')}",
            ndc9=ndc,
            posting_date=posting,
            generic_name=recs[-1].generic_name,
            company=recs[-1].company,
            reason_class=reason_class,
            no_reason=no_reason,
            discontinued=discontinued,
            first_seen=first_seen,
            last_seen=last_seen,
            resolved=resolved,
            resolution_date=later[0] if resolved else None,
            sightings=len(recs),
            drug_key=drug_key(recs[-1].generic_name, recs[-1].presentation),
        ))
    return events


# ------------------------------------------------------------------ build GT

def quarters_between(start: date, end: date) -> int:
    return max(1, math.ceil((end - start).days / DAYS_PER_QUARTER))


@dataclass
class BuildResult:
    trajectories: list[GtTrajectory]
    excluded: list[dict]


def build_gt(events: list[ShortageEvent]) -> BuildResult:
    """Group events by drug and keep the resolved, multi-manufacturer cases.

    Discontinuation-cause groups become FDA-Disc with per-manufacturer
    disruption magnitudes equal to each labeler's discontinued share of its
    events; all-no-reason groups become FDA-NR with the stochastic default
    parameters.  Everything filtered out lands in the exclusion audit.
    """
    groups: dict[str, list[ShortageEvent]] = {}
    for event in events:
        groups.setdefault(event.drug_key, []).append(event)

    trajectories: list[GtTrajectory] = []
    excluded: list[dict] = []
    counter = 0
    for key in sorted(groups):
        group = sorted(groups[key], key=lambda e: e.event_id)
        labelers = sorted({e.ndc9.labeler for e in group})
        n = len(labelers)
        resolved = all(e.resolved for e in group)
        disc = any(e.discontinued for e in group)
        nr = all(e.no_reason for e in group)

        def exclude(reason: str):
            excluded.append({"drug_key": key, "reason": reason,
                             "events": [e.event_id for e in group]})

        if not resolved:
            exclude("unresolved")
            continue
        if n < 2:
            exclude("monopoly")
            continue
        if disc:
            dataset = "FDA-Disc"
        elif nr:
            dataset = "FDA-NR"
        else:
            exclude("cause_not_modeled")
            continue
        first_seen = min(e.first_seen for e in group)
        resolution = max(e.resolution_date for e in group)
        horizon = quarters_between(first_seen, resolution)
        if horizon > 12:
            exclude("overlong")
            continue

        counter += 1
        per_mfr_delta = None
        companies = []
        if dataset == "FDA-Disc":
            shares = []
            for labeler in labelers:
                mine = [e for e in group if e.ndc9.labeler == labeler]
                share = sum(1 for e in mine if e.discontinued) / len(mine)
                name = mine[-1].company
                shares.append((share, labeler, name))
            # Manufacturer 0 is the hardest hit; ties break on labeler code.
            shares.sort(key=lambda t: (-t[0], t[1]))
            per_mfr_delta = tuple(s for s, _, _ in shares)
            companies = [name for _, _, name in shares]
        else:
            by_labeler = {e.ndc9.labeler: e.company for e in group}
            companies = [by_labeler[l] for l in labelers]
        trajectories.append(GtTrajectory(
            case_id=f"gt-{counter:03d}",
            drug_key=key,
            dataset=dataset,
            event_ids=tuple(e.event_id for e in group),
            n=n,
            T=horizon,
            per_mfr_delta=per_mfr_delta,
            first_seen=first_seen,
            resolution_date=resolution,
            companies=tuple(companies),
            disruption_prob=None if dataset == "FDA-Disc" else 0.05,
            disruption_magnitude=None if dataset == "FDA-Disc" else 0.2,
        ))
    return BuildResult(trajectories=trajectories, excluded=excluded)


def dataset_stats(trajectories: list[GtTrajectory]) -> dict:
    """Per-dataset descriptive statistics in the shape of the GT summary table."""
    if not trajectories:
        raise EmptySet("no trajectories to summarize")
    out = {}
    for dataset in sorted({t.dataset for t in trajectories}):
        subset = [t for t in trajectories if t.dataset == dataset]
        if dataset == "FDA-Disc":
            deltas = []
            for t in subset:
                positives = [d for d in (t.per_mfr_delta or []) if d > 0]
                if positives:
                    deltas.append(sum(positives) / len(positives))
            mean_delta = sum(deltas) / len(deltas) if deltas else None
            prob = None
        else:
            mean_delta = subset[0].disruption_magnitude
            prob = subset[0].disruption_prob
        out[dataset] = {
            "trajectories": len(subset),
            "mean_T": sum(t.T for t in subset) / len(subset),
            "mean_n": sum(t.n for t in subset) / len(subset),
            "mean_delta": mean_delta,
            "disruption_prob": prob,
        }
    return out


# ---------------------------------------------------------------- end to end

@dataclass
class CurationResult:
    parse: ParseResult
    quarantined: list[dict]
    events: list[ShortageEvent]
    build: BuildResult
    stats: dict

    def audit(self) -> dict:
        sightings = sum(e.sightings for e in self.events)
        return {
            "rows_read": self.parse.row_count,
            "rows_parsed": len(self.parse.records),
            "rows_rejected": len(self.parse.rejects),
            "rows_quarantined": len(self.quarantined),
            "event_sightings": sightings,
            "events": len(self.events),
            "accounting_ok": (
                self.parse.row_count == len(self.parse.records) + len(self.parse.rejects)
                and len(self.parse.records) == sightings + len(self.quarantined)
            ),
            "trajectories": Counter(t.dataset for t in self.build.trajectories),
            "excluded": Counter(e["reason"] for e in self.build.excluded),
        }

    def write_outputs(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "events.json").write_text(
            json.dumps([e.to_dict() for e in self.events], indent=2) + "\n")
        (out / "gt.json").write_text(
            json.dumps({"cases": [t.to_dict() for t in self.build.trajectories]},
                       indent=2) + "\n")
        (out / "stats.json").write_text(json.dumps(self.stats, indent=2) + "\n")
        (out / "rejects.json").write_text(
            json.dumps(self.parse.rejects, indent=2, default=str) + "\n")
        audit = self.audit()
        audit["trajectories"] = dict(audit["trajectories"])
        audit["excluded"] = dict(audit["excluded"])
        audit["quarantined"] = self.quarantined
        audit["exclusions"] = self.build.excluded
        (out / "audit.json").write_text(json.dumps(audit, indent=2, default=str) + "\n")


def curate(snapshot_files, directory: NdcDirectory) -> CurationResult:
    """Run the full pipeline: parse, extract codes, dedup, build GT, summarize."""
    parsed = parse_snapshots(snapshot_files)
    rows: list[tuple[SnapshotRecord, Ndc9]] = []
    quarantined: list[dict] = []
    for rec in parsed.records:
        try:
            rows.append((rec, extract_ndc9(rec.presentation, directory)))
        except NoDirectoryMatch:
            quarantined.append({
                "snapshot_date": rec.snapshot_date.isoformat(),
                "generic_name": rec.generic_name,
                "presentation": rec.presentation,
                "reason": "no NDC match",
            })
    snapshot_dates = sorted({rec.snapshot_date for rec in parsed.records})
    events = dedup_events(rows, snapshot_dates)
    build = build_gt(events)
    stats = dataset_stats(build.trajectories) if build.trajectories else {}
    return CurationResult(parse=parsed, quarantined=quarantined, events=events,
                          build=build, stats=stats)


def load_gt_file(path: str | Path) -> list[GtTrajectory]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return [GtTrajectory.from_dict(case) for case in raw["cases"]]

"""Command-line interface.

Subcommands: simulate, baseline, curate, eval, serve, replay.
Exit codes: 0 success, 2 configuration/input error, 3 gateway exhaustion or
missing credentials, 4 evaluation pairing error, 1 replay divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import ConfigInvalid, SimConfig
from .dataset import LayoutMismatch, NdcDirectory, curate, load_gt_file
from .engine import (
    GatewayExhausted,
    PolicySet,
    Trajectory,
    run_replications,
    run_simulation,
)
from .evaluation import (
    BaselineUnavailable,
    PairingError,
    evaluate,
    series_csv,
    zero_shot_run,
)
from .gateway import Gateway, HttpProvider, MockProvider, ProviderConfig, ProviderRefused

EXIT_OK = 0
EXIT_DIVERGED = 1
EXIT_CONFIG = 2
EXIT_GATEWAY = 3
EXIT_PAIRING = 4


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _load_provider(args) -> tuple[ProviderConfig, object]:
    """Build (config, provider) from --provider-config, or the mock default."""
    raw = {}
    if getattr(args, "provider_config", None):
        path = Path(args.provider_config)
        if not path.exists():
            raise ConfigInvalid(f"provider config not found: {path}")
        raw = json.loads(path.read_text(encoding="utf-8"))
    script_file = raw.pop("script_file", None)
    cfg = ProviderConfig(**raw)
    if cfg.name == "mock":
        if script_file:
            script = json.loads(Path(script_file).read_text(encoding="utf-8"))
        else:
            raise ConfigInvalid("mock provider needs a script_file")
        return cfg, MockProvider([json.dumps(s) if not isinstance(s, str) else s
                                  for s in script])
    return cfg, HttpProvider(cfg)


def _build_policies(args) -> PolicySet:
    if args.policies == "rule":
        return PolicySet.rule()
    if args.policies == "script":
        if not args.script:
            raise ConfigInvalid("--policies script requires --script TRAJECTORY")
        recorded = Trajectory.load(args.script)
        return PolicySet.scripted([r.to_dict() for r in recorded.records])
    cfg, provider = _load_provider(args)
    audit = Path(args.out) / "gateway_audit.jsonl" if args.out else None
    if audit:
        audit.parent.mkdir(parents=True, exist_ok=True)
    return PolicySet.llm(Gateway(provider, cfg, audit_path=audit))


def cmd_simulate(args) -> int:
    try:
        cfg = SimConfig.from_file(args.config)
        if args.seed is not None:
            cfg = SimConfig.from_dict({**cfg.to_dict(), "seed": args.seed})
        policies = _build_policies(args)
    except ConfigInvalid as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except ProviderRefused as exc:
        _err(str(exc))
        return EXIT_GATEWAY

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.case_id or Path(args.config).stem
    k = args.replications if args.replications is not None else cfg.replications
    try:
        trajectories = run_replications(cfg, policies, k=k,
                                        no_fallback=args.no_fallback)
    except GatewayExhausted as exc:
        _err(f"gateway exhausted and fallback disabled: {exc}")
        return EXIT_GATEWAY
    for traj in trajectories:
        path = traj.write(out / f"{stem}-seed{traj.seed}.jsonl")
        print(path)
    return EXIT_OK


def cmd_baseline(args) -> int:
    try:
        cfg = SimConfig.from_file(args.config)
        provider_cfg, provider = _load_provider(args)
    except ConfigInvalid as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except ProviderRefused as exc:
        _err(str(exc))
        return EXIT_GATEWAY
    out = Path(args.out)
    try:
        traj = zero_shot_run(cfg, Gateway(provider, provider_cfg))
    except BaselineUnavailable as exc:
        _err(str(exc))
        return EXIT_GATEWAY
    stem = cfg.case_id or Path(args.config).stem
    path = traj.write(out / f"{stem}-baseline.jsonl")
    print(path)
    return EXIT_OK


def cmd_curate(args) -> int:
    snapshots_dir = Path(args.snapshots)
    files = []
    if snapshots_dir.is_dir():
        # Prefer the snapshot_* convention so a co-located directory CSV is skipped.
        files = sorted(snapshots_dir.glob("snapshot_*.csv")) or sorted(
            snapshots_dir.glob("*.csv"))
    if not files:
        _err(f"no snapshot CSV files in {snapshots_dir}")
        return EXIT_CONFIG
    directory_path = Path(args.ndc_directory)
    if not directory_path.exists():
        _err(f"NDC directory file not found: {directory_path}")
        return EXIT_CONFIG
    try:
        directory = NdcDirectory.from_csv(directory_path)
        result = curate(files, directory)
    except LayoutMismatch as exc:
        _err(str(exc))
        return EXIT_CONFIG
    result.write_outputs(args.out)
    audit = result.audit()
    print(f"events: {audit['events']}  rejects: {audit['rows_rejected']}  "
          f"quarantined: {audit['rows_quarantined']}")
    for dataset, count in sorted(audit["trajectories"].items()):
        print(f"{dataset}: {count} trajectories")
    return EXIT_OK


def cmd_eval(args) -> int:
    runs_dir = Path(args.runs)
    files = sorted(p for p in runs_dir.glob("*.jsonl") if not p.name.endswith("meta.json"))
    if not files:
        _err(f"no trajectory files in {runs_dir}")
        return EXIT_CONFIG
    gt_path = Path(args.gt)
    if not gt_path.exists():
        _err(f"ground-truth file not found: {gt_path}")
        return EXIT_CONFIG
    trajectories = [Trajectory.load(p) for p in files]
    gt_cases = load_gt_file(gt_path)
    try:
        report = evaluate(trajectories, gt_cases, scenario=args.scenario)
    except PairingError as exc:
        _err(str(exc))
        return EXIT_PAIRING
    print(report.to_text())
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        print(f"report written to {out}")
    if args.series_dir:
        series_dir = Path(args.series_dir)
        series_dir.mkdir(parents=True, exist_ok=True)
        for traj, source in zip(trajectories, files):
            (series_dir / f"{source.stem}.csv").write_text(series_csv(traj))
        print(f"series CSVs written to {series_dir}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve

    serve(host=args.host, port=args.port, static_dir=args.static)
    return EXIT_OK


def cmd_replay(args) -> int:
    path = Path(args.trajectory)
    if not path.exists():
        _err(f"trajectory not found: {path}")
        return EXIT_CONFIG
    recorded = Trajectory.load(path)
    policies = PolicySet.scripted([r.to_dict() for r in recorded.records])
    rerun = run_simulation(recorded.config, policies, seed=recorded.seed)
    if rerun.records_jsonl() == recorded.records_jsonl():
        print("replay identical")
        return EXIT_OK
    print("replay diverged", file=sys.stderr)
    return EXIT_DIVERGED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pharmsim",
        description="Drug-shortage market simulation, curation, and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run seeded simulation replicates")
    sim.add_argument("--config", required=True)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--policies", choices=("rule", "llm", "script"), default="rule")
    sim.add_argument("--script", help="recorded trajectory for scripted policies")
    sim.add_argument("--provider-config", help="JSON file with LLM provider settings")
    sim.add_argument("--replications", type=int, default=None)
    sim.add_argument("--no-fallback", action="store_true",
                     help="fail instead of falling back to rule policies")
    sim.add_argument("--out", default="runs")
    sim.set_defaults(func=cmd_simulate)

    base = sub.add_parser("baseline", help="one-shot forecast baseline")
    base.add_argument("--config", required=True)
    base.add_argument("--provider-config")
    base.add_argument("--out", default="runs")
    base.set_defaults(func=cmd_baseline)

    cur = sub.add_parser("curate", help="run the snapshot curation pipeline")
    cur.add_argument("--snapshots", required=True)
    cur.add_argument("--ndc-directory", required=True)
    cur.add_argument("--out", default="curated")
    cur.set_defaults(func=cmd_curate)

    ev = sub.add_parser("eval", help="score runs against ground-truth cases")
    ev.add_argument("--runs", required=True)
    ev.add_argument("--gt", required=True)
    ev.add_argument("--scenario", default="simulation")
    ev.add_argument("--out")
    ev.add_argument("--series-dir", help="also write per-period series CSVs here")
    ev.set_defaults(func=cmd_eval)

    srv = sub.add_parser("serve", help="start the HTTP control API")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--static", help="directory of console assets to serve")
    srv.set_defaults(func=cmd_serve)

    rep = sub.add_parser("replay", help="re-run a recorded trajectory and compare")
    rep.add_argument("--trajectory", required=True)
    rep.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())

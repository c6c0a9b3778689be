"""Command-line interface.

Verbs:
  generate  -- emit the canonical target set / a subject's session plan
  simulate  -- run synthetic-user sessions and write trial logs
  serve     -- run the live session service
  analyze   -- run the statistics pipeline over a trial log (JSON output)
  report    -- render the analysis as plain-text tables

Exit codes: 0 success, 1 validation error, 2 runtime error.
The default config path may be set via the CDMAP_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .agent import AgentParams, simulate_session
from .config import ConfigError, SessionConfig, parse_config
from .experiment import ExperimentError, generate_target_set, plan_session
from .logs import LogError, read_csv, read_log_file, write_csv, write_log
from .report import analysis_to_json, render_analysis
from .server import SessionServer
from .stats import StatsError, analyze_records


def _load_config(path) -> SessionConfig:
    path = path or os.environ.get("CDMAP_CONFIG")
    if path is None:
        return SessionConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _load_records(path):
    path = Path(path)
    if path.suffix == ".csv":
        return read_csv(path.read_text(encoding="utf-8"))
    return read_log_file(path)


def cmd_generate(args) -> int:
    config = _load_config(args.config)
    if args.subject is None:
        targets = generate_target_set(config.display, args.seed)
        payload = [
            {
                "dir": t.direction,
                "center": list(t.center),
                "W_m": t.width,
                "D_m": t.distance,
                "id": t.id_value,
                "id_cat": t.category,
            }
            for t in targets
        ]
        print(json.dumps(payload, indent=2))
    else:
        plan = plan_session(args.subject, config.display, args.seed)
        payload = {
            "subject": plan.subject_index,
            "seed": plan.seed,
            "method_order": list(plan.method_order),
            "main": {
                m: [
                    {"dir": t.direction, "D_m": t.distance, "W_m": t.width, "id": t.id_value}
                    for t in targets
                ]
                for m, targets in plan.main.items()
            },
        }
        print(json.dumps(payload, indent=2))
    return 0


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    params = AgentParams(
        fitts_a=args.fitts_a,
        fitts_b=args.fitts_b,
        endpoint_noise_sigma=args.noise,
        clutch_penalty=args.clutch_penalty,
        reaction_time=args.reaction,
    )
    records = []
    for subject in range(args.subjects):
        plan = plan_session(subject, config.display, args.seed)
        records.extend(
            simulate_session(
                plan,
                params,
                config.display,
                config.calibration,
                seed=args.seed,
                zparams=config.zmap,
            )
        )
    out = write_log(records)
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
        print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
        if args.csv:
            csv_path = Path(args.out).with_suffix(".csv")
            csv_path.write_text(write_csv(records), encoding="utf-8")
            print(f"wrote CSV export to {csv_path}", file=sys.stderr)
    else:
        sys.stdout.write(out)
    return 0


def cmd_serve(args) -> int:
    config = _load_config(args.config)
    server = SessionServer((args.host, args.port), config, args.log_dir)
    print(f"session service on {args.host}:{args.port}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_analyze(args) -> int:
    records = _load_records(args.log)
    analysis = analyze_records(records, alpha=args.alpha)
    out = analysis_to_json(analysis)
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    else:
        print(out)
    return 0


def cmd_report(args) -> int:
    records = _load_records(args.log)
    analysis = analyze_records(records, alpha=args.alpha)
    print(render_analysis(analysis))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdmap", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit target sets or session plans")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--subject", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="run synthetic-user sessions")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--subjects", type=int, default=20)
    p.add_argument("--out")
    p.add_argument("--csv", action="store_true", help="also write a CSV export")
    p.add_argument("--fitts-a", type=float, default=AgentParams.fitts_a)
    p.add_argument("--fitts-b", type=float, default=AgentParams.fitts_b)
    p.add_argument("--noise", type=float, default=AgentParams.endpoint_noise_sigma)
    p.add_argument("--clutch-penalty", type=float, default=AgentParams.clutch_penalty)
    p.add_argument("--reaction", type=float, default=AgentParams.reaction_time)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the live session service")
    p.add_argument("--config")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7021)
    p.add_argument("--log-dir", default="logs")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("analyze", help="statistics pipeline, JSON output")
    p.add_argument("log")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="render analysis tables")
    p.add_argument("log")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ExperimentError, LogError, StatsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

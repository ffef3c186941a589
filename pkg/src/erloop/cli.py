"""Command-line entry points.

Subcommands:

* ``run``       — full active-learning loop with the simulated oracle,
                  writing a checkpoint directory and metrics JSON-lines
* ``serve``     — HTTP service for interactive labeling sessions
* ``eval``      — print the metrics JSON-lines stored in a checkpoint
* ``dump-cand`` — train a committee on the seed labels and dump the
                  merged candidate pairs as CSV

Exit codes: 0 success, 2 configuration/usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import ConfigError, ErloopError
from .loop import (
    init_session,
    prepare_data,
    run_session,
    save_session,
)
from .runconfig import (
    RunSpec,
    build_run_spec,
    format_run_spec,
    merge_values,
    read_config_file,
)

_FLAG_KEYS = ("data", "seed", "rounds", "budget", "strategy", "out")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="dataset directory")
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--seed", type=int, help="global random seed")
    common.add_argument("--rounds", type=int, help="active-learning rounds")
    common.add_argument("--budget", type=int, help="labels requested per round")
    common.add_argument("--strategy", help="example-selection strategy")
    common.add_argument("--out", help="output/checkpoint directory")

    parser = argparse.ArgumentParser(
        prog="erloop", description="Active-learning entity resolution."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run the loop with the simulated oracle")
    sub.add_parser("serve", parents=[common], help="start the labeling HTTP service")
    sub.add_parser("eval", parents=[common], help="print checkpoint metrics")
    sub.add_parser("dump-cand", parents=[common], help="write merged candidates as CSV")
    return parser


def _resolve_spec(args: argparse.Namespace) -> RunSpec:
    file_values = read_config_file(args.config) if args.config else {}
    flag_values = {
        key: getattr(args, key.replace("-", "_"))
        for key in _FLAG_KEYS
        if getattr(args, key.replace("-", "_"), None) is not None
    }
    return build_run_spec(merge_values(file_values, flag_values))


def _require_data(spec: RunSpec) -> str:
    if spec.data is None:
        raise ConfigError("a dataset directory is required (--data or config key 'data')")
    return spec.data


def _cmd_run(args: argparse.Namespace) -> int:
    spec = _resolve_spec(args)
    data = prepare_data(_require_data(spec), spec.config.encoder)
    state = run_session(data, spec.config)
    out_dir = spec.out or "erloop-out"
    save_session(state, spec.config, out_dir, config_text=format_run_spec(spec))
    for rm in state.history:
        print(rm.to_json())
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    spec = _resolve_spec(args)
    if spec.out is None:
        raise ConfigError("a checkpoint directory is required (--out)")
    metrics_path = Path(spec.out) / "metrics.jsonl"
    if not metrics_path.is_file():
        print(f"no metrics found at {metrics_path}", file=sys.stderr)
        return 3
    sys.stdout.write(metrics_path.read_text(encoding="utf-8"))
    return 0


def _cmd_dump_cand(args: argparse.Namespace) -> int:
    from .blocker import train_committee
    from .indexing import retrieve_candidates, retrieve_candidates_fixed, write_candidates
    from .loop import _P_COMMITTEE

    spec = _resolve_spec(args)
    cfg = spec.config
    data = prepare_data(_require_data(spec), cfg.encoder)
    state = init_session(data, cfg)
    if cfg.loop.fixed_blocker:
        cand = retrieve_candidates_fixed(
            data.emb_r, data.emb_s, data.store_r, data.store_s, cfg.index
        )
    else:
        committee = train_committee(
            state.labeled.positives,
            state.labeled.negatives,
            data.emb_r,
            data.emb_s,
            data.store_r,
            data.store_s,
            cfg.committee,
            (cfg.loop.global_seed, 1, _P_COMMITTEE),
        )
        cand = retrieve_candidates(
            committee, data.emb_r, data.emb_s, data.store_r, data.store_s, cfg.index
        )
    out_dir = Path(spec.out or "erloop-out")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "cand.csv"
    write_candidates(cand, path)
    print(path)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    spec = _resolve_spec(args)
    app = create_app(sessions_root=spec.out or "erloop-sessions")
    host = os.environ.get("ERLOOP_HOST", "127.0.0.1")
    port = int(os.environ.get("ERLOOP_PORT", "8000"))
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "serve": _cmd_serve,
    "eval": _cmd_eval,
    "dump-cand": _cmd_dump_cand,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints usage itself
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ErloopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())

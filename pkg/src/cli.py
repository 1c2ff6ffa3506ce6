"""Command-line entry point.

    rodflow run <config.ini>
    rodflow sweep <config.ini> --eta 0.1 1 10 [--workers N]
    rodflow converge <config.ini> --axis ell --values 2 4 6 8
    rodflow check <snapshot.bin> [--eta 1.0] [--tolerance 1e-10]
    rodflow serve [--storage-root storage] [--port 8000]

Exit codes: 0 ok, 2 configuration error, 3 blowup or structural violation,
4 cancellation identity failure, 1 anything else rodflow raised.
Every configuration key can be overridden from the environment, e.g.
``RODFLOW_PHYSICS__ETA=10``.
"""
import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

from core.config_loader import load_config
from core.errors import RodflowError
from core.models.model_enum import ConvergenceAxis

logger = logging.getLogger(__name__)


def _run(args: argparse.Namespace) -> int:
    from core.services.simulation_manager import run

    result = run(load_config(args.config))
    print(f"{result.status} t={result.final_state.t:.6g} -> {result.run_dir}")
    return result.exit_code


def _sweep(args: argparse.Namespace) -> int:
    from core.services.experiment_manager import sweep_eta

    frame = sweep_eta(load_config(args.config), args.eta, args.workers)
    print(frame.to_string(index=False))
    return 0 if (frame["exit_code"] == 0).all() else int(frame["exit_code"].max())


def _converge(args: argparse.Namespace) -> int:
    from core.services.experiment_manager import convergence_study

    frame = convergence_study(load_config(args.config), ConvergenceAxis(args.axis), args.values)
    print(frame.to_string(index=False))
    return 0


def _check(args: argparse.Namespace) -> int:
    from core.services.identity_checker import check_snapshot

    report = check_snapshot(args.snapshot, args.eta, args.tolerance, strict=True)
    print(json.dumps(report.as_dict(), indent=2))
    return 0


def _serve(args: argparse.Namespace) -> int:
    import uvicorn

    os.environ["RODFLOW_STORAGE_ROOT"] = args.storage_root
    uvicorn.run("main:app", host=args.host, port=args.port, log_level=args.log_level.lower())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rodflow", description="Doi model and DA closure simulator on the 2D torus")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one simulation")
    p.add_argument("config")
    p.set_defaults(handler=_run)

    p = sub.add_parser("sweep", help="independent runs over a list of eta values")
    p.add_argument("config")
    p.add_argument("--eta", type=float, nargs="+", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=_sweep)

    p = sub.add_parser("converge", help="final-state differences along one resolution axis")
    p.add_argument("config")
    p.add_argument("--axis", choices=[a.value for a in ConvergenceAxis], required=True)
    p.add_argument("--values", type=float, nargs="+", required=True)
    p.set_defaults(handler=_converge)

    p = sub.add_parser("check", help="validate a snapshot and run the cancellation identities on it")
    p.add_argument("snapshot")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.set_defaults(handler=_check)

    p = sub.add_parser("serve", help="serve the run history API")
    p.add_argument("--storage-root", default="storage")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except RodflowError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())

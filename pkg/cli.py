"""
Command-line entry point: validate, run, sweep.

    python cli.py validate --spec specs/bernstein_szego.yaml
    python cli.py run --spec specs/ps_family.yaml --tasks sumrule,l2 --n-max 50 --out output/ps
    python cli.py sweep --spec specs/ps_family.yaml --param beta --values 0.5,1.0,1.5
"""
import argparse
import sys
from typing import Dict, List, Optional

from service.experiment_service import EXIT_CONFIGURATION, EXIT_NUMERICAL, ExperimentService
from utils.exceptions import ConfigurationError, SpecValidationError, SzegoToolkitError
from utils.logger import get_logger

logger = get_logger(__name__)


def _overrides(args: argparse.Namespace) -> Dict[str, object]:
    tasks = [t.strip() for t in args.tasks.split(",") if t.strip()] if args.tasks else None
    return {"output_dir": args.out, "grid_m": args.grid_m, "n_max": args.n_max, "tasks": tasks, "seed": args.seed,
            "workers": args.workers}


def cmd_validate(args: argparse.Namespace) -> int:
    config = ExperimentService().validate_spec(args.spec, _overrides(args))
    print(config.echo())
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    service = ExperimentService()
    config = service.validate_spec(args.spec, _overrides(args))
    summary = service.run_experiment(config)
    for outcome in summary.outcomes:
        if outcome.status != "ok":
            print(f"{outcome.task}: ERROR in {outcome.error_module}: {outcome.error}")
            continue
        for check in outcome.checks:
            print(f"{outcome.task}.{check.name} [{check.module}]: {'pass' if check.passed else 'FAIL'} "
                  f"value={check.value} tolerance={check.tolerance}")
    return summary.exit_code


def cmd_sweep(args: argparse.Namespace) -> int:
    service = ExperimentService()
    config = service.validate_spec(args.spec, _overrides(args))
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    return service.sweep(config, args.param, values)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description="Polynomial Szego class toolkit (validate | run | sweep)")
    sub = p.add_subparsers(dest="cmd", required=True)
    for name, handler in (("validate", cmd_validate), ("run", cmd_run), ("sweep", cmd_sweep)):
        sp = sub.add_parser(name)
        sp.add_argument("--spec", type=str, required=True)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--grid-m", type=int, default=None)
        sp.add_argument("--n-max", type=int, default=None)
        sp.add_argument("--tasks", type=str, default=None, help="Comma-separated task names")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        if name == "sweep":
            sp.add_argument("--param", type=str, required=True, choices=["beta", "n_max", "grid_m"])
            sp.add_argument("--values", type=str, required=True)
        sp.set_defaults(func=handler)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecValidationError as e:
        logger.error(f"Spec validation failed at {', '.join(e.field_paths) or 'spec'}: {e}")
        print(f"configuration error ({', '.join(e.field_paths)}): {e}", file=sys.stderr)
        return EXIT_CONFIGURATION
    except ConfigurationError as e:
        logger.error(f"Configuration error in {e.module}: {e}")
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIGURATION
    except SzegoToolkitError as e:
        logger.error(f"Numerical failure in {e.module}: {e}")
        print(f"numerical failure in {e.module}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

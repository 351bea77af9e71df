"""Command-line front end: measure reports, sampling, empirical analysis, tests, tables."""
import sys
import logging
import argparse
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from . import tables
from .config import DELTA_STAR_CONVENTIONS, get_settings
from .csv_io import read_sample_csv, write_sample_csv
from .distribution import SkewElliptical, delta_from_lambda, sample, validate
from .errors import DomainError, exit_code_for
from .generators import SHAPED_KINDS, parse_family
from .inference import (TestConfig, b2_star_sq, calibrate_critical_values, empirical_measures,
                        standardize, verdicts)
from .measures import report_all
from .reports import FORMATS, render

logger = logging.getLogger(__name__)


def parse_vector(text: str) -> np.ndarray:
    """'0.2,1' -> array([0.2, 1.0])"""
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise DomainError(f"cannot parse vector {text!r}, expected comma-separated numbers")


def parse_matrix(text: str) -> np.ndarray:
    """Row-major '2,1;1,3' -> [[2, 1], [1, 3]]"""
    rows = [parse_vector(row) for row in text.split(";")]
    if len({len(r) for r in rows}) != 1:
        raise DomainError(f"matrix {text!r} has rows of unequal length")
    return np.vstack(rows)


def _dimension(args) -> int:
    for name in ("omega", "mu", "delta", "lam"):
        text = getattr(args, name, None)
        if text:
            return len(text.split(";")) if name == "omega" else len(text.split(","))
    raise DomainError("cannot infer the dimension: pass --omega (or --mu/--delta)")


def build_distribution(args, family: Optional[str] = None) -> SkewElliptical:
    """SkewElliptical from --family/--mu/--omega/--delta or --lambda"""
    k = _dimension(args)
    omega = parse_matrix(args.omega) if args.omega else np.eye(k)
    mu = parse_vector(args.mu) if args.mu else np.zeros(k)
    if args.delta and args.lam:
        raise DomainError("pass either --delta or --lambda, not both")
    if args.lam:
        delta = delta_from_lambda(parse_vector(args.lam), omega)
    elif args.delta:
        delta = parse_vector(args.delta)
    else:
        delta = np.zeros(k)
    return validate(mu, omega, delta, parse_family(family or args.family, k))


def _convention(args) -> str:
    return args.delta_star or get_settings().delta_star_convention


def _seed(args) -> int:
    return args.seed if args.seed is not None else get_settings().seed


def cmd_measures(args) -> str:
    D = build_distribution(args)
    report = report_all(D, _convention(args))
    for name, reason in report.status.items():
        logger.warning("%s unavailable: %s", name, reason)
    return render(report, args.format)


def cmd_sample(args) -> str:
    if args.n is None or args.n < 1:
        raise DomainError("sample needs --n >= 1")
    D = build_distribution(args)
    data = sample(D, args.n, _seed(args), workers=args.workers)
    return write_sample_csv(data)


def cmd_empirical(args) -> str:
    S = read_sample_csv(args.input)
    cfg = TestConfig(lattice_resolution=args.resolution, seed=_seed(args))
    return render(empirical_measures(S, cfg), args.format)


def cmd_test(args) -> str:
    S = read_sample_csv(args.input)
    seed = _seed(args)
    null_label = args.null_family or args.family
    if null_label != args.family:
        logger.warning("Calibrating under %s but testing a %s model", null_label, args.family)
    thresholds = {"K_b1": args.k_b1, "K_b2": args.k_b2, "K": args.K}
    calibration = None
    if any(v is None for v in thresholds.values()):
        fam = parse_family(null_label, S.k)
        cfg = TestConfig(lattice_resolution=args.resolution, K=args.K, seed=seed)
        if args.K is not None and args.k_b2 is None:
            logger.info("Calibrating K_b2 around the supplied K=%g", args.K)
        calibration = calibrate_critical_values(fam, S.k, S.n, args.reps, args.alpha, cfg,
                                                workers=args.workers)
        for name in thresholds:
            if thresholds[name] is None:
                thresholds[name] = getattr(calibration, name)
    else:
        logger.info("Using user-supplied thresholds, calibration skipped")
    X, _ = standardize(S)
    cfg = TestConfig(lattice_resolution=args.resolution, K=thresholds["K"], seed=seed)
    result = b2_star_sq(X, cfg)
    payload = {
        "n": S.n,
        "k": S.k,
        "alpha": args.alpha,
        "seed": seed,
        "null_family": null_label,
        "thresholds": thresholds,
        "calibration": calibration,
        "verdicts": verdicts(result, thresholds["K_b1"], thresholds["K_b2"]),
        "result": result,
    }
    return render(payload, args.format)


def cmd_tables(args) -> str:
    ids = args.table or list(tables.known_tables())
    fmt = args.format or "markdown"
    convention = _convention(args)
    if fmt == "csv":
        return "".join(tables.render_csv(table_id, convention) for table_id in ids)
    if fmt == "json":
        frames = [tables.to_frame(table_id, convention) for table_id in ids]
        return "".join(frame.to_json(orient="records", indent=2) + "\n" for frame in frames)
    return "\n".join(tables.render_markdown(table_id, convention) for table_id in ids)


def cmd_sweep(args) -> str:
    kind = args.family.partition(":")[0]
    if kind not in SHAPED_KINDS:
        raise DomainError(f"sweep needs a shaped family ({', '.join(SHAPED_KINDS)}), got {kind!r}")
    values = parse_vector(args.values)
    convention = _convention(args)
    reports = [report_all(build_distribution(args, f"{kind}:{v:g}"), convention) for v in values]
    return render(reports, args.format)


COMMANDS: Dict[str, Callable] = {
    "measures": cmd_measures,
    "sample": cmd_sample,
    "empirical": cmd_empirical,
    "test": cmd_test,
    "tables": cmd_tables,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--seed", type=int, help="random seed (default SKEWMEASURES_SEED)")
    common.add_argument("--log-level", help="logging level (default SKEWMEASURES_LOG_LEVEL)")
    common.add_argument("--delta-star", choices=DELTA_STAR_CONVENTIONS,
                        help="delta* convention for the scalar measures")
    common.add_argument("--workers", type=int, default=1)

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--family", default="normal",
                        help="normal, t:<m>, logistic, laplace, pearson2:<t> or pearson7:<t>")
    params.add_argument("--mu", help="location, e.g. '0,0'")
    params.add_argument("--omega", help="row-major scale matrix, e.g. '2,1;1,3'")
    params.add_argument("--delta", help="shape vector, e.g. '0.2,1'")
    params.add_argument("--lambda", dest="lam", help="skewness vector, converted to delta")

    formats = argparse.ArgumentParser(add_help=False)
    formats.add_argument("--format", choices=FORMATS, default="json")

    tests = argparse.ArgumentParser(add_help=False)
    tests.add_argument("input", help="CSV sample with a header row")
    tests.add_argument("--resolution", type=int, default=64, help="lattice resolution")

    parser = argparse.ArgumentParser(prog="skewmeasures",
                                     description="Skewness and kurtosis of skew-elliptical laws")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("measures", parents=[common, params, formats],
                   help="closed-form measure report")
    p = sub.add_parser("sample", parents=[common, params], help="draw a sample as CSV")
    p.add_argument("--n", type=int)
    sub.add_parser("empirical", parents=[common, formats, tests],
                   help="plug-in measures of a CSV sample")
    p = sub.add_parser("test", parents=[common, formats, tests],
                       help="directional skewness and kurtosis tests")
    p.add_argument("--family", default="normal", help="family of the delta = 0 null")
    p.add_argument("--null-family", help="calibrate under this family instead of --family")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--reps", type=int, default=500, help="calibration replicates")
    p.add_argument("--k-b1", type=float, help="skewness threshold, skips its calibration")
    p.add_argument("--k-b2", type=float, help="kurtosis threshold, skips its calibration")
    p.add_argument("--K", type=float, help="kurtosis centering constant")
    p = sub.add_parser("tables", parents=[common], help="reproduce published tables")
    p.add_argument("--table", action="append", help=f"table id ({', '.join(tables.known_tables())})")
    p.add_argument("--format", choices=FORMATS)
    p = sub.add_parser("sweep", parents=[common, params, formats],
                       help="measures over a range of family shape values")
    p.add_argument("--values", required=True, help="shape values, e.g. '3,5,10,30'")
    return parser


def _emit(text: str, output: Optional[str]) -> None:
    if output and output != "-":
        with open(output, "w", newline="") as fh:
            fh.write(text)
        logger.info("Wrote %s", output)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    try:
        level = (args.log_level or get_settings().log_level).upper()
        if not isinstance(logging.getLevelName(level), int):
            raise DomainError(f"unknown log level {level!r}")
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
        _emit(COMMANDS[args.command](args), args.output)
    except Exception as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"Error: {e}", file=sys.stderr)
        return exit_code_for(e)
    return 0


if __name__ == "__main__":
    sys.exit(main())

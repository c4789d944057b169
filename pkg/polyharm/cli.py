"""Command-line entry point: construct, verify, solve, enumerate, laplacian, polyenergy.

Every command prints one RunReport (JSON by default) to stdout or --output and
exits 0 on pass, 1 when a check fails and 2 on invalid input. `enumerate`
can print its table as CSV instead.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections.abc import Callable, Sequence
from dataclasses import replace
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any

from . import __version__
from .config import DEFAULT_RUN_LOG, Settings, load_settings
from .deformation import (
    TRIHARMONIC,
    ScanSummary,
    biharmonic_t,
    classify,
    corollary_check,
    enumerate_admissible,
    normalize_kind,
    statement_discrepancies,
    triharmonic_branch_closed_form,
    triharmonic_roots,
)
from .eigenmap import energy_profile, polynomial_eigenmap, verify_eigenmap_numeric
from .field_algebra import to_text
from .nakauchi import (
    TensorMap,
    check_iterated_laplacian,
    construct_nakauchi,
    energy_constant,
    iterated_laplacian_coefficient,
    verify_nakauchi,
)
from .numeric_oracle import (
    FDConfig,
    SamplePlan,
    convergence_order,
    crosscheck_laplacian,
    numeric_residual,
    scale_covariance,
)
from .reports import (
    STATUS_ERROR,
    STATUS_FAIL,
    STATUS_PASS,
    RunReport,
    admissibility_csv,
    combine,
)
from .residuals import (
    DeformedMap,
    bitension_report,
    properness_check,
    tension_residual,
    tritension_report,
)

logger = logging.getLogger(__name__)

Outcome = tuple[bool, dict[str, Any]]

_NOT_ECHOED = ("handler", "command", "config", "output", "format", "log_level")


def append_log(log_path: str, entry: str) -> None:
    os.makedirs(os.path.dirname(log_path) or ".", exist_ok=True)
    with open(log_path, "a", encoding="utf-8") as fh:
        fh.write(entry + "\n")


# -- helpers -------------------------------------------------------------------


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise ValueError(f"{args.command} needs {', '.join(missing)}")


def _exact_t(text: str | None) -> Fraction | None:
    if text is None:
        return None
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(
            f"--t must be a rational number such as 1/2 or 0.25, got {text!r}"
        ) from None


def _nakauchi(args: argparse.Namespace, settings: Settings) -> TensorMap:
    _require(args, "ell", "m")
    return construct_nakauchi(
        args.ell, args.m, allow_formal=bool(args.allow_formal), max_order=settings.max_order
    )


def _plan(m: int, settings: Settings) -> SamplePlan:
    return SamplePlan(m=m, count=settings.points, seed=settings.seed, r_min=settings.r_min)


def _fd(args: argparse.Namespace, settings: Settings) -> FDConfig:
    return FDConfig(h=settings.fd_step, richardson=bool(getattr(args, "richardson", False)))


def _properness(ell: int, m: int, values: Sequence[Any]) -> dict[str, bool]:
    return {str(v): properness_check(ell, m, v) for v in values}


# -- commands ------------------------------------------------------------------


def cmd_construct(args: argparse.Namespace, settings: Settings) -> Outcome:
    T = _nakauchi(args, settings)
    constant = energy_constant(T)
    payload = {
        "map": T.label,
        "ell": T.ell,
        "m": T.m,
        "components": T.size,
        "distinct_components": len(T.fields),
        "norm_sq": str(T.norm_sq),
        "energy_constant": None if constant is None else str(constant),
        "fields": [
            {"index": list(index), "multiplicity": mult, "field": to_text(w)}
            for index, w, mult in T.entries()
        ],
    }
    return True, payload


def _verify_nakauchi(args: argparse.Namespace, settings: Settings) -> Outcome:
    T = _nakauchi(args, settings)
    if args.mode == "numeric":
        plan = _plan(T.dim, settings)
        report = crosscheck_laplacian(
            T, 1, plan, _fd(args, settings), settings.tolerance, settings.threads
        )
        drift = scale_covariance(T, plan)
        passed = report.passed and drift <= settings.tolerance
        return passed, {"report": report.to_dict(), "scale_covariance": drift}
    report = combine("nakauchi", verify_nakauchi(T, settings.threads))
    return report.passed, {"report": report.to_dict()}


def _verify_harmonic(args: argparse.Namespace, settings: Settings) -> Outcome:
    if args.mode == "numeric":
        _require(args, "ell", "m", "t")
        report = numeric_residual(
            args.ell,
            args.m,
            float(_exact_t(args.t)),
            "harmonic",
            _plan(args.m, settings),
            settings.tolerance,
            settings.threads,
        )
        return report.passed, {"report": report.to_dict()}
    T = _nakauchi(args, settings)
    t = _exact_t(args.t)
    report = tension_residual(T if t is None else DeformedMap(T, t))
    return report.passed, {"report": report.to_dict()}


def _deformation_roots(equation: str, ell: int, m: int, t: Fraction | None) -> list[Any]:
    if t is not None:
        return [t]
    if equation == "biharmonic":
        return [biharmonic_t(ell, m)]
    return [r.t for r in triharmonic_roots(ell, m) if r.admissible]


def _verify_deformed(args: argparse.Namespace, settings: Settings) -> Outcome:
    _require(args, "ell", "m")
    equation = args.equation
    if args.ell > settings.max_order or args.m > settings.max_order:
        raise ValueError(
            f"(ell, m) = ({args.ell}, {args.m}) exceeds max_order={settings.max_order}"
        )
    t = _exact_t(args.t)
    values = _deformation_roots(equation, args.ell, args.m, t)
    admissible = [v for v in values if 0 < v < 1]
    if not admissible:
        raise ValueError(
            f"no admissible deformation parameter for {equation} at "
            f"(ell, m) = ({args.ell}, {args.m}): candidates {[str(v) for v in values]}"
        )

    if args.mode == "numeric":
        plan = _plan(args.m, settings)
        reports = [
            numeric_residual(
                args.ell,
                args.m,
                float(v),
                equation,
                plan,
                settings.tolerance,
                settings.threads,
            )
            for v in admissible
        ]
        report = reports[0] if len(reports) == 1 else combine(equation, reports)
        return report.passed, {"report": report.to_dict()}

    if equation == "biharmonic":
        report = bitension_report(args.ell, args.m, admissible[0], settings.threads)
    else:
        report = tritension_report(args.ell, args.m, t, settings.threads)
    proper = _properness(args.ell, args.m, admissible)
    passed = report.passed and all(proper.values())
    return passed, {"report": report.to_dict(), "proper": proper}


def cmd_verify(args: argparse.Namespace, settings: Settings) -> Outcome:
    if args.equation == "nakauchi":
        return _verify_nakauchi(args, settings)
    if args.equation == "harmonic":
        return _verify_harmonic(args, settings)
    return _verify_deformed(args, settings)


def cmd_solve(args: argparse.Namespace, settings: Settings) -> Outcome:
    _require(args, "ell", "m")
    record = classify(args.kind, args.ell, args.m)
    payload = record.to_dict()
    payload["t_minus"] = record.t_minus.to_dict() if record.t_minus else None
    payload["t_plus"] = record.t_plus.to_dict() if record.t_plus else None
    passed = True
    if record.kind == TRIHARMONIC and record.roots:
        closed = {}
        for root in record.roots:
            printed = triharmonic_branch_closed_form(args.ell, args.m, root.branch)
            closed[root.branch] = {
                "exact": None if printed is None else str(printed),
                "agrees": printed == root.t,
            }
            passed = passed and printed == root.t
        payload["closed_form"] = closed
    return passed, payload


def cmd_enumerate(args: argparse.Namespace, settings: Settings) -> Outcome:
    kind = normalize_kind(args.kind)
    records = enumerate_admissible(
        kind, args.ell_max, args.m_max, require_map=args.require_map, threads=settings.threads
    )
    uncovered = (
        corollary_check(kind, 3, args.m_max, settings.threads) if args.m_max >= 3 else []
    )
    summary = ScanSummary(
        kind=kind,
        records=records,
        discrepancies=statement_discrepancies(records),
        uncovered=uncovered,
    )
    payload = summary.to_dict()
    payload["csv"] = admissibility_csv(records)
    return True, payload


def cmd_laplacian(args: argparse.Namespace, settings: Settings) -> Outcome:
    T = _nakauchi(args, settings)
    k = args.k
    formula = iterated_laplacian_coefficient(T.ell, T.m, k)
    if args.mode == "numeric":
        plan = _plan(T.dim, settings)
        report = crosscheck_laplacian(
            T, k, plan, _fd(args, settings), settings.tolerance, settings.threads
        )
        payload = {"formula": formula.to_dict(), "report": report.to_dict()}
        if args.order:
            payload["convergence_order"] = convergence_order(T, k, plan)
        return report.passed, payload
    report = check_iterated_laplacian(T, k, settings.threads)
    return report.passed, {"formula": formula.to_dict(), "report": report.to_dict()}


def cmd_polyenergy(args: argparse.Namespace, settings: Settings) -> Outcome:
    lam = args.lam
    eigenmap = None
    if args.k is not None:
        _require(args, "m")
        spec = polynomial_eigenmap(args.k, args.m)
        if lam is None:
            lam = float(spec.lam)
        eigenmap = verify_eigenmap_numeric(
            spec, _plan(args.m + 1, settings), _fd(args, settings), settings.tolerance
        )
    delta = None if args.critical else args.delta
    profile = energy_profile(args.r, delta, lam, args.m if lam is not None else None)
    payload: dict[str, Any] = {"profile": profile.to_dict()}
    passed = True
    if eigenmap is not None:
        payload["eigenmap"] = eigenmap.to_dict()
        passed = eigenmap.passed
    return passed, payload


# -- parser --------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, help="Dimension of the domain R^m")
    common.add_argument("--ell", type=int, help="Order l of the Nakauchi map")
    common.add_argument(
        "--format", choices=("json", "csv", "text"), default="json", help="Report format"
    )
    common.add_argument("--output", help="Write the report to this file instead of stdout")
    common.add_argument("--seed", type=int, help="Seed for numeric sampling")
    common.add_argument("--tolerance", type=float, help="Numeric pass threshold")
    common.add_argument("--points", type=int, help="Number of sample points")
    common.add_argument("--h", type=float, help="Relative finite-difference step")
    common.add_argument("--r-min", type=float, help="Reject sample points with |x| < r-min")
    common.add_argument("--threads", type=int, help="Worker threads for the fan-out")
    common.add_argument(
        "--allow-formal",
        action="store_true",
        default=None,
        help="Build the formal recursion for l > m",
    )
    common.add_argument("--config", help="YAML settings file (default: polyharm.yml)")
    common.add_argument(
        "--log-level",
        choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"),
        help="Log level for stderr",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="polyharm",
        description="Exact verification of polyharmonic deformations of Nakauchi maps",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="Build u^(l) on R^m")
    p.set_defaults(handler=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="Check a map equation")
    p.add_argument(
        "equation", choices=("nakauchi", "harmonic", "biharmonic", "triharmonic")
    )
    p.add_argument("--mode", choices=("symbolic", "numeric"), default="symbolic")
    p.add_argument("--t", help="Deformation parameter sin^2, e.g. 1/2 (default: the roots)")
    p.add_argument("--richardson", action="store_true", help="Richardson-extrapolated FD")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("solve", parents=[common], help="Deformation roots for one pair")
    p.add_argument("kind", choices=("bih", "tri"))
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("enumerate", parents=[common], help="Admissibility table")
    p.add_argument("kind", choices=("bih", "tri"))
    p.add_argument("--m-max", type=int, default=30)
    p.add_argument("--ell-max", type=int, default=10)
    p.add_argument(
        "--no-require-map",
        dest="require_map",
        action="store_false",
        help="Also list pairs with l > m, where no Nakauchi map exists",
    )
    p.set_defaults(handler=cmd_enumerate)

    p = sub.add_parser("laplacian", parents=[common], help="Iterated Laplacian closed form")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--mode", choices=("symbolic", "numeric"), default="symbolic")
    p.add_argument("--richardson", action="store_true", help="Richardson-extrapolated FD")
    p.add_argument("--order", action="store_true", help="Also measure the FD order")
    p.set_defaults(handler=cmd_laplacian)

    p = sub.add_parser("polyenergy", parents=[common], help="r-energy of a deformed eigenmap")
    p.add_argument("--r", type=int, required=True)
    angle = p.add_mutually_exclusive_group()
    angle.add_argument("--delta", type=float)
    angle.add_argument("--critical", action="store_true")
    p.add_argument("--lambda", dest="lam", type=float, help="Eigenmap energy density")
    p.add_argument("--k", type=int, help="Check the degree-k polynomial eigenmap of S^m")
    p.set_defaults(handler=cmd_polyenergy)
    return parser


# -- driver --------------------------------------------------------------------


def _settings_for(args: argparse.Namespace) -> Settings:
    settings = load_settings(args.config)
    overrides = {
        "seed": args.seed,
        "points": args.points,
        "tolerance": args.tolerance,
        "fd_step": args.h,
        "r_min": args.r_min,
        "threads": args.threads,
        "log_level": args.log_level,
    }
    return replace(settings, **{k: v for k, v in overrides.items() if v is not None})


def _command_name(args: argparse.Namespace) -> str:
    extra = getattr(args, "equation", None) or getattr(args, "kind", None)
    return f"{args.command} {extra}" if extra else args.command


def _parameters(args: argparse.Namespace) -> dict[str, Any]:
    return {
        k: v
        for k, v in vars(args).items()
        if v is not None and k not in _NOT_ECHOED and k not in ("equation", "kind")
    }


def _render(report: RunReport, fmt: str) -> str:
    if fmt == "text":
        return report.to_text() + "\n"
    return report.to_json() + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        os.makedirs(os.path.dirname(os.path.abspath(output)), exist_ok=True)
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_run_log(path: str, report: RunReport) -> None:
    if not path:
        return
    entry = "\t".join(
        (
            datetime.now(timezone.utc).isoformat(),
            report.command,
            report.status,
            str(report.exit_code),
            json.dumps(report.parameters, sort_keys=True, default=str),
        )
    )
    try:
        append_log(path, entry)
    except OSError as exc:
        logger.warning("could not write run log %s: %s", path, exc)


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    command = _command_name(args)
    parameters = _parameters(args)
    fmt = args.format
    run_log = os.environ.get("POLYHARM_RUN_LOG", DEFAULT_RUN_LOG)
    seed = None
    table = None
    try:
        settings = _settings_for(args)
        run_log = settings.run_log
        seed = settings.seed
        logging.basicConfig(
            level=settings.log_level,
            stream=sys.stderr,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        if fmt == "csv" and args.command != "enumerate":
            raise ValueError("--format csv is only available for enumerate")
        handler: Callable[[argparse.Namespace, Settings], Outcome] = args.handler
        passed, payload = handler(args, settings)
        table = payload.pop("csv", None)
        status = STATUS_PASS if passed else STATUS_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status, payload = STATUS_ERROR, {"error": str(exc)}
        if fmt == "csv":
            fmt = "json"

    report = RunReport(
        command=command,
        parameters=parameters,
        status=status,
        payload=payload,
        version=__version__,
        seed=seed,
    )
    if fmt == "csv":
        _emit(table, args.output)
    else:
        _emit(_render(report, fmt), args.output)
    _write_run_log(run_log, report)
    logger.info("%s finished with status %s", command, status)
    return report.exit_code


def main(argv: Sequence[str] | None = None) -> int:
    return run_cli(argv)


if __name__ == "__main__":
    raise SystemExit(main())

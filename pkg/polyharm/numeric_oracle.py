"""Floating-point oracle: seeded sample points, field evaluation, finite differences.

Fields are evaluated exactly from the binary value of each coordinate and
rounded once, so finite-difference stencils see correctly rounded inputs. The
cross-checks are hybrid: the finite-difference Laplacian is always applied to
the exact symbolic Delta^(k-1), never iterated numerically.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .field_algebra import RadialScalar, exact_parts, laplacian, round_parts
from .nakauchi import TensorMap, construct_nakauchi, iterated_laplacian_symbolic
from .parallel import ordered_map
from .reports import ComponentResidual, ResidualReport
from .residuals import (
    LAST_INDEX,
    Assembly,
    assemble_bitension_sphere,
    assemble_tension,
    tritension_terms,
)

logger = logging.getLogger(__name__)

EQUATIONS = ("harmonic", "biharmonic", "triharmonic")
ABSOLUTE_FLOOR = 1e-9
WORST_OFFENDERS = 5


@dataclass(frozen=True)
class SamplePlan:
    """Uniform points in [-box, box]^m, rejecting those with |x| < r_min."""

    m: int
    count: int = 100
    seed: int = 42
    r_min: float = 0.3
    box: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"dimension must be >= 1, got {self.m}")
        if self.count < 1:
            raise ValueError(f"need at least one sample point, got {self.count}")
        if self.r_min <= 0:
            raise ValueError(f"r_min must be positive, got {self.r_min}")
        if self.box <= 0 or self.r_min >= self.box * math.sqrt(self.m):
            raise ValueError(
                f"r_min={self.r_min} leaves no room in the box [-{self.box}, {self.box}]^{self.m}"
            )


@dataclass(frozen=True)
class FDConfig:
    """Central second-order stencil with step h * |x|."""

    h: float = 1e-4
    richardson: bool = False

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"finite-difference step must be positive, got {self.h}")


def sample_points(plan: SamplePlan) -> np.ndarray:
    """Deterministic (count, m) array of sample points."""
    rng = np.random.default_rng(plan.seed)
    kept: list[np.ndarray] = []
    total = 0
    while total < plan.count:
        batch = rng.uniform(-plan.box, plan.box, size=(plan.count, plan.m))
        batch = batch[np.linalg.norm(batch, axis=1) >= plan.r_min]
        kept.append(batch)
        total += len(batch)
    return np.concatenate(kept)[: plan.count]


def sphere_points(plan: SamplePlan) -> np.ndarray:
    """Sample points projected to the unit sphere."""
    pts = sample_points(plan)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def evaluate(f: RadialScalar, x: Sequence[float]) -> float:
    """f(x) with a single final rounding; raises at the origin."""
    value, odd, r2 = exact_parts(f, [float(c) for c in x])
    return round_parts(value, odd, r2)


def evaluate_component(T: TensorMap, index: Sequence[int], x: Sequence[float]) -> float:
    """The normalized component u = sqrt(norm_sq) * w at x."""
    return math.sqrt(T.norm_sq) * evaluate(T.component(index), x)


def _step(x: np.ndarray, cfg: FDConfig) -> float:
    radius = float(np.linalg.norm(x))
    if cfg.h * len(x) >= 1:
        raise ValueError(f"step {cfg.h} is too large for dimension {len(x)}")
    if radius == 0:
        raise ValueError("finite differences are undefined at the origin")
    return cfg.h * radius


def _central_laplacian(F: Callable[[np.ndarray], float], x: np.ndarray, h: float) -> float:
    centre = 2.0 * F(x)
    total = 0.0
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        total += (F(x + e) - centre + F(x - e)) / (h * h)
    return total


def fd_laplacian(
    F: Callable[[np.ndarray], float], x: Sequence[float], cfg: FDConfig = FDConfig()
) -> float:
    """Sum of central second differences; optional Richardson step (h, h/2)."""
    x = np.asarray(x, dtype=float)
    h = _step(x, cfg)
    coarse = _central_laplacian(F, x, h)
    if not cfg.richardson:
        return coarse
    fine = _central_laplacian(F, x, h / 2)
    return (4.0 * fine - coarse) / 3.0


def fd_gradient(
    F: Callable[[np.ndarray], float], x: Sequence[float], cfg: FDConfig = FDConfig()
) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    h = _step(x, cfg)
    grad = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (F(x + e) - F(x - e)) / (2 * h)
    return grad


@dataclass
class _Offender:
    error: float
    point: np.ndarray
    index: tuple[int, ...]
    approx: float
    exact: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "point": [float(c) for c in self.point],
            "index": list(self.index),
            "error": float(self.error),
            "approx": float(self.approx),
            "exact": float(self.exact),
        }


def _worst(offenders: list[_Offender]) -> list[dict[str, Any]]:
    offenders.sort(key=lambda o: o.error, reverse=True)
    return [o.to_dict() for o in offenders[:WORST_OFFENDERS]]


def _laplacian_errors(
    T: TensorMap, k: int, points: np.ndarray, cfg: FDConfig, threads: int
) -> list[list[_Offender]]:
    """Per distinct component, the scaled errors at every point."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    inner = T if k == 1 else iterated_laplacian_symbolic(T, k - 1, threads)
    radii = np.linalg.norm(points, axis=1)

    def check(args: tuple[tuple[int, ...], RadialScalar]) -> list[_Offender]:
        index, g = args
        exact_field = laplacian(g)
        lifted = g.degree - 2
        rows = []
        for x, radius in zip(points, radii):
            approx = fd_laplacian(lambda y: evaluate(g, y), x, cfg)
            exact = evaluate(exact_field, x)
            # rescale to the unit sphere
            scale = float(radius) ** (-lifted)
            rows.append(
                _Offender(
                    float(abs(approx - exact) * scale),
                    x,
                    index,
                    approx,
                    exact,
                )
            )
        reference = max(
            max(abs(evaluate(exact_field, x / r)) for x, r in zip(points, radii)),
            max(abs(evaluate(g, x / r)) for x, r in zip(points, radii)),
            ABSOLUTE_FLOOR,
        )
        for row in rows:
            row.error /= reference
        return rows

    pairs = list(zip(T.representatives, inner.fields))
    return ordered_map(check, pairs, threads)


def crosscheck_laplacian(
    T: TensorMap,
    k: int,
    plan: SamplePlan,
    cfg: FDConfig = FDConfig(),
    tolerance: float = 1e-5,
    threads: int = 1,
) -> ResidualReport:
    """FD Laplacian of the symbolic Delta^(k-1) against the symbolic Delta^k."""
    if plan.m != T.dim:
        raise ValueError(f"plan dimension {plan.m} != map dimension {T.dim}")
    points = sample_points(plan)
    per_component = _laplacian_errors(T, k, points, cfg, threads)
    components = []
    everything: list[_Offender] = []
    for (index, _, mult), rows in zip(T.entries(), per_component):
        worst = max(r.error for r in rows)
        components.append(
            ComponentResidual(index=index, multiplicity=mult, magnitude=worst)
        )
        everything.extend(rows)
    max_error = float(max(c.magnitude for c in components))
    logger.info("crosscheck %s k=%d: max relative error %.3e", T.label, k, max_error)
    return ResidualReport(
        equation="iterated_laplacian_fd",
        components=components,
        passed=bool(max_error <= tolerance),
        tolerance=tolerance,
        details={
            "map": T.label,
            "k": k,
            "points": plan.count,
            "seed": plan.seed,
            "h": cfg.h,
            "richardson": cfg.richardson,
            "max_relative_error": max_error,
            "worst_offenders": _worst(everything),
        },
    )


def convergence_order(
    T: TensorMap,
    k: int,
    plan: SamplePlan,
    h_coarse: float = 1e-2,
    h_fine: float = 5e-3,
) -> float:
    """Observed order of the FD Laplacian from the summed errors at two steps."""
    if not 0 < h_fine < h_coarse:
        raise ValueError(f"need 0 < h_fine < h_coarse, got {h_fine}, {h_coarse}")
    points = sample_points(plan)
    totals = []
    for h in (h_coarse, h_fine):
        rows = _laplacian_errors(T, k, points, FDConfig(h=h), threads=1)
        totals.append(sum(r.error for comp in rows for r in comp))
    if totals[1] == 0:
        raise ValueError("the finite-difference error vanished; no order to measure")
    return math.log(totals[0] / totals[1]) / math.log(h_coarse / h_fine)


def scale_covariance(T: TensorMap, plan: SamplePlan) -> float:
    """Max |u(2x) - u(x)| over components and points; u must be degree 0."""
    if any(w.degree != 0 for w in T.fields):
        raise ValueError("scale covariance needs homogeneity degree 0 components")
    worst = 0.0
    for x in sample_points(plan):
        for w in T.fields:
            worst = max(worst, abs(evaluate(w, 2 * x) - evaluate(w, x)))
    return worst * math.sqrt(T.norm_sq)


def equation_assembly(ell: int, m: int, equation: str, threads: int = 1) -> Assembly:
    T = construct_nakauchi(ell, m)
    if equation == "harmonic":
        return assemble_tension(T)
    if equation == "biharmonic":
        return assemble_bitension_sphere(T, threads)
    if equation == "triharmonic":
        return tritension_terms(ell, m, threads).assembly
    raise ValueError(f"unknown equation {equation!r}; use one of {EQUATIONS}")


def numeric_residual(
    ell: int,
    m: int,
    t_value: float,
    equation: str,
    plan: SamplePlan,
    tolerance: float = 1e-5,
    threads: int = 1,
) -> ResidualReport:
    """Magnitudes of the residual of q at t_value over the sample points.

    The t-polynomial is collapsed exactly at the binary value of t_value, then
    each component is evaluated with one rounding and multiplied by
    sin * sqrt(N) (cos for the last component).
    """
    if not 0 < t_value < 1:
        raise ValueError(f"t must lie strictly between 0 and 1, got {t_value}")
    assembly = equation_assembly(ell, m, equation, threads)
    T = assembly.base
    t_exact = Fraction(float(t_value))
    sin = math.sqrt(t_value)
    cos = math.sqrt(1 - t_value)
    block_factor = sin * math.sqrt(T.norm_sq)

    fields: list[tuple[tuple[int, ...], RadialScalar, float, int]] = [
        (index, poly.at(t_exact)[0], block_factor, mult)
        for (index, _, mult), poly in zip(T.entries(), assembly.block)
    ]
    if assembly.last is not None:
        fields.append((LAST_INDEX, assembly.last.at(t_exact)[0], cos, 1))

    points = sample_points(plan)

    def magnitudes(x: np.ndarray) -> list[float]:
        return [abs(factor * evaluate(f, x)) for _, f, factor, _ in fields]

    table = ordered_map(magnitudes, list(points), threads)
    per_point = [max(row) for row in table]
    components = []
    offenders = []
    for j, (index, _, _, mult) in enumerate(fields):
        column = [row[j] for row in table]
        components.append(
            ComponentResidual(index=index, multiplicity=mult, magnitude=max(column))
        )
        for x, value in zip(points, column):
            offenders.append(_Offender(value, x, index, value, 0.0))
    max_magnitude = float(max(per_point))
    min_point = float(min(per_point))
    return ResidualReport(
        equation=equation,
        components=components,
        passed=bool(max_magnitude <= tolerance),
        tolerance=tolerance,
        details={
            "map": T.label,
            "t": t_value,
            "points": plan.count,
            "seed": plan.seed,
            "max_magnitude": max_magnitude,
            "min_point_magnitude": min_point,
            "bounded_away": bool(min_point > tolerance),
            "worst_offenders": _worst(offenders),
        },
    )

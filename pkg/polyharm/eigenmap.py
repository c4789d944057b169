"""r-energy of deformed eigenmaps q = (sin(delta) v, cos(delta)) between spheres.

For an eigenmap v: S^m -> S^(n-1) with |grad v|^2 = lambda the r-energy of q
reduces to

    E_r(q) = vol(S^m) * lambda^r * eps_r(delta),   eps_r = sin^2 cos^(2(r-1)),

so q is r-harmonic exactly at the critical points of eps_r, i.e. at
sin(delta) = 1/sqrt(r), where the second derivative is negative: the critical
points are unstable within the deformation family.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any

import numpy as np

from .nakauchi import TensorMap, nakauchi_eigenmap, radial_projection
from .numeric_oracle import (
    FDConfig,
    SamplePlan,
    evaluate,
    fd_gradient,
    fd_laplacian,
    sphere_points,
)
from .reports import ComponentResidual, ResidualReport

logger = logging.getLogger(__name__)


def _check_order(r: int) -> None:
    if r < 2:
        raise ValueError(f"the r-energy needs r >= 2 (r = 1 is the harmonic case), got {r}")


def _check_angle(delta: float) -> None:
    if not 0 < delta < math.pi / 2:
        raise ValueError(f"delta must lie strictly between 0 and pi/2, got {delta}")


def epsilon_r(delta: float, r: int) -> float:
    _check_order(r)
    _check_angle(delta)
    return math.sin(delta) ** 2 * math.cos(delta) ** (2 * (r - 1))


def epsilon_r_exact(t: Fraction | int, r: int) -> Fraction:
    """eps_r at sin^2(delta) = t."""
    _check_order(r)
    t = Fraction(t)
    if not 0 < t < 1:
        raise ValueError(f"t = sin^2(delta) must lie strictly between 0 and 1, got {t}")
    return t * (1 - t) ** (r - 1)


def epsilon_r_derivatives(delta: float, r: int) -> tuple[float, float]:
    """First and second delta-derivatives of eps_r."""
    _check_order(r)
    _check_angle(delta)
    s, c = math.sin(delta), math.cos(delta)
    d1 = 2 * s * c ** (2 * r - 3) * (1 - r * s * s)
    d2 = (2 * c ** (2 * r - 2) - 2 * (2 * r - 3) * s * s * c ** (2 * r - 4)) * (
        1 - r * s * s
    ) - 4 * r * s * s * c ** (2 * r - 2)
    return d1, d2


def critical_delta(r: int) -> float:
    """The unique critical angle, sin(delta) = 1/sqrt(r)."""
    _check_order(r)
    return math.asin(1 / math.sqrt(r))


def critical_epsilon_exact(r: int) -> Fraction:
    """eps_r at the critical angle: (1/r)(1 - 1/r)^(r-1)."""
    return epsilon_r_exact(Fraction(1, r), r)


def sphere_volume(m: int) -> float:
    """Volume of the round unit sphere S^m."""
    if m < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {m}")
    return 2 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2)


def r_energy(lam: float, r: int, delta: float, m: int) -> float:
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return sphere_volume(m) * lam**r * epsilon_r(delta, r)


def iterated_tension_factor(lam: float, delta: float, k: int) -> float:
    """(-1)^k lambda^k cos^(2k)(delta)."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return (-lam * math.cos(delta) ** 2) ** k


def iterated_tension_factor_exact(lam: Fraction | int, t: Fraction | int, k: int) -> Fraction:
    """The same factor at sin^2(delta) = t, exactly."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return (-Fraction(lam) * (1 - Fraction(t))) ** k


def eigenmap_lambda(k: int, m: int) -> int:
    """Energy density k(k+m-1) of a degree-k polynomial eigenmap of S^m."""
    if k < 1 or m < 1:
        raise ValueError(f"need k >= 1 and m >= 1, got k={k}, m={m}")
    return k * (k + m - 1)


@dataclass(frozen=True)
class EigenmapSpec:
    """An eigenmap S^m -> S^target_dim with energy density lam."""

    m: int
    target_dim: int
    lam: Fraction
    map: TensorMap | None = None

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.map is not None and self.map.dim != self.m + 1:
            raise ValueError(
                f"the map lives on R^{self.map.dim}, expected R^{self.m + 1} for S^{self.m}"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "target_dim": self.target_dim,
            "lambda": str(self.lam),
            "map": self.map.label if self.map else None,
        }


def identity_eigenmap(m: int) -> EigenmapSpec:
    """id: S^m -> S^m, lambda = m."""
    return EigenmapSpec(m, m, Fraction(m), radial_projection(m + 1))


def polynomial_eigenmap(k: int, m: int) -> EigenmapSpec:
    """u^(k) restricted to S^m, lambda = k(k+m-1)."""
    T = nakauchi_eigenmap(k, m)
    return EigenmapSpec(m, T.size - 1, Fraction(eigenmap_lambda(k, m)), T)


def verify_eigenmap_numeric(
    spec: EigenmapSpec,
    plan: SamplePlan,
    cfg: FDConfig = FDConfig(),
    tolerance: float = 1e-5,
) -> ResidualReport:
    """Check |v| = 1, |grad v|^2 = lambda and Delta v + |grad v|^2 v = 0 on S^m.

    Components are degree-0 extensions, so at points of the unit sphere their
    Euclidean gradient and Laplacian are the intrinsic ones.
    """
    T = spec.map
    if T is None:
        raise ValueError("verify_eigenmap_numeric needs an attached map")
    plan = replace(plan, m=spec.m + 1)
    points = sphere_points(plan)
    lam = float(spec.lam)
    scale = math.sqrt(T.norm_sq)

    def u(w):
        return lambda y: scale * evaluate(w, y)

    worst_energy = 0.0
    worst_norm = 0.0
    tension = [0.0] * len(T.fields)
    for x in points:
        values = [scale * evaluate(w, x) for w in T.fields]
        energy = sum(
            mult * float(np.dot(g, g))
            for mult, g in zip(T.multiplicity, (fd_gradient(u(w), x, cfg) for w in T.fields))
        )
        norm = sum(mult * v * v for mult, v in zip(T.multiplicity, values))
        worst_energy = max(worst_energy, abs(energy - lam) / lam)
        worst_norm = max(worst_norm, abs(norm - 1))
        for i, w in enumerate(T.fields):
            residual = fd_laplacian(u(w), x, cfg) + energy * values[i]
            tension[i] = max(tension[i], abs(residual) / max(lam, 1.0))

    components = [
        ComponentResidual(index=index, multiplicity=mult, magnitude=tension[i])
        for i, (index, _, mult) in enumerate(T.entries())
    ]
    passed = bool(
        worst_energy <= tolerance
        and worst_norm <= tolerance
        and all(c.magnitude <= tolerance for c in components)
    )
    logger.info(
        "eigenmap %s: energy deviation %.3e, norm deviation %.3e",
        T.label,
        worst_energy,
        worst_norm,
    )
    return ResidualReport(
        equation="eigenmap",
        components=components,
        passed=passed,
        tolerance=tolerance,
        details={
            "spec": spec.to_dict(),
            "points": plan.count,
            "seed": plan.seed,
            "max_energy_deviation": float(worst_energy),
            "max_norm_deviation": float(worst_norm),
        },
    )


@dataclass(frozen=True)
class REnergyProfile:
    r: int
    delta: float
    epsilon: float
    d1: float
    d2: float
    delta_critical: float
    critical_d2: float
    energy: float | None = None

    @property
    def stable(self) -> bool:
        """Stability of the critical point within the deformation family."""
        return self.critical_d2 > 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "r": self.r,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "d1": self.d1,
            "d2": self.d2,
            "delta_critical": self.delta_critical,
            "sin2_critical": str(Fraction(1, self.r)),
            "epsilon_critical": str(critical_epsilon_exact(self.r)),
            "critical_d2": self.critical_d2,
            "energy": self.energy,
            "stable": self.stable,
        }


def energy_profile(
    r: int,
    delta: float | None = None,
    lam: float | None = None,
    m: int | None = None,
) -> REnergyProfile:
    """eps_r and its derivatives at delta (default: the critical angle)."""
    crit = critical_delta(r)
    if delta is None:
        delta = crit
    d1, d2 = epsilon_r_derivatives(delta, r)
    energy = None
    if lam is not None:
        if m is None:
            raise ValueError("the absolute energy needs the sphere dimension m")
        energy = r_energy(lam, r, delta, m)
    return REnergyProfile(
        r=r,
        delta=delta,
        epsilon=epsilon_r(delta, r),
        d1=d1,
        d2=d2,
        delta_critical=crit,
        critical_d2=epsilon_r_derivatives(crit, r)[1],
        energy=energy,
    )


def _grid(points: int) -> np.ndarray:
    return np.linspace(0.0, math.pi / 2, points + 2)[1:-1]


def critical_grid_scan(r: int, points: int = 10**4) -> list[float]:
    """Angles in (0, pi/2) where d eps_r / d delta changes sign on a uniform grid."""
    _check_order(r)
    delta = _grid(points)
    s, c = np.sin(delta), np.cos(delta)
    d1 = 2 * s * c ** (2 * r - 3) * (1 - r * s * s)
    flips = np.nonzero(np.sign(d1[:-1]) * np.sign(d1[1:]) < 0)[0]
    return [float((delta[i] + delta[i + 1]) / 2) for i in flips]


def argmax_grid(r: int, points: int = 10**5) -> tuple[float, float]:
    """(delta, spacing) of the largest eps_r on a uniform grid."""
    _check_order(r)
    delta = _grid(points)
    eps = np.sin(delta) ** 2 * np.cos(delta) ** (2 * (r - 1))
    return float(delta[int(np.argmax(eps))]), float(delta[1] - delta[0])

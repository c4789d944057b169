"""Sphere-target residuals of the deformed maps q = (sin * u^(l), cos).

Write t = sin^2 and u = sqrt(N) w with N = norm_sq of the base map. Every
residual of q is a polynomial in t with radial-rational coefficients once the
common factor sin * sqrt(N) is taken out of the first block (and cos out of
the last component), so residuals are stored as `TPolyField`: the coefficient
fields F_k of sum_k t^k F_k.

For Nakauchi maps each block residual factors as c(t) * w / r^(2k) and the
last component as c_last(t) / r^(2k); `Assembly.factor` extracts these
constraint polynomials.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .deformation import (
    ConstraintPoly,
    DeformationParameter,
    Exact,
    QuadExt,
    biharmonic_t,
    energy_constant,
    triharmonic_poly,
    triharmonic_roots,
)
from .field_algebra import (
    RadialScalar,
    RadialVector,
    _zero_field,
    add,
    constant,
    gradient,
    gradient_dot,
    inverse_radius_power,
    is_zero,
    laplacian,
    mul,
    multiply_radial,
    proportionality,
    scale,
    to_text,
)
from .nakauchi import TensorMap, construct_nakauchi, energy_density, verify_harmonicity
from .parallel import ordered_map
from .reports import ComponentResidual, ResidualReport

logger = logging.getLogger(__name__)

LAST_INDEX = (0,)


class ResidualStructureError(RuntimeError):
    """An assembled residual is not of the form c(t) * field."""


# -- polynomials in t with field coefficients -----------------------------------


@dataclass(frozen=True)
class TPolyField:
    """sum_k t^k * coefficients[k]; all coefficients share dimension and degree."""

    dim: int
    degree: int
    coefficients: tuple[RadialScalar, ...] = ()

    @classmethod
    def from_mapping(
        cls, dim: int, degree: int, mapping: dict[int, RadialScalar]
    ) -> TPolyField:
        top = max(mapping, default=-1)
        coeffs = [_zero_field(dim, degree) for _ in range(top + 1)]
        for k, f in mapping.items():
            coeffs[k] = add(coeffs[k], f)
        return cls(dim, degree, tuple(coeffs))

    def coefficient(self, k: int) -> RadialScalar:
        if k < len(self.coefficients):
            return self.coefficients[k]
        return _zero_field(self.dim, self.degree)

    def __add__(self, other: TPolyField) -> TPolyField:
        n = max(len(self.coefficients), len(other.coefficients))
        return TPolyField(
            self.dim,
            self.degree,
            tuple(add(self.coefficient(k), other.coefficient(k)) for k in range(n)),
        )

    def is_zero(self) -> bool:
        return all(is_zero(f) for f in self.coefficients)

    def at(self, t: Exact) -> tuple[RadialScalar, RadialScalar, int]:
        """Value at t as (rational part, surd part, D): F = A + sqrt(D) * B."""
        t = QuadExt.coerce(t)
        rational = _zero_field(self.dim, self.degree)
        surd = _zero_field(self.dim, self.degree)
        power = QuadExt(1)
        for f in self.coefficients:
            rational = add(rational, scale(f, power.a))
            surd = add(surd, scale(f, power.b))
            power = power * t
        return rational, surd, t.d

    def factor(self, base: RadialScalar) -> ConstraintPoly | None:
        """c(t) with self = c(t) * base, or None."""
        coeffs = []
        for f in self.coefficients:
            k = proportionality(f, base)
            if k is None:
                return None
            coeffs.append(k)
        return ConstraintPoly(tuple(coeffs))


def _component_at(index, poly: TPolyField, t: Exact, mult: int) -> ComponentResidual:
    rational, surd, d = poly.at(t)
    zero = is_zero(rational) and is_zero(surd)
    text = None
    if not zero:
        text = to_text(rational)
        if not is_zero(surd):
            text = f"{text} + sqrt({d})*[{to_text(surd)}]"
    return ComponentResidual(
        index=tuple(index), multiplicity=mult, exact_zero=zero, residual=text
    )


# -- deformed maps ------------------------------------------------------------------


@dataclass(frozen=True)
class DeformedMap:
    """q = (sin * u, cos) with t = sin^2; t = None keeps t symbolic."""

    base: TensorMap
    t: Exact | None = None

    def norm_squared(self) -> TPolyField:
        """|q|^2 = t * sum u^2 + (1 - t)."""
        base = self.base
        dim = base.dim
        total = scale(
            base.weighted_sum([mul(w, w) for w in base.fields], 2 * base.fields[0].degree),
            base.norm_sq,
        )
        one = constant(dim, 1)
        return TPolyField.from_mapping(dim, 0, {0: one, 1: add(total, scale(one, -1))})


@dataclass
class Assembly:
    """Residual of one equation for q, block by block.

    `block[i]` is the residual of the i-th distinct block component divided by
    sin * sqrt(N); `last` is the cos component divided by cos (None when it
    vanishes identically).
    """

    equation: str
    base: TensorMap
    block: list[TPolyField]
    last: TPolyField | None
    order: int
    details: dict[str, Any] = field(default_factory=dict)

    def factor(self) -> tuple[ConstraintPoly | None, ConstraintPoly | None]:
        """(c_block, c_last) with block_i = c_block(t) w_i / r^(2k), last = c_last(t) / r^(2k)."""
        block_poly: ConstraintPoly | None = None
        for w, poly in zip(self.base.fields, self.block):
            c = poly.factor(multiply_radial(w, -2 * self.order))
            if c is None or (block_poly is not None and c != block_poly):
                block_poly = None
                break
            block_poly = c
        last_poly = ConstraintPoly(())
        if self.last is not None:
            last_poly = self.last.factor(inverse_radius_power(self.base.dim, 2 * self.order))
        return block_poly, last_poly

    def report_at(self, t: Exact, include_last: bool = True) -> ResidualReport:
        components = [
            _component_at(index, poly, t, mult)
            for (index, _, mult), poly in zip(self.base.entries(), self.block)
        ]
        if include_last and self.last is not None:
            components.append(_component_at(LAST_INDEX, self.last, t, 1))
        block_poly, last_poly = self.factor()
        details = dict(self.details)
        details.update({"map": self.base.label, "t": str(t)})
        if last_poly is not None and not last_poly.is_zero():
            details["last_component_poly"] = last_poly.to_dict()
        return ResidualReport(
            equation=self.equation,
            components=components,
            passed=all(c.exact_zero for c in components),
            residual_poly=block_poly,
            details=details,
        )


@dataclass
class _Jet:
    w: RadialScalar
    lap: RadialScalar
    lap2: RadialScalar
    lap3: RadialScalar
    grad: RadialVector
    grad_lap: RadialVector


def _jet(w: RadialScalar) -> _Jet:
    lap = laplacian(w)
    lap2 = laplacian(lap)
    return _Jet(w, lap, lap2, laplacian(lap2), gradient(w), gradient(lap))


def _weighted_vector(
    T: TensorMap, vectors: Sequence[RadialVector], degree: int
) -> RadialVector:
    return RadialVector(
        tuple(
            T.weighted_sum([v[j] for v in vectors], degree) for j in range(1, T.dim + 1)
        )
    )


def assemble_tension(T: TensorMap) -> Assembly:
    """Delta q + |grad q|^2 q."""
    dens = energy_density(T)
    block = [
        TPolyField.from_mapping(T.dim, w.degree - 2, {0: lap, 1: mul(dens, w)})
        for w, lap in zip(T.fields, T.laplacians)
    ]
    last = TPolyField.from_mapping(T.dim, -2, {1: dens})
    return Assembly("tension", T, block, last, order=1)


def assemble_bitension_reduced(T: TensorMap) -> Assembly:
    """(Delta E) v + 2(1-t) grad E . grad v - (1-2t) E^2 v with E = |grad v|^2."""
    dens = energy_density(T)
    lap_dens = laplacian(dens)
    dens_sq = mul(dens, dens)
    block = []
    middle_zero = True
    for w in T.fields:
        cross = gradient_dot(dens, w)
        middle_zero = middle_zero and is_zero(cross)
        c0 = add(add(mul(lap_dens, w), scale(cross, 2)), scale(mul(dens_sq, w), -1))
        c1 = add(scale(cross, -2), scale(mul(dens_sq, w), 2))
        block.append(TPolyField.from_mapping(T.dim, w.degree - 4, {0: c0, 1: c1}))
    return Assembly(
        "biharmonic_reduced",
        T,
        block,
        None,
        order=2,
        details={"middle_term_zero": middle_zero},
    )


def assemble_bitension_sphere(T: TensorMap, threads: int = 1) -> Assembly:
    """Delta^2 q + 2 div(|grad q|^2 grad q) - (<Delta^2 q, q> - 2|grad q|^4) q."""
    dim = T.dim
    dens = energy_density(T)
    dens_sq = mul(dens, dens)
    lap2 = [laplacian(lap) for lap in T.laplacians]
    pairing = scale(
        T.weighted_sum([mul(l2, w) for l2, w in zip(lap2, T.fields)], T.fields[0].degree * 2 - 4),
        T.norm_sq,
    )

    def block_of(pair: tuple[RadialScalar, RadialScalar]) -> TPolyField:
        w, l2 = pair
        flux = scale(gradient(w).times(dens).divergence(), 2)
        return TPolyField.from_mapping(
            dim,
            w.degree - 4,
            {
                0: l2,
                1: add(flux, scale(mul(pairing, w), -1)),
                2: scale(mul(dens_sq, w), 2),
            },
        )

    block = ordered_map(block_of, list(zip(T.fields, lap2)), threads)
    last = TPolyField.from_mapping(dim, -4, {1: scale(pairing, -1), 2: scale(dens_sq, 2)})
    return Assembly("biharmonic", T, block, last, order=2)


# -- tension and properness -----------------------------------------------------------


def tension_residual(target: TensorMap | DeformedMap) -> ResidualReport:
    """Harmonic-sphere residual Delta phi + |grad phi|^2 phi."""
    if isinstance(target, TensorMap):
        report = verify_harmonicity(target)
        report.equation = "tension"
        return report
    assembly = assemble_tension(target.base)
    if target.t is None:
        block_poly, last_poly = assembly.factor()
        zero = all(p.is_zero() for p in assembly.block) and assembly.last.is_zero()
        return ResidualReport(
            equation="tension",
            components=[],
            passed=zero,
            residual_poly=block_poly,
            details={
                "map": target.base.label,
                "t": "symbolic",
                "last_component_poly": last_poly.to_dict() if last_poly else None,
            },
        )
    return assembly.report_at(target.t)


def is_proper_map(target: TensorMap | DeformedMap) -> bool:
    """True when the map is not harmonic."""
    return not tension_residual(target).passed


def properness_check(ell: int, m: int, t: DeformationParameter | Exact) -> bool:
    """Whether the deformed u^(l) at t is non-harmonic; needs 0 < t < 1."""
    value = t.t if isinstance(t, DeformationParameter) else t
    if not 0 < value < 1:
        raise ValueError(f"t = {value} must lie strictly between 0 and 1")
    return is_proper_map(DeformedMap(construct_nakauchi(ell, m), value))


# -- biharmonic ----------------------------------------------------------------------


def bitension_residual_poly(ell: int, m: int) -> ConstraintPoly:
    """Monic linear constraint from the reduced biharmonic equation of q."""
    assembly = assemble_bitension_reduced(construct_nakauchi(ell, m))
    if not assembly.details["middle_term_zero"]:
        raise ResidualStructureError(
            f"grad |grad u|^2 . grad u does not vanish for (ell, m) = ({ell}, {m})"
        )
    poly, _ = assembly.factor()
    if poly is None:
        raise ResidualStructureError(
            f"the biharmonic residual for (ell, m) = ({ell}, {m}) is not c(t) w / r^4"
        )
    if poly.degree < 1:
        raise ValueError(
            f"the biharmonic constraint for (ell, m) = ({ell}, {m}) is degenerate: {poly}"
        )
    return poly.monic()


def bitension_sphere_poly(
    ell: int, m: int, threads: int = 1
) -> tuple[ConstraintPoly, ConstraintPoly]:
    """(block, last) constraint polynomials of the full biharmonic equation."""
    block, last = assemble_bitension_sphere(construct_nakauchi(ell, m), threads).factor()
    if block is None or last is None:
        raise ResidualStructureError(
            f"the biharmonic residual for (ell, m) = ({ell}, {m}) does not factor"
        )
    return block, last


def bitension_report(
    ell: int, m: int, t: Exact | None = None, threads: int = 1
) -> ResidualReport:
    """Full biharmonic residual of q at t (default: the constraint root)."""
    if t is None:
        t = biharmonic_t(ell, m)
    T = construct_nakauchi(ell, m)
    report = assemble_bitension_sphere(T, threads).report_at(t)
    reduced = bitension_residual_poly(ell, m)
    report.details["reduced_poly"] = reduced.to_dict()
    report.details["admissible"] = bool(0 < t < 1)
    return report


# -- triharmonic -----------------------------------------------------------------------


@dataclass(frozen=True)
class TermSpec:
    name: str
    expression: str
    q_degree: int
    weight: int


TRITENSION_TERMS: tuple[TermSpec, ...] = (
    TermSpec("delta3_q", "Delta^3 q", 1, -1),
    TermSpec("delta_of_flux", "Delta(<Delta q, grad q> grad q)", 3, 1),
    TermSpec("grad_of_flux_laplacian", "grad(<Delta q, grad q> Delta q)", 3, -1),
    TermSpec("grad_delta_energy", "grad((Delta |grad q|^2) grad q)", 3, 2),
    TermSpec("grad_energy_squared", "grad(|grad q|^4 grad q)", 5, -3),
    TermSpec("grad_bilaplacian_pairing", "(grad <Delta^2 q, q>) grad q", 3, 4),
    TermSpec("grad_laplacian_gradient_pairing", "grad(<grad Delta q, grad q>) grad q", 3, 4),
    TermSpec("div_pairing_times_laplacian", "(grad <grad Delta q, q>) Delta q", 3, 2),
    TermSpec("delta_of_pairing_gradient", "Delta(<grad Delta q, q> grad q)", 3, 2),
    TermSpec("pairing_times_grad_laplacian", "<grad Delta q, q> grad Delta q", 3, -2),
    TermSpec("delta_laplacian_energy", "Delta(Delta q |grad q|^2)", 3, -2),
    TermSpec("grad_laplacian_squared", "grad(|Delta q|^2 grad q)", 3, 2),
)


def printed_term_coefficients(ell: int, m: int) -> dict[str, ConstraintPoly]:
    """Closed forms of the twelve terms as c(t) in term = c(t) q / r^6."""
    e = energy_constant(ell, m)
    p0 = ell * (ell + 2) * (ell + 4) * (m + ell - 2) * (m + ell - 4) * (m + ell - 6)
    mono = ConstraintPoly.monomial
    zero = ConstraintPoly(())
    return {
        "delta3_q": mono(-p0, 0),
        "delta_of_flux": zero,
        "grad_of_flux_laplacian": zero,
        "grad_delta_energy": mono(2 * e * e * (m - 4), 1),
        "grad_energy_squared": mono(-(e**3), 2),
        "grad_bilaplacian_pairing": zero,
        "grad_laplacian_gradient_pairing": zero,
        "div_pairing_times_laplacian": mono(-2 * e * e * (m - 4), 1),
        "delta_of_pairing_gradient": zero,
        "pairing_times_grad_laplacian": mono(4 * e * e, 1),
        "delta_laplacian_energy": mono(e * e * (m + ell - 6) * (ell + 4), 1),
        "grad_laplacian_squared": mono(-(e**3), 1),
    }


@dataclass
class TermEntry:
    spec: TermSpec
    coefficient: ConstraintPoly | None
    expected: ConstraintPoly
    offending: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def matches(self) -> bool:
        return self.coefficient is not None and self.coefficient == self.expected

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.spec.name,
            "expression": self.spec.expression,
            "weight": self.spec.weight,
            "coefficient": self.coefficient.to_dict() if self.coefficient else None,
            "expected": self.expected.to_dict(),
            "matches": self.matches,
            "offending": [list(i) for i in self.offending],
        }


@dataclass
class TermTable:
    ell: int
    m: int
    entries: dict[str, TermEntry]
    assembly: Assembly

    @property
    def mismatches(self) -> list[str]:
        return [name for name, entry in self.entries.items() if not entry.matches]

    def residual_poly(self) -> ConstraintPoly:
        """Weighted sum of the term coefficients."""
        total = ConstraintPoly(())
        for name, entry in self.entries.items():
            if entry.coefficient is None:
                raise ResidualStructureError(
                    f"term {name} is not a multiple of q / r^6 for "
                    f"(ell, m) = ({self.ell}, {self.m})"
                )
            total = total + entry.coefficient.scale(entry.spec.weight)
        return total

    def to_dict(self) -> dict[str, Any]:
        return {
            "ell": self.ell,
            "m": self.m,
            "terms": [entry.to_dict() for entry in self.entries.values()],
            "mismatches": self.mismatches,
        }


def _term_fields(
    jet: _Jet,
    W: RadialVector,
    Y: RadialVector,
    E: RadialScalar,
    F: RadialScalar,
    grad_S: RadialVector,
    grad_G: RadialVector,
) -> dict[str, RadialScalar]:
    grad = jet.grad
    return {
        "delta3_q": jet.lap3,
        "delta_of_flux": laplacian(W.dot(grad)),
        "grad_of_flux_laplacian": W.times(jet.lap).divergence(),
        "grad_delta_energy": grad.times(laplacian(E)).divergence(),
        "grad_energy_squared": grad.times(mul(E, E)).divergence(),
        "grad_bilaplacian_pairing": grad_S.dot(grad),
        "grad_laplacian_gradient_pairing": grad_G.dot(grad),
        "div_pairing_times_laplacian": mul(Y.divergence(), jet.lap),
        "delta_of_pairing_gradient": laplacian(Y.dot(grad)),
        "pairing_times_grad_laplacian": Y.dot(jet.grad_lap),
        "delta_laplacian_energy": laplacian(mul(jet.lap, E)),
        "grad_laplacian_squared": grad.times(F).divergence(),
    }


def tritension_terms(ell: int, m: int, threads: int = 1) -> TermTable:
    """Compute the twelve terms of the triharmonic operator on q.

    Terms are computed on w; a term of degree d in q picks up
    (t N)^((d-1)/2) relative to the common block factor sin * sqrt(N).
    """
    T = construct_nakauchi(ell, m)
    dim, deg = T.dim, T.fields[0].degree
    jets = ordered_map(_jet, T.fields, threads)

    W = _weighted_vector(T, [j.grad.times(j.lap) for j in jets], 2 * deg - 3)
    Y = _weighted_vector(T, [j.grad_lap.times(j.w) for j in jets], 2 * deg - 3)
    S = T.weighted_sum([mul(j.lap2, j.w) for j in jets], 2 * deg - 4)
    G = T.weighted_sum([j.grad_lap.dot(j.grad) for j in jets], 2 * deg - 4)
    F = T.weighted_sum([mul(j.lap, j.lap) for j in jets], 2 * deg - 4)
    E = T.weighted_sum([j.grad.dot(j.grad) for j in jets], 2 * deg - 2)
    grad_S, grad_G = gradient(S), gradient(G)

    per_component = ordered_map(
        lambda j: _term_fields(j, W, Y, E, F, grad_S, grad_G), jets, threads
    )

    N = T.norm_sq
    entries: dict[str, TermEntry] = {}
    expected = printed_term_coefficients(ell, m)
    assembled = [TPolyField(dim, deg - 6) for _ in T.fields]
    for spec in TRITENSION_TERMS:
        power = (spec.q_degree - 1) // 2
        lift = N**power
        coefficient: Fraction | None = None
        offending = []
        for i, ((index, w, _), terms) in enumerate(zip(T.entries(), per_component)):
            value = terms[spec.name]
            k = proportionality(value, multiply_radial(w, -6))
            if k is None or (coefficient is not None and k != coefficient):
                offending.append(index)
            elif coefficient is None:
                coefficient = k
            contribution = TPolyField.from_mapping(
                dim, deg - 6, {power: scale(value, lift * spec.weight)}
            )
            assembled[i] = assembled[i] + contribution
        poly = None
        if not offending and coefficient is not None:
            poly = ConstraintPoly.monomial(coefficient * lift, power)
        entry = TermEntry(spec, poly, expected[spec.name], offending)
        if not entry.matches:
            logger.warning(
                "term %s for (ell, m) = (%d, %d): got %s, expected %s",
                spec.name,
                ell,
                m,
                poly,
                entry.expected,
            )
        entries[spec.name] = entry

    assembly = Assembly("triharmonic", T, assembled, None, order=3)
    return TermTable(ell, m, entries, assembly)


def tritension_residual_poly(ell: int, m: int, threads: int = 1) -> ConstraintPoly:
    return tritension_terms(ell, m, threads).residual_poly()


def tritension_report(
    ell: int, m: int, t: Exact | None = None, threads: int = 1
) -> ResidualReport:
    """Triharmonic residual of q at t, or at every admissible root when t is None."""
    table = tritension_terms(ell, m, threads)
    poly = table.residual_poly()
    reference = triharmonic_poly(ell, m)
    multiple = poly.ratio_to(reference)
    if t is None:
        candidates = [r.t for r in triharmonic_roots(ell, m) if r.admissible]
    else:
        candidates = [t]
    reports = [table.assembly.report_at(value) for value in candidates]
    components = [c for r in reports for c in r.components]
    passed = (
        bool(candidates)
        and all(r.passed for r in reports)
        and not table.mismatches
        and multiple is not None
        and multiple != 0
    )
    return ResidualReport(
        equation="triharmonic",
        components=components,
        passed=passed,
        residual_poly=poly,
        details={
            "map": table.assembly.base.label,
            "t": [str(v) for v in candidates],
            "proportionality": str(multiple) if multiple is not None else None,
            "reference_poly": reference.to_dict(),
            "terms": table.to_dict()["terms"],
            "term_mismatches": table.mismatches,
        },
    )


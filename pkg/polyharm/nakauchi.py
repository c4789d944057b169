"""Nakauchi maps u^(l): R^m minus the origin -> S^(m^l - 1).

The maps are built by the recursion

    u^(1)_i = y_i = x_i / r
    u^(l)_{I,k} = C_{l,m} * (y_k u^(l-1)_I - r d/dx_k u^(l-1)_I / (l + m - 3))
    C_{l,m}^2 = (l + m - 3) / (2l + m - 4)

with the new index k attached both to y and to the derivative. The square
roots C_{l,m} are not rational, so components are stored unnormalized (w) and
the product of the squared normalizers is kept as the exact rational
`norm_sq`; the map itself is u = sqrt(norm_sq) * w. Every identity checked here
is even in u, so all checks stay in rational arithmetic.

The m^l components repeat heavily. A TensorMap stores each distinct field once
together with its multiplicity and a flat slot table mapping every index tuple
to its field, so sums over the whole family are multiplicity-weighted sums
over the distinct fields.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache

from .field_algebra import (
    RadialScalar,
    add,
    canonicalize,
    constant,
    derive,
    inverse_radius_power,
    laplacian,
    mul,
    multiply_radial,
    scale,
    sub,
    sum_fields,
    unit_coordinate,
)
from .parallel import ordered_map
from .reports import ResidualReport

logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 6


@dataclass(frozen=True, eq=False)
class TensorMap:
    """An indexed family of fields u = sqrt(norm_sq) * w."""

    m: int
    ell: int
    fields: tuple[RadialScalar, ...]
    multiplicity: tuple[int, ...]
    slots: tuple[int, ...]
    norm_sq: Fraction = Fraction(1)
    label: str = ""

    def __post_init__(self):
        if len(self.fields) != len(self.multiplicity):
            raise ValueError("fields and multiplicities differ in length")
        if sum(self.multiplicity) != len(self.slots):
            raise ValueError("multiplicities do not add up to the number of slots")
        if self.norm_sq <= 0:
            raise ValueError(f"norm_sq must be positive, got {self.norm_sq}")

    @classmethod
    def from_fields(
        cls,
        fields: Sequence[RadialScalar],
        ell: int = 0,
        norm_sq: Fraction | int = 1,
        label: str = "",
    ) -> TensorMap:
        """A map with the given components, one slot each."""
        if not fields:
            raise ValueError("a map needs at least one component")
        n = len(fields)
        return cls(
            m=fields[0].dim,
            ell=ell,
            fields=tuple(fields),
            multiplicity=(1,) * n,
            slots=tuple(range(n)),
            norm_sq=Fraction(norm_sq),
            label=label or f"ad hoc map with {n} components",
        )

    @property
    def size(self) -> int:
        return len(self.slots)

    @property
    def dim(self) -> int:
        return self.fields[0].dim

    def scaled(self, c: Fraction | int) -> TensorMap:
        """The map c * u."""
        c = Fraction(c)
        if not c:
            raise ValueError("cannot scale a map by zero")
        return replace(self, norm_sq=self.norm_sq * c * c, label=f"{c} * {self.label}")

    def index_of(self, flat: int) -> tuple[int, ...]:
        """1-based index tuple of a flat slot (first index most significant)."""
        if self.ell < 1:
            return (flat + 1,)
        digits = []
        for _ in range(self.ell):
            flat, d = divmod(flat, self.m)
            digits.append(d + 1)
        return tuple(reversed(digits))

    def flat_of(self, index: Sequence[int]) -> int:
        if self.ell < 1:
            (i,) = index
            return i - 1
        if len(index) != self.ell or not all(1 <= i <= self.m for i in index):
            raise ValueError(f"index {tuple(index)} outside {{1..{self.m}}}^{self.ell}")
        flat = 0
        for i in index:
            flat = flat * self.m + (i - 1)
        return flat

    def component(self, index: Sequence[int]) -> RadialScalar:
        """The unnormalized component w at an index tuple."""
        return self.fields[self.slots[self.flat_of(index)]]

    @cached_property
    def representatives(self) -> tuple[tuple[int, ...], ...]:
        first: dict[int, int] = {}
        for flat, pos in enumerate(self.slots):
            first.setdefault(pos, flat)
        return tuple(self.index_of(first[p]) for p in range(len(self.fields)))

    def entries(self) -> Iterator[tuple[tuple[int, ...], RadialScalar, int]]:
        """(representative index, w, multiplicity) for every distinct field."""
        return zip(self.representatives, self.fields, self.multiplicity)

    def map_fields(self, fn, threads: int = 1) -> TensorMap:
        """Apply fn to every distinct field; slots and norm_sq are kept."""
        return replace(self, fields=tuple(ordered_map(fn, self.fields, threads)))

    @cached_property
    def laplacians(self) -> tuple[RadialScalar, ...]:
        return tuple(laplacian(w) for w in self.fields)

    def weighted_sum(self, values: Sequence[RadialScalar], degree: int) -> RadialScalar:
        """Sum of mult * value over the distinct fields."""
        return sum_fields(
            (scale(v, k) for v, k in zip(values, self.multiplicity)), self.dim, degree
        )


# -- construction -------------------------------------------------------------


def radial_projection(m: int) -> TensorMap:
    """u(x) = x / r."""
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    fields = tuple(unit_coordinate(m, i) for i in range(1, m + 1))
    return TensorMap(
        m=m,
        ell=1,
        fields=fields,
        multiplicity=(1,) * m,
        slots=tuple(range(m)),
        label=f"u^(1) on R^{m}",
    )


def normalizer_squared(ell: int, m: int) -> Fraction:
    """Product of C_{j,m}^2 over the recursion levels j = 2..l."""
    total = Fraction(1)
    for j in range(2, ell + 1):
        num, den = j + m - 3, 2 * j + m - 4
        if num == 0 or den == 0:
            raise ValueError(
                f"the recursion for (ell, m) = ({ell}, {m}) hits a zero denominator "
                f"at level {j}: l+m-3 = {num}, 2l+m-4 = {den}"
            )
        total *= Fraction(num, den)
    return total


@lru_cache(maxsize=64)
def _build(ell: int, m: int) -> TensorMap:
    current = radial_projection(m)
    for level in range(2, ell + 1):
        current = _next_level(current, level)
        logger.debug(
            "u^(%d) on R^%d: %d distinct of %d components",
            level,
            m,
            len(current.fields),
            current.size,
        )
    return replace(
        current, norm_sq=normalizer_squared(ell, m), label=f"u^({ell}) on R^{m}"
    )


def _next_level(parent: TensorMap, level: int) -> TensorMap:
    m = parent.m
    denom = level + m - 3
    children: dict[tuple[int, int], RadialScalar] = {}
    position: dict[RadialScalar, int] = {}
    fields: list[RadialScalar] = []
    counts: list[int] = []
    slots: list[int] = []
    for parent_pos in parent.slots:
        for k in range(1, m + 1):
            key = (parent_pos, k)
            child = children.get(key)
            if child is None:
                w = parent.fields[parent_pos]
                child = sub(
                    mul(unit_coordinate(m, k), w),
                    scale(multiply_radial(derive(w, k), 1), Fraction(1, denom)),
                )
                children[key] = child
            pos = position.get(child)
            if pos is None:
                pos = position[child] = len(fields)
                fields.append(child)
                counts.append(0)
            counts[pos] += 1
            slots.append(pos)
    return TensorMap(
        m=m,
        ell=level,
        fields=tuple(fields),
        multiplicity=tuple(counts),
        slots=tuple(slots),
    )


def construct_nakauchi(
    ell: int,
    m: int,
    *,
    allow_formal: bool = False,
    max_order: int = DEFAULT_MAX_ORDER,
) -> TensorMap:
    """Build u^(l) on R^m.

    Raises ValueError when l > m (unless allow_formal), when a recursion
    denominator vanishes, or when l or m exceed max_order.
    """
    if ell < 1 or m < 1:
        raise ValueError(f"need ell >= 1 and m >= 1, got ell={ell}, m={m}")
    if ell > m and not allow_formal:
        raise ValueError(
            f"no Nakauchi map exists for ell={ell} > m={m}; pass allow_formal to "
            "build the formal recursion anyway"
        )
    if ell > max_order or m > max_order:
        raise ValueError(
            f"(ell, m) = ({ell}, {m}) exceeds max_order={max_order}; the map has "
            f"{m ** ell} components"
        )
    normalizer_squared(ell, m)
    return _build(ell, m)


def nakauchi_eigenmap(k: int, m: int, *, max_order: int = DEFAULT_MAX_ORDER) -> TensorMap:
    """u^(k) in m+1 variables; restricted to S^m it has energy density k(k+m-1)."""
    return construct_nakauchi(k, m + 1, max_order=max_order)


# -- checks ------------------------------------------------------------------


def energy_density(T: TensorMap) -> RadialScalar:
    """|grad u|^2 summed over all components.

    Uses |grad w|^2 = Delta(w^2)/2 - w Delta w per component.
    """
    degree = 2 * T.fields[0].degree - 2
    parts = [
        sub(scale(laplacian(mul(w, w)), Fraction(1, 2)), mul(w, lap))
        for w, lap in zip(T.fields, T.laplacians)
    ]
    return scale(T.weighted_sum(parts, degree), T.norm_sq)


def energy_constant(T: TensorMap) -> Fraction | None:
    """The c with energy density c / r^2, or None if it is not of that form."""
    dens = canonicalize(energy_density(T))
    if dens.is_zero():
        return Fraction(0)
    if dens.radial_exponent != 2 or dens.poly.degree != 0:
        return None
    return dens.poly.coefficient((0,) * T.dim)


def verify_unit_norm(T: TensorMap) -> ResidualReport:
    degree = 2 * T.fields[0].degree
    total = scale(T.weighted_sum([mul(w, w) for w in T.fields], degree), T.norm_sq)
    residual = sub(total, constant(T.dim, 1)) if degree == 0 else total
    return ResidualReport.exact(
        "unit_norm",
        [((), residual, T.size)],
        details={"map": T.label, "norm_sq": str(T.norm_sq)},
    )


def expected_energy_density(T: TensorMap) -> RadialScalar:
    """l(l+m-2) / r^2."""
    return scale(inverse_radius_power(T.dim, 2), T.ell * (T.ell + T.m - 2))


def verify_harmonicity(T: TensorMap, threads: int = 1) -> ResidualReport:
    """Delta u + l(l+m-2) r^-2 u = 0, componentwise."""
    dens = expected_energy_density(T)
    residuals = ordered_map(
        lambda pair: add(pair[1], mul(dens, pair[0])),
        list(zip(T.fields, T.laplacians)),
        threads,
    )
    details = {"map": T.label, "expected_constant": T.ell * (T.ell + T.m - 2)}
    c = energy_constant(T)
    if c is not None:
        details["energy_constant"] = str(c)
    entries = [
        (index, res, mult)
        for (index, _, mult), res in zip(T.entries(), residuals)
    ]
    return ResidualReport.exact("harmonic", entries, details=details)


def verify_energy_density(T: TensorMap) -> ResidualReport:
    """|grad u|^2 = l(l+m-2)/r^2."""
    residual = sub(energy_density(T), expected_energy_density(T))
    return ResidualReport.exact(
        "energy_density",
        [((), residual, T.size)],
        details={"map": T.label, "expected_constant": T.ell * (T.ell + T.m - 2)},
    )


def verify_radial_orthogonality(T: TensorMap, threads: int = 1) -> ResidualReport:
    """sum_j y_j d/dx_j c = 0 for every component."""
    dim = T.dim

    def radial_derivative(w: RadialScalar) -> RadialScalar:
        return sum_fields(
            (mul(unit_coordinate(dim, j), derive(w, j)) for j in range(1, dim + 1)),
            dim,
            w.degree - 1,
        )

    residuals = ordered_map(radial_derivative, T.fields, threads)
    entries = [(index, res, mult) for (index, _, mult), res in zip(T.entries(), residuals)]
    return ResidualReport.exact("radial_orthogonality", entries, details={"map": T.label})


def verify_nakauchi(T: TensorMap, threads: int = 1) -> list[ResidualReport]:
    """All defining properties of a Nakauchi map."""
    return [
        verify_unit_norm(T),
        verify_energy_density(T),
        verify_harmonicity(T, threads),
        verify_radial_orthogonality(T, threads),
    ]


def iterated_laplacian_symbolic(T: TensorMap, k: int, threads: int = 1) -> TensorMap:
    """Delta^k applied to every component (still unnormalized, same norm_sq)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    def power(w: RadialScalar) -> RadialScalar:
        for _ in range(k):
            w = laplacian(w)
        return w

    out = T.map_fields(power, threads)
    return replace(out, label=f"Delta^{k} {T.label}")


@dataclass(frozen=True)
class LaplacianFormula:
    ell: int
    m: int
    k: int
    coefficient: Fraction
    radial_exponent: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "radial_exponent", 2 * self.k)

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "m": self.m,
            "k": self.k,
            "coefficient": str(self.coefficient),
            "radial_exponent": self.radial_exponent,
        }


def iterated_laplacian_coefficient(ell: int, m: int, k: int) -> LaplacianFormula:
    """Delta^k u^(l) = coefficient * u^(l) / r^(2k)."""
    if ell < 1 or m < 1 or k < 1:
        raise ValueError(f"need ell, m, k >= 1, got ell={ell}, m={m}, k={k}")
    c = 1
    for s in range(1, k + 1):
        c *= 2 * s + ell - 2
    for j in range(1, k + 1):
        c *= 2 * j - ell - m
    return LaplacianFormula(ell, m, k, Fraction(c))


def radial_projection_laplacian_coefficient(m: int, k: int) -> Fraction:
    """Delta^k (x/r) = prod_j (2j-1-m)(2j-1) * x/r / r^(2k)."""
    if m < 1 or k < 1:
        raise ValueError(f"need m, k >= 1, got m={m}, k={k}")
    c = 1
    for j in range(1, k + 1):
        c *= (2 * j - 1 - m) * (2 * j - 1)
    return Fraction(c)


def check_iterated_laplacian(T: TensorMap, k: int, threads: int = 1) -> ResidualReport:
    """Compare the symbolic Delta^k with the product formula, component by component."""
    formula = iterated_laplacian_coefficient(T.ell, T.m, k)
    lifted = iterated_laplacian_symbolic(T, k, threads)
    entries = []
    for (index, w, mult), lap in zip(T.entries(), lifted.fields):
        expected = scale(multiply_radial(w, -2 * k), formula.coefficient)
        entries.append((index, sub(lap, expected), mult))
    return ResidualReport.exact(
        "iterated_laplacian",
        entries,
        details={"map": T.label, "formula": formula.to_dict()},
    )

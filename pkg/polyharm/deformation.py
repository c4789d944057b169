"""Angle constraints for deformed Nakauchi maps q = (sin * u, cos).

For the biharmonic deformation the constraint is linear in t = sin^2 and has
the single root

    t = (l(l+m-2) + 2m - 8) / (2 l(l+m-2)),

for the triharmonic deformation it is the quadratic

    3 e^3 t^2 - 2 e^2 K t + l(l+2)(l+4)(m+l-2)(m+l-4)(m+l-6) = 0,
    e = l(l+m-2),  K = 4 + (m+l-6)(l+4) + e,

whose roots lie in a real quadratic field. A root gives a map only when it is
admissible, i.e. 0 < t < 1 strictly, and when l <= m (otherwise no Nakauchi
map exists to deform).

All classification is exact: roots are `QuadExt` numbers a + b*sqrt(D) and
comparisons reduce to rational comparisons of a^2 and b^2 D.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any

from sympy import factorint

from .parallel import ordered_map

logger = logging.getLogger(__name__)

BIHARMONIC = "biharmonic"
TRIHARMONIC = "triharmonic"
_KIND_ALIASES = {
    "bih": BIHARMONIC,
    "biharmonic": BIHARMONIC,
    "tri": TRIHARMONIC,
    "triharmonic": TRIHARMONIC,
}
ANGLE_FOR_KIND = {BIHARMONIC: "alpha", TRIHARMONIC: "gamma"}


def normalize_kind(kind: str) -> str:
    try:
        return _KIND_ALIASES[kind.lower()]
    except KeyError:
        raise ValueError(
            f"unknown equation kind {kind!r}; use one of {sorted(_KIND_ALIASES)}"
        ) from None


@lru_cache(maxsize=4096)
def square_free_part(n: int) -> tuple[int, int]:
    """Split n > 0 as s^2 * d with d square-free; returns (s, d)."""
    if n <= 0:
        raise ValueError(f"square_free_part needs a positive integer, got {n}")
    s, d = 1, 1
    for p, e in factorint(n).items():
        s *= p ** (e // 2)
        if e % 2:
            d *= p
    return s, d


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True, eq=False)
class QuadExt:
    """The real number a + b*sqrt(d), d square-free, d = 1 only when b = 0."""

    a: Fraction
    b: Fraction = Fraction(0)
    d: int = 1

    def __post_init__(self):
        a, b, d = Fraction(self.a), Fraction(self.b), int(self.d)
        if d < 1:
            raise ValueError(f"QuadExt needs d >= 1, got {d}")
        if b and d > 1:
            s, d = square_free_part(d)
            b *= s
        if d == 1:
            a, b = a + b, Fraction(0)
        if not b:
            d = 1
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    @classmethod
    def sqrt_of(cls, q: Fraction | int) -> QuadExt:
        """Exact square root of a non-negative rational."""
        q = Fraction(q)
        if q < 0:
            raise ValueError(f"no real square root of {q}")
        if not q:
            return cls(Fraction(0))
        # sqrt(p/r) = sqrt(p*r) / r
        return cls(Fraction(0), Fraction(1, q.denominator), q.numerator * q.denominator)

    @staticmethod
    def coerce(value: Any) -> QuadExt:
        if isinstance(value, QuadExt):
            return value
        if isinstance(value, (int, Fraction)):
            return QuadExt(Fraction(value))
        raise TypeError(f"cannot use {type(value).__name__} as an exact number")

    @property
    def is_rational(self) -> bool:
        return not self.b

    def conjugate(self) -> QuadExt:
        return QuadExt(self.a, -self.b, self.d)

    def _field(self, other: QuadExt) -> int:
        if self.is_rational:
            return other.d
        if other.is_rational or other.d == self.d:
            return self.d
        raise ValueError(
            f"cannot combine numbers from Q(sqrt({self.d})) and Q(sqrt({other.d}))"
        )

    def __add__(self, other: Any) -> QuadExt:
        try:
            other = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadExt(self.a + other.a, self.b + other.b, self._field(other))

    __radd__ = __add__

    def __neg__(self) -> QuadExt:
        return QuadExt(-self.a, -self.b, self.d)

    def __sub__(self, other: Any) -> QuadExt:
        try:
            other = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> QuadExt:
        return (-self) + other

    def __mul__(self, other: Any) -> QuadExt:
        try:
            other = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(other)
        return QuadExt(
            self.a * other.a + self.b * other.b * d,
            self.a * other.b + self.b * other.a,
            d,
        )

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """a^2 - b^2 d, the product with the conjugate."""
        return self.a * self.a - self.b * self.b * self.d

    def __truediv__(self, other: Any) -> QuadExt:
        try:
            other = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        n = other.norm()
        if not n:
            raise ZeroDivisionError("division by zero in QuadExt")
        num = self * other.conjugate()
        return QuadExt(num.a / n, num.b / n, num.d)

    def __rtruediv__(self, other: Any) -> QuadExt:
        return QuadExt.coerce(other) / self

    def __pow__(self, k: int) -> QuadExt:
        if k < 0:
            return QuadExt(1) / self**-k
        result = QuadExt(1)
        for _ in range(k):
            result = result * self
        return result

    def sign(self) -> int:
        sa, sb = _sign(self.a), _sign(self.b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # a and b*sqrt(d) have opposite signs: compare a^2 with b^2 d
        return sa * _sign(self.norm())

    def _cmp(self, other: Any) -> int:
        return (self - QuadExt.coerce(other)).sign()

    def __eq__(self, other: object) -> bool:
        try:
            return self._cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self) -> int:
        if self.is_rational:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other: Any) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: Any) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: Any) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: Any) -> bool:
        return self._cmp(other) >= 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __str__(self) -> str:
        if self.is_rational:
            return str(self.a)
        surd = f"sqrt({self.d})"
        b = self.b
        coeff = surd if abs(b) == 1 else f"{abs(b)}*{surd}"
        if not self.a:
            return coeff if b > 0 else f"-{coeff}"
        return f"{self.a} {'+' if b > 0 else '-'} {coeff}"

    def to_dict(self) -> dict[str, Any]:
        return {"a": str(self.a), "b": str(self.b), "d": self.d, "value": float(self)}


Exact = Fraction | QuadExt


@dataclass(frozen=True)
class ConstraintPoly:
    """Univariate polynomial in t, coefficients from low to high degree."""

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = [Fraction(c) for c in self.coefficients]
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def monomial(cls, c: Fraction | int, power: int) -> ConstraintPoly:
        return cls((Fraction(0),) * power + (Fraction(c),))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, k: int) -> Fraction:
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        return Fraction(0)

    def __call__(self, t):
        result: Any = Fraction(0)
        for c in reversed(self.coefficients):
            result = result * t + c
        return result

    def __add__(self, other: ConstraintPoly) -> ConstraintPoly:
        n = max(len(self.coefficients), len(other.coefficients))
        return ConstraintPoly(
            tuple(self.coefficient(k) + other.coefficient(k) for k in range(n))
        )

    def scale(self, c: Fraction | int) -> ConstraintPoly:
        return ConstraintPoly(tuple(Fraction(c) * x for x in self.coefficients))

    def monic(self) -> ConstraintPoly:
        if self.is_zero():
            raise ValueError("the zero polynomial has no monic form")
        return self.scale(1 / self.coefficients[-1])

    def ratio_to(self, other: ConstraintPoly) -> Fraction | None:
        """k with self = k * other, or None."""
        if other.is_zero():
            return Fraction(0) if self.is_zero() else None
        if self.degree != other.degree and not self.is_zero():
            return None
        k = self.coefficient(other.degree) / other.coefficients[-1]
        return k if self == other.scale(k) else None

    def roots(self) -> list[QuadExt]:
        """Real roots in ascending order (degree <= 2)."""
        if self.degree < 1:
            return []
        if self.degree == 1:
            c0, c1 = self.coefficients
            return [QuadExt(-c0 / c1)]
        if self.degree > 2:
            raise ValueError(f"roots() handles degree <= 2, got {self.degree}")
        c0, c1, c2 = self.coefficients
        disc = c1 * c1 - 4 * c2 * c0
        if disc < 0:
            return []
        sq = QuadExt.sqrt_of(disc)
        found = {(-c1 - sq) / (2 * c2), (-c1 + sq) / (2 * c2)}
        return sorted(found)

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coefficients[k]
            if not c:
                continue
            mag = abs(c)
            var = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            body = str(mag) if not var else (var if mag == 1 else f"{mag}*{var}")
            sign = "-" if c < 0 else "+"
            parts.append(body if not parts and sign == "+" else f"{sign} {body}")
            if len(parts) == 1 and sign == "-":
                parts[0] = f"-{body}"
        return " ".join(parts)

    def to_dict(self) -> dict[str, Any]:
        return {
            "coefficients": [str(c) for c in self.coefficients],
            "text": str(self),
        }


@dataclass(frozen=True)
class DeformationParameter:
    """An exact value of t = sin^2 of a deformation angle."""

    t: Exact
    angle_kind: str
    branch: str | None = None

    @property
    def admissible(self) -> bool:
        return 0 < self.t < 1

    @property
    def value(self) -> float:
        return float(self.t)

    @property
    def angle(self) -> float:
        if not self.admissible:
            raise ValueError(f"t = {self.t} is not in (0, 1); no deformation angle")
        return math.asin(math.sqrt(self.value))

    def to_dict(self) -> dict[str, Any]:
        out = {
            "angle_kind": self.angle_kind,
            "exact": str(self.t),
            "value": self.value,
            "admissible": self.admissible,
        }
        if self.branch:
            out["branch"] = self.branch
        return out


@dataclass
class AdmissibilityRecord:
    ell: int
    m: int
    kind: str
    equation_solvable: bool
    roots: list[DeformationParameter]
    map_exists: bool
    which_branch: str
    degenerate: bool = False
    diagnostic: str | None = None

    def root(self, branch: str) -> DeformationParameter | None:
        for r in self.roots:
            if r.branch == branch:
                return r
        return None

    @property
    def t_minus(self) -> DeformationParameter | None:
        return self.root("minus") or self.root("single")

    @property
    def t_plus(self) -> DeformationParameter | None:
        return self.root("plus")

    @property
    def proper_map_exists(self) -> bool:
        return self.map_exists and self.equation_solvable

    def to_dict(self) -> dict[str, Any]:
        out = {
            "ell": self.ell,
            "m": self.m,
            "kind": self.kind,
            "solvable": self.equation_solvable,
            "branch": self.which_branch,
            "map_exists": self.map_exists,
            "roots": [r.to_dict() for r in self.roots],
        }
        if self.degenerate:
            out["degenerate"] = True
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        return out


def _check_pair(ell: int, m: int) -> None:
    if ell < 1 or m < 1:
        raise ValueError(f"need ell >= 1 and m >= 1, got ell={ell}, m={m}")


def energy_constant(ell: int, m: int) -> int:
    """e = l(l+m-2), the energy density of u^(l) times r^2."""
    return ell * (ell + m - 2)


# -- biharmonic ---------------------------------------------------------------


def biharmonic_t(ell: int, m: int) -> Fraction:
    _check_pair(ell, m)
    e = energy_constant(ell, m)
    if e == 0:
        raise ValueError(
            f"l(l+m-2) = 0 for (ell, m) = ({ell}, {m}); the biharmonic constraint "
            "has a zero denominator"
        )
    return Fraction(e + 2 * m - 8, 2 * e)


def biharmonic_admissible(ell: int, m: int) -> AdmissibilityRecord:
    t = biharmonic_t(ell, m)
    root = DeformationParameter(t, ANGLE_FOR_KIND[BIHARMONIC], branch="single")
    solvable = root.admissible
    return AdmissibilityRecord(
        ell=ell,
        m=m,
        kind=BIHARMONIC,
        equation_solvable=solvable,
        roots=[root],
        map_exists=ell <= m,
        which_branch="single" if solvable else "none",
    )


# -- triharmonic --------------------------------------------------------------


def triharmonic_poly(ell: int, m: int) -> ConstraintPoly:
    _check_pair(ell, m)
    e = energy_constant(ell, m)
    k = 4 + (m + ell - 6) * (ell + 4) + e
    c0 = ell * (ell + 2) * (ell + 4) * (m + ell - 2) * (m + ell - 4) * (m + ell - 6)
    return ConstraintPoly((Fraction(c0), Fraction(-2 * e * e * k), Fraction(3 * e**3)))


def triharmonic_roots(ell: int, m: int) -> list[DeformationParameter]:
    poly = triharmonic_poly(ell, m)
    if poly.degree != 2:
        raise ValueError(
            f"the triharmonic constraint for (ell, m) = ({ell}, {m}) has a "
            "vanishing leading coefficient"
        )
    c0, c1, c2 = poly.coefficients
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        logger.info("no real solution for (ell, m) = (%d, %d): disc = %s", ell, m, disc)
        return []
    sq = QuadExt.sqrt_of(disc)
    kind = ANGLE_FOR_KIND[TRIHARMONIC]
    return [
        DeformationParameter((-c1 - sq) / (2 * c2), kind, branch="minus"),
        DeformationParameter((-c1 + sq) / (2 * c2), kind, branch="plus"),
    ]


def triharmonic_branch_closed_form(ell: int, m: int, branch: str) -> QuadExt | None:
    """The printed branch formula for sin^2, evaluated exactly.

    2/3 + 4(m-5)/(3e) +- (1/3) sqrt(1 + 2(8-m)/e - 8(m^2-10m+22)/e^2) with
    e = l(l+m-2); None when the radicand is negative.
    """
    if branch not in ("minus", "plus"):
        raise ValueError(f"branch must be 'minus' or 'plus', got {branch!r}")
    _check_pair(ell, m)
    e = energy_constant(ell, m)
    if e == 0:
        raise ValueError(f"l(l+m-2) = 0 for (ell, m) = ({ell}, {m})")
    radicand = 1 + Fraction(2 * (8 - m), e) - Fraction(8 * (m * m - 10 * m + 22), e * e)
    if radicand < 0:
        return None
    centre = Fraction(2, 3) + Fraction(4 * (m - 5), 3 * e)
    offset = QuadExt.sqrt_of(radicand) * Fraction(1, 3)
    return centre - offset if branch == "minus" else centre + offset


def triharmonic_admissible(ell: int, m: int) -> AdmissibilityRecord:
    roots = triharmonic_roots(ell, m)
    good = {r.branch for r in roots if r.admissible}
    if good == {"minus", "plus"}:
        branch = "both"
    elif good:
        branch = good.pop()
    else:
        branch = "none"
    return AdmissibilityRecord(
        ell=ell,
        m=m,
        kind=TRIHARMONIC,
        equation_solvable=branch != "none",
        roots=roots,
        map_exists=ell <= m,
        which_branch=branch,
        diagnostic=None if roots else "no real solution",
    )


# -- scans ----------------------------------------------------------------------


def _degenerate_record(ell: int, m: int, kind: str, exc: Exception) -> AdmissibilityRecord:
    return AdmissibilityRecord(
        ell=ell,
        m=m,
        kind=kind,
        equation_solvable=False,
        roots=[],
        map_exists=ell <= m,
        which_branch="none",
        degenerate=True,
        diagnostic=str(exc),
    )


def classify(kind: str, ell: int, m: int) -> AdmissibilityRecord:
    """Admissibility for one pair; degenerate pairs become flagged records."""
    kind = normalize_kind(kind)
    solver: Callable[[int, int], AdmissibilityRecord] = (
        biharmonic_admissible if kind == BIHARMONIC else triharmonic_admissible
    )
    try:
        return solver(ell, m)
    except ValueError as exc:
        logger.debug("degenerate pair (%d, %d) for %s: %s", ell, m, kind, exc)
        return _degenerate_record(ell, m, kind, exc)


def enumerate_admissible(
    kind: str,
    ell_max: int,
    m_max: int,
    require_map: bool = True,
    threads: int = 1,
) -> list[AdmissibilityRecord]:
    """Classify every pair 1 <= l <= ell_max, 1 <= m <= m_max, sorted by (l, m)."""
    kind = normalize_kind(kind)
    if ell_max < 1 or m_max < 1:
        raise ValueError(f"scan bounds must be >= 1, got ell_max={ell_max}, m_max={m_max}")
    pairs = [
        (ell, m)
        for ell in range(1, ell_max + 1)
        for m in range(1, m_max + 1)
        if not require_map or ell <= m
    ]
    records = ordered_map(lambda p: classify(kind, *p), pairs, threads)
    logger.info(
        "classified %d %s pairs (ell <= %d, m <= %d)", len(records), kind, ell_max, m_max
    )
    return records


def stated_solvable_bih(ell: int, m: int) -> bool:
    """Solvability as listed in the published case list for the biharmonic case."""
    return (
        (ell == 1 and m in (4, 5, 6))
        or (ell == 2 and m >= 3)
        or (ell >= 3 and m >= 2)
        or (ell >= 4 and m == 1)
    )


def stated_solvable_tri(ell: int, m: int) -> bool:
    """Solvability as listed in the published case list for the triharmonic case.

    The list leaves out (4,1), (4,2) and (5,1), which the accompanying proof
    shows to be solvable via the plus branch.
    """
    return (
        (ell == 1 and m in (6, 7))
        or (ell == 2 and m in (3, 5, 6, 7, 8, 9, 10, 11))
        or (ell == 3 and 2 <= m <= 26)
        or (ell == 4 and m >= 3)
        or (ell == 5 and m >= 2)
        or (ell >= 6 and m >= 1)
    )


def statement_discrepancies(records: Iterable[AdmissibilityRecord]) -> list[tuple[int, int]]:
    """Pairs whose computed solvability differs from the published case list."""
    out = []
    for rec in records:
        stated = (
            stated_solvable_bih(rec.ell, rec.m)
            if rec.kind == BIHARMONIC
            else stated_solvable_tri(rec.ell, rec.m)
        )
        if stated != rec.equation_solvable:
            out.append((rec.ell, rec.m))
    return out


def corollary_check(
    kind: str, m_min: int = 3, m_max: int = 30, threads: int = 1
) -> list[int]:
    """Values of m in range without any admissible l <= m (expected: none)."""
    records = enumerate_admissible(kind, m_max, m_max, require_map=True, threads=threads)
    covered = {r.m for r in records if r.equation_solvable}
    return [m for m in range(m_min, m_max + 1) if m not in covered]


@dataclass
class ScanSummary:
    kind: str
    records: list[AdmissibilityRecord]
    discrepancies: list[tuple[int, int]] = field(default_factory=list)
    uncovered: list[int] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "records": [r.to_dict() for r in self.records],
            "statement_discrepancies": [list(p) for p in self.discrepancies],
            "corollary_uncovered_m": self.uncovered,
        }

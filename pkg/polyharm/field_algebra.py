"""Exact arithmetic for radial rational fields P(x)/r^s on R^m minus the origin.

A radial rational field is a homogeneous polynomial P in x1..xm with rational
coefficients divided by an integer power of r = |x|. The set of such fields is
closed under partial derivatives, the Laplacian and products, which is all the
machinery needed to verify identities for harmonic maps exactly.

Usage:
    f = unit_coordinate(3, 1)            # x1/r on R^3
    laplacian(f)                         # -2*x1/r^3
    is_zero(add(laplacian(f), scale(multiply_radial(f, -2), 2)))   # True

Fields are kept in canonical form: the numerator is not divisible by
x1^2 + ... + xm^2 whenever the radial exponent allows the division. Two fields
are equal exactly when their canonical forms are equal, so `is_zero` and `==`
are decidable.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

Rational = Fraction
Monomial = tuple[int, ...]

_TERM_RE = re.compile(r"^\(([^()]*)\)((?:\*x\d+\^\d+)*)/r\^(\d+)$")


class MultiPoly:
    """Homogeneous polynomial with rational coefficients.

    Coefficients are held as integer numerators over a single positive
    denominator, content-normalized so that gcd(numerators, denominator) = 1.
    The public view (`terms`, `coefficient`) is Rational.
    """

    __slots__ = ("dim", "degree", "_num", "_den", "_key")

    def __init__(
        self,
        dim: int,
        degree: int,
        terms: Mapping[Monomial, Fraction | int] | None = None,
    ):
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        if degree < 0:
            raise ValueError(f"degree must be >= 0, got {degree}")
        terms = terms or {}
        den = 1
        for c in terms.values():
            den = math.lcm(den, Fraction(c).denominator)
        num: dict[Monomial, int] = {}
        for mono, c in terms.items():
            mono = tuple(mono)
            if len(mono) != dim or any(e < 0 for e in mono):
                raise ValueError(f"bad multi-index {mono} for dimension {dim}")
            if sum(mono) != degree:
                raise ValueError(
                    f"inhomogeneous term {mono}: total degree {sum(mono)} != {degree}"
                )
            c = Fraction(c)
            if c:
                num[mono] = c.numerator * (den // c.denominator)
        self._set(dim, degree, num, den)

    def _set(self, dim: int, degree: int, num: dict[Monomial, int], den: int) -> None:
        num = {k: v for k, v in num.items() if v}
        if not num:
            den = 1
        else:
            g = math.gcd(den, *num.values())
            if g > 1:
                num = {k: v // g for k, v in num.items()}
                den //= g
        self.dim = dim
        self.degree = degree
        self._num = num
        self._den = den
        self._key = None

    @classmethod
    def _raw(cls, dim: int, degree: int, num: dict[Monomial, int], den: int = 1):
        poly = cls.__new__(cls)
        poly._set(dim, degree, num, den)
        return poly

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, dim: int, degree: int = 0) -> MultiPoly:
        return cls._raw(dim, max(degree, 0), {})

    @classmethod
    def constant(cls, dim: int, value: Fraction | int) -> MultiPoly:
        return cls(dim, 0, {(0,) * dim: value})

    @classmethod
    def coordinate(cls, dim: int, i: int) -> MultiPoly:
        """The polynomial x_i (1-based)."""
        _check_index(dim, i)
        mono = tuple(1 if j == i - 1 else 0 for j in range(dim))
        return cls._raw(dim, 1, {mono: 1})

    # -- views ------------------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return {k: Fraction(v, self._den) for k, v in self._num.items()}

    def coefficient(self, mono: Monomial) -> Fraction:
        return Fraction(self._num.get(tuple(mono), 0), self._den)

    def is_zero(self) -> bool:
        return not self._num

    def __len__(self) -> int:
        return len(self._num)

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self._num)

    def _identity(self):
        if self._key is None:
            self._key = (self.dim, self.degree, frozenset(self._num.items()), self._den)
        return self._key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self._identity() == other._identity()

    def __hash__(self) -> int:
        return hash(self._identity())

    def __repr__(self) -> str:
        return f"MultiPoly(dim={self.dim}, degree={self.degree}, terms={self.terms})"

    # -- arithmetic -------------------------------------------------------
    def _check_compatible(self, other: MultiPoly) -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: MultiPoly) -> MultiPoly:
        self._check_compatible(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.degree != other.degree:
            raise ValueError(
                f"cannot add polynomials of degree {self.degree} and {other.degree}"
            )
        den = math.lcm(self._den, other._den)
        fa, fb = den // self._den, den // other._den
        num = {k: v * fa for k, v in self._num.items()}
        for k, v in other._num.items():
            num[k] = num.get(k, 0) + v * fb
        return MultiPoly._raw(self.dim, self.degree, num, den)

    def __neg__(self) -> MultiPoly:
        return MultiPoly._raw(
            self.dim, self.degree, {k: -v for k, v in self._num.items()}, self._den
        )

    def __sub__(self, other: MultiPoly) -> MultiPoly:
        return self + (-other)

    def scale(self, c: Fraction | int) -> MultiPoly:
        c = Fraction(c)
        if not c:
            return MultiPoly.zero(self.dim, self.degree)
        num = {k: v * c.numerator for k, v in self._num.items()}
        return MultiPoly._raw(self.dim, self.degree, num, self._den * c.denominator)

    def __mul__(self, other: MultiPoly) -> MultiPoly:
        self._check_compatible(other)
        degree = self.degree + other.degree
        if self.is_zero() or other.is_zero():
            return MultiPoly.zero(self.dim, degree)
        num: dict[Monomial, int] = {}
        get = num.get
        for ka, va in self._num.items():
            for kb, vb in other._num.items():
                k = tuple(a + b for a, b in zip(ka, kb))
                num[k] = get(k, 0) + va * vb
        return MultiPoly._raw(self.dim, degree, num, self._den * other._den)

    def derivative(self, i: int) -> MultiPoly:
        """Partial derivative in x_i (1-based)."""
        _check_index(self.dim, i)
        j = i - 1
        degree = max(self.degree - 1, 0)
        num: dict[Monomial, int] = {}
        for k, v in self._num.items():
            e = k[j]
            if e:
                nk = k[:j] + (e - 1,) + k[j + 1 :]
                num[nk] = num.get(nk, 0) + v * e
        return MultiPoly._raw(self.dim, degree, num, self._den)

    def laplacian(self) -> MultiPoly:
        degree = max(self.degree - 2, 0)
        num: dict[Monomial, int] = {}
        for k, v in self._num.items():
            for j, e in enumerate(k):
                if e >= 2:
                    nk = k[:j] + (e - 2,) + k[j + 1 :]
                    num[nk] = num.get(nk, 0) + v * e * (e - 1)
        return MultiPoly._raw(self.dim, degree, num, self._den)

    def euler(self) -> MultiPoly:
        """Sum over i of x_i * dP/dx_i."""
        result = MultiPoly.zero(self.dim, self.degree)
        for i in range(1, self.dim + 1):
            result = result + MultiPoly.coordinate(self.dim, i) * self.derivative(i)
        return result

    def times_r2(self, power: int = 1) -> MultiPoly:
        result = self
        for _ in range(power):
            result = result * r_squared(self.dim)
        return result

    def divide_r2(self) -> MultiPoly | None:
        """Exact quotient by x1^2 + ... + xm^2, or None if it does not divide.

        Long division by x1^2 + rho with rho = x2^2 + ... + xm^2: every term
        with x1-exponent >= 2 is eliminated, highest x1-power first.
        """
        if self.is_zero():
            return MultiPoly.zero(self.dim, max(self.degree - 2, 0))
        if self.degree < 2:
            return None
        rem = dict(self._num)
        quo: dict[Monomial, int] = {}
        top = max(k[0] for k in rem)
        for e1 in range(top, 1, -1):
            for k in [k for k in rem if k[0] == e1]:
                c = rem.pop(k)
                q = (e1 - 2,) + k[1:]
                quo[q] = quo.get(q, 0) + c
                for j in range(1, self.dim):
                    nk = q[:j] + (q[j] + 2,) + q[j + 1 :]
                    v = rem.get(nk, 0) - c
                    if v:
                        rem[nk] = v
                    else:
                        rem.pop(nk, None)
        if rem:
            return None
        return MultiPoly._raw(self.dim, self.degree - 2, quo, self._den)

    # -- evaluation -------------------------------------------------------
    def evaluate_scaled(self, ints: Sequence[int]) -> Fraction:
        """Value at x = ints / Q, multiplied by Q^degree (exact).

        Homogeneity lets the caller clear the common denominator Q of the
        point once instead of per monomial.
        """
        powers = [[1] for _ in range(self.dim)]
        total = 0
        for k, v in self._num.items():
            term = v
            for j, e in enumerate(k):
                if e:
                    pj = powers[j]
                    while len(pj) <= e:
                        pj.append(pj[-1] * ints[j])
                    term *= pj[e]
            total += term
        return Fraction(total, self._den)

    def evaluate(self, point: Sequence[Fraction | int | float]) -> Fraction:
        ints, q = _common_denominator(point, self.dim)
        return self.evaluate_scaled(ints) / Fraction(q) ** self.degree


@lru_cache(maxsize=None)
def r_squared(dim: int) -> MultiPoly:
    """x1^2 + ... + xm^2 as a MultiPoly."""
    num = {tuple(2 if j == i else 0 for j in range(dim)): 1 for i in range(dim)}
    return MultiPoly._raw(dim, 2, num)


def _check_index(dim: int, i: int) -> None:
    if not 1 <= i <= dim:
        raise ValueError(f"coordinate index {i} outside 1..{dim}")


def _common_denominator(
    point: Sequence[Fraction | int | float], dim: int
) -> tuple[list[int], int]:
    if len(point) != dim:
        raise ValueError(f"point has {len(point)} coordinates, expected {dim}")
    fracs = [Fraction(float(c)) if isinstance(c, float) else Fraction(c) for c in point]
    q = 1
    for f in fracs:
        q = math.lcm(q, f.denominator)
    return [f.numerator * (q // f.denominator) for f in fracs], q


class RadialScalar:
    """The field poly / r^s on R^m minus the origin.

    `degree` is the homogeneity degree of the represented function
    (deg poly - s). Zero fields remember their degree so that sums stay
    well-typed. Equality and hashing compare canonical forms, with every
    removable factor r^2 divided out.
    """

    __slots__ = ("poly", "radial_exponent", "degree")

    def __init__(self, poly: MultiPoly, radial_exponent: int = 0):
        if radial_exponent < 0:
            raise ValueError(f"radial exponent must be >= 0, got {radial_exponent}")
        self.poly = poly
        self.radial_exponent = radial_exponent
        self.degree = poly.degree - radial_exponent

    @property
    def dim(self) -> int:
        return self.poly.dim

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def _key(self) -> tuple[MultiPoly, int]:
        f = canonicalize(self)
        return f.poly, f.radial_exponent

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RadialScalar):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"RadialScalar({to_text(self)!r})"

    def __add__(self, other: RadialScalar) -> RadialScalar:
        return add(self, other)

    def __sub__(self, other: RadialScalar) -> RadialScalar:
        return add(self, scale(other, -1))

    def __neg__(self) -> RadialScalar:
        return scale(self, -1)

    def __mul__(self, other: RadialScalar | Fraction | int) -> RadialScalar:
        if isinstance(other, RadialScalar):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__


def _zero_field(dim: int, degree: int) -> RadialScalar:
    if degree >= 0:
        return RadialScalar(MultiPoly.zero(dim, degree), 0)
    return RadialScalar(MultiPoly.zero(dim, 0), -degree)


def _make(poly: MultiPoly, s: int, degree: int) -> RadialScalar:
    if poly.is_zero():
        return _zero_field(poly.dim, degree)
    return canonicalize(RadialScalar(poly, s))


# -- constructors ---------------------------------------------------------


def constant(dim: int, value: Fraction | int) -> RadialScalar:
    return _make(MultiPoly.constant(dim, value), 0, 0)


def coordinate(dim: int, i: int) -> RadialScalar:
    """x_i (1-based)."""
    return RadialScalar(MultiPoly.coordinate(dim, i), 0)


def unit_coordinate(dim: int, i: int) -> RadialScalar:
    """y_i = x_i / r (1-based)."""
    return RadialScalar(MultiPoly.coordinate(dim, i), 1)


def inverse_radius_power(dim: int, s: int) -> RadialScalar:
    """1 / r^s."""
    return _make(MultiPoly.constant(dim, 1), s, -s)


def field(
    dim: int, terms: Mapping[Monomial, Fraction | int], radial_exponent: int = 0
) -> RadialScalar:
    """Build P/r^s from a term mapping; the mapping must be non-empty."""
    if not terms:
        raise ValueError("field() needs at least one term; use constant(dim, 0)")
    degree = sum(next(iter(terms)))
    poly = MultiPoly(dim, degree, terms)
    return _make(poly, radial_exponent, degree - radial_exponent)


# -- operations -----------------------------------------------------------


def canonicalize(f: RadialScalar) -> RadialScalar:
    """Divide out x1^2+...+xm^2 while the radial exponent allows it."""
    if f.is_zero():
        return _zero_field(f.dim, f.degree)
    poly, s = f.poly, f.radial_exponent
    while s >= 2:
        quotient = poly.divide_r2()
        if quotient is None:
            break
        poly, s = quotient, s - 2
    if poly is f.poly:
        return f
    return RadialScalar(poly, s)


def _align(f: RadialScalar, g: RadialScalar) -> tuple[MultiPoly, MultiPoly, int]:
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")
    if f.degree != g.degree:
        raise ValueError(
            f"homogeneity degree mismatch: {f.degree} vs {g.degree}"
        )
    s, t = f.radial_exponent, g.radial_exponent
    if (s - t) % 2:
        raise ValueError(
            f"radial exponents {s} and {t} differ in parity; the sum is not a "
            "radial rational field"
        )
    top = max(s, t)
    return f.poly.times_r2((top - s) // 2), g.poly.times_r2((top - t) // 2), top


def add(f: RadialScalar, g: RadialScalar) -> RadialScalar:
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")
    if g.is_zero():
        return f
    if f.is_zero():
        return g
    p, q, s = _align(f, g)
    return _make(p + q, s, f.degree)


def sub(f: RadialScalar, g: RadialScalar) -> RadialScalar:
    return add(f, scale(g, -1))


def mul(f: RadialScalar, g: RadialScalar) -> RadialScalar:
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")
    degree = f.degree + g.degree
    if f.is_zero() or g.is_zero():
        return _zero_field(f.dim, degree)
    return _make(f.poly * g.poly, f.radial_exponent + g.radial_exponent, degree)


def scale(f: RadialScalar, c: Fraction | int) -> RadialScalar:
    c = Fraction(c)
    if not c or f.is_zero():
        return _zero_field(f.dim, f.degree)
    return RadialScalar(f.poly.scale(c), f.radial_exponent)


def multiply_radial(f: RadialScalar, k: int) -> RadialScalar:
    """f * r^k for any integer k."""
    degree = f.degree + k
    if f.is_zero():
        return _zero_field(f.dim, degree)
    poly, s = f.poly, f.radial_exponent - k
    if s < 0:
        lift = (-s + 1) // 2
        poly, s = poly.times_r2(lift), s + 2 * lift
    return _make(poly, s, degree)


def derive(f: RadialScalar, i: int) -> RadialScalar:
    """Exact partial derivative in x_i (1-based).

    d/dx_i (P / r^s) = (r^2 dP/dx_i - s x_i P) / r^(s+2).
    """
    _check_index(f.dim, i)
    degree = f.degree - 1
    if f.is_zero():
        return _zero_field(f.dim, degree)
    s = f.radial_exponent
    dp = f.poly.derivative(i)
    if s == 0:
        return _make(dp, 0, degree)
    num = dp.times_r2() - (MultiPoly.coordinate(f.dim, i) * f.poly).scale(s)
    return _make(num, s + 2, degree)


def laplacian(f: RadialScalar) -> RadialScalar:
    """Exact Laplacian.

    Delta(P / r^s) = (r^2 Delta P - 2 s d P + s (s + 2 - m) P) / r^(s+2)
    with d = deg P.
    """
    degree = f.degree - 2
    if f.is_zero():
        return _zero_field(f.dim, degree)
    s, d, m = f.radial_exponent, f.poly.degree, f.dim
    lap = f.poly.laplacian()
    if s == 0:
        return _make(lap, 0, degree)
    num = lap.times_r2() + f.poly.scale(s * (s + 2 - m) - 2 * s * d)
    return _make(num, s + 2, degree)


def iterated_laplacian(f: RadialScalar, k: int) -> RadialScalar:
    for _ in range(k):
        f = laplacian(f)
    return f


def gradient_dot(f: RadialScalar, g: RadialScalar) -> RadialScalar:
    """Sum over i of (df/dx_i)(dg/dx_i)."""
    result = _zero_field(f.dim, f.degree + g.degree - 2)
    for i in range(1, f.dim + 1):
        result = add(result, mul(derive(f, i), derive(g, i)))
    return result


def laplacian_radial_power(s: int, m: int) -> Fraction:
    """Coefficient c in Delta(1/r^s) = c / r^(s+2)."""
    if s < 0 or m < 1:
        raise ValueError(f"need s >= 0 and m >= 1, got s={s}, m={m}")
    return Fraction(s * (s + 2 - m))


def is_zero(f: RadialScalar) -> bool:
    return canonicalize(f).is_zero()


def proportionality(f: RadialScalar, g: RadialScalar) -> Fraction | None:
    """The rational k with f = k*g, or None when f is not a multiple of g."""
    if f.is_zero():
        return Fraction(0)
    if g.is_zero() or f.dim != g.dim or f.degree != g.degree:
        return None
    if (f.radial_exponent - g.radial_exponent) % 2:
        return None
    p, q, _ = _align(f, g)
    mono = next(iter(q))
    k = p.coefficient(mono) / q.coefficient(mono)
    if (p - q.scale(k)).is_zero():
        return k
    return None


def exact_parts(f: RadialScalar, point: Sequence[float]) -> tuple[Fraction, bool, Fraction]:
    """Exact pieces of f(x): (v, odd, r2) with f(x) = v / sqrt(r2)^odd.

    v = P(x) / r2^(s // 2) is computed in rational arithmetic from the binary
    values of the coordinates; only an odd radial exponent leaves a square
    root outside.
    """
    ints, q = _common_denominator(point, f.dim)
    r2_scaled = sum(c * c for c in ints)
    if r2_scaled == 0:
        raise ValueError("radial rational fields are undefined at the origin")
    r2 = Fraction(r2_scaled, q * q)
    s = f.radial_exponent
    value = f.poly.evaluate_scaled(ints) / Fraction(q) ** f.poly.degree
    value /= r2 ** (s // 2)
    return value, bool(s % 2), r2


def round_parts(value: Fraction, odd: bool, r2: Fraction) -> float:
    """Round v / sqrt(r2)^odd to a float."""
    if not odd:
        return float(value)
    return math.copysign(math.sqrt(float(value * value / r2)), value)


# -- vectors --------------------------------------------------------------


@dataclass(frozen=True)
class RadialVector:
    """A length-m family of RadialScalar with shared dimension and degree."""

    components: tuple[RadialScalar, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("RadialVector needs at least one component")
        dims = {c.dim for c in self.components}
        degrees = {c.degree for c in self.components}
        if len(dims) != 1 or len(degrees) != 1:
            raise ValueError(
                f"components disagree: dimensions {dims}, degrees {degrees}"
            )
        if len(self.components) != self.dim:
            raise ValueError(
                f"expected {self.dim} components, got {len(self.components)}"
            )

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def degree(self) -> int:
        return self.components[0].degree

    def __iter__(self) -> Iterator[RadialScalar]:
        return iter(self.components)

    def __getitem__(self, i: int) -> RadialScalar:
        """Component i (1-based, like coordinates)."""
        _check_index(self.dim, i)
        return self.components[i - 1]

    def times(self, f: RadialScalar) -> RadialVector:
        return RadialVector(tuple(mul(f, c) for c in self.components))

    def dot(self, other: RadialVector) -> RadialScalar:
        result = _zero_field(self.dim, self.degree + other.degree)
        for a, b in zip(self.components, other.components):
            result = add(result, mul(a, b))
        return result

    def divergence(self) -> RadialScalar:
        result = _zero_field(self.dim, self.degree - 1)
        for i, c in enumerate(self.components, start=1):
            result = add(result, derive(c, i))
        return result


def gradient(f: RadialScalar) -> RadialVector:
    return RadialVector(tuple(derive(f, i) for i in range(1, f.dim + 1)))


def sum_fields(fields: Iterable[RadialScalar], dim: int, degree: int) -> RadialScalar:
    result = _zero_field(dim, degree)
    for f in fields:
        result = add(result, f)
    return result


# -- text form ------------------------------------------------------------


def to_text(f: RadialScalar) -> str:
    """Serialize as `(coeff)*x1^a1*...*xm^am/r^s` terms joined by `+`."""
    s = f.radial_exponent
    if f.is_zero():
        mono = (f.poly.degree,) + (0,) * (f.dim - 1)
        return _term_text(Fraction(0), mono, s)
    terms = f.poly.terms
    return "+".join(_term_text(terms[k], k, s) for k in sorted(terms, reverse=True))


def _term_text(c: Fraction, mono: Monomial, s: int) -> str:
    powers = "".join(f"*x{j}^{e}" for j, e in enumerate(mono, start=1))
    return f"({c}){powers}/r^{s}"


def parse_field(text: str, dim: int) -> RadialScalar:
    """Inverse of `to_text`."""
    terms: dict[Monomial, Fraction] = {}
    exponents = set()
    degree = None
    for chunk in text.strip().split("+"):
        match = _TERM_RE.match(chunk.strip())
        if not match:
            raise ValueError(f"cannot parse field term {chunk!r}")
        coeff, powers, s = match.groups()
        mono = [0] * dim
        for var, exp in re.findall(r"\*x(\d+)\^(\d+)", powers):
            j = int(var)
            _check_index(dim, j)
            mono[j - 1] = int(exp)
        mono = tuple(mono)
        degree = sum(mono)
        exponents.add(int(s))
        c = Fraction(coeff)
        if c:
            terms[mono] = terms.get(mono, Fraction(0)) + c
    if len(exponents) != 1:
        raise ValueError(f"terms disagree on the radial exponent: {sorted(exponents)}")
    s = exponents.pop()
    if not terms:
        return _zero_field(dim, degree - s)
    return field(dim, terms, s)

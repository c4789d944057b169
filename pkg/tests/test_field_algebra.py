import itertools
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from polyharm.field_algebra import (
    MultiPoly,
    RadialScalar,
    add,
    canonicalize,
    constant,
    coordinate,
    derive,
    exact_parts,
    field,
    gradient,
    gradient_dot,
    inverse_radius_power,
    is_zero,
    iterated_laplacian,
    laplacian,
    laplacian_radial_power,
    mul,
    multiply_radial,
    parse_field,
    proportionality,
    round_parts,
    scale,
    sub,
    sum_fields,
    to_text,
    unit_coordinate,
)


def _monomials(dim, degree):
    return [m for m in itertools.product(range(degree + 1), repeat=dim) if sum(m) == degree]


@st.composite
def radial_fields(draw, dim=None):
    dim = dim or draw(st.integers(2, 3))
    degree = draw(st.integers(0, 3))
    s = draw(st.integers(0, 3))
    monos = _monomials(dim, degree)
    coeffs = draw(st.lists(st.integers(-4, 4), min_size=len(monos), max_size=len(monos)))
    terms = {mono: c for mono, c in zip(monos, coeffs) if c}
    if not terms:
        terms = {monos[0]: 1}
    return field(dim, terms, s)


def _to_sympy(f, xs):
    r = sp.sqrt(sum(x**2 for x in xs))
    poly = sum(
        (
            sp.Rational(c.numerator, c.denominator) * sp.Mul(*[x**e for x, e in zip(xs, mono)])
            for mono, c in f.poly.terms.items()
        ),
        sp.Integer(0),
    )
    return poly / r**f.radial_exponent


def test_unit_coordinate_laplacian():
    for m in (2, 3, 5):
        y1 = unit_coordinate(m, 1)
        expected = scale(multiply_radial(y1, -2), 1 - m)
        assert laplacian(y1) == expected


def test_canonical_form_divides_out_r_squared():
    r2 = sum_fields((mul(coordinate(3, i), coordinate(3, i)) for i in (1, 2, 3)), 3, 2)
    f = RadialScalar(mul(r2, coordinate(3, 1)).poly, 3)
    assert canonicalize(f) == unit_coordinate(3, 1)
    assert canonicalize(f).radial_exponent == 1


def test_raw_construction_equals_its_canonical_form():
    r2 = sum_fields((mul(coordinate(3, i), coordinate(3, i)) for i in (1, 2, 3)), 3, 2)
    raw = RadialScalar(mul(r2, coordinate(3, 1)).poly, 3)
    assert raw.radial_exponent == 3
    assert raw == unit_coordinate(3, 1)
    assert unit_coordinate(3, 1) == raw
    assert hash(raw) == hash(unit_coordinate(3, 1))
    assert len({raw, unit_coordinate(3, 1)}) == 1
    assert raw != unit_coordinate(3, 2)


def test_zero_field_keeps_degree_and_absorbs():
    y = unit_coordinate(3, 2)
    zero = sub(y, y)
    assert is_zero(zero)
    assert zero.degree == 0
    assert add(y, zero) == y
    assert add(constant(3, 0), laplacian(y)) == laplacian(y)


def test_add_rejects_mismatched_degree():
    with pytest.raises(ValueError):
        add(coordinate(2, 1), constant(2, 1))


def test_add_rejects_radial_parity_mismatch():
    with pytest.raises(ValueError, match="parity"):
        add(unit_coordinate(3, 1), constant(3, 1))


def test_multipoly_rejects_inhomogeneous_terms():
    with pytest.raises(ValueError):
        MultiPoly(2, 2, {(2, 0): 1, (1, 0): 1})


def test_laplacian_radial_power_matches_symbolic():
    for m in (2, 3, 4):
        for s in range(0, 5):
            lap = laplacian(inverse_radius_power(m, s))
            expected = scale(inverse_radius_power(m, s + 2), laplacian_radial_power(s, m))
            assert is_zero(sub(lap, expected))


@settings(max_examples=60, deadline=None)
@given(radial_fields())
def test_euler_identity(f):
    dim = f.dim
    radial = sum_fields(
        (mul(coordinate(dim, i), derive(f, i)) for i in range(1, dim + 1)), dim, f.degree
    )
    assert is_zero(sub(radial, scale(f, f.degree)))


@settings(max_examples=40, deadline=None)
@given(radial_fields())
def test_polynomial_euler_operator(f):
    poly = f.poly
    if poly.degree >= 1:
        assert poly.euler() == poly.scale(poly.degree)


@settings(max_examples=60, deadline=None)
@given(radial_fields(), st.integers(1, 2), st.integers(1, 2))
def test_mixed_derivatives_commute(f, i, j):
    assert derive(derive(f, i), j) == derive(derive(f, j), i)


@settings(max_examples=60, deadline=None)
@given(radial_fields(dim=3), radial_fields(dim=3))
def test_canonical_form_is_unique(f, g):
    assert multiply_radial(multiply_radial(f, 2), -2) == f
    product = mul(f, g)
    assert sub(add(product, f * 3 * g), scale(product, 4)).is_zero()


@settings(max_examples=40, deadline=None)
@given(radial_fields())
def test_divergence_of_gradient_is_laplacian(f):
    assert gradient(f).divergence() == laplacian(f)


@settings(max_examples=40, deadline=None)
@given(radial_fields(), radial_fields())
def test_product_rule_for_laplacian(f, g):
    if f.dim != g.dim:
        g = field(f.dim, {(1,) + (0,) * (f.dim - 1): 1}, 1)
    lhs = laplacian(mul(f, g))
    rhs = add(
        add(mul(laplacian(f), g), mul(f, laplacian(g))), scale(gradient_dot(f, g), 2)
    )
    assert is_zero(sub(lhs, rhs))


@settings(max_examples=15, deadline=None)
@given(radial_fields())
def test_laplacian_against_sympy(f):
    xs = sp.symbols(f"x1:{f.dim + 1}")
    expr = _to_sympy(f, xs)
    lap_sym = sum(sp.diff(expr, x, 2) for x in xs)
    ours = _to_sympy(laplacian(f), xs)
    point = dict(zip(xs, (1, 2, 3)[: f.dim]))
    assert sp.simplify((lap_sym - ours).subs(point)) == 0


def test_iterated_laplacian_of_homogeneous_harmonic_polynomial():
    h = field(3, {(1, 1, 0): 1})
    assert is_zero(laplacian(h))
    assert is_zero(iterated_laplacian(h, 3))


def test_proportionality():
    y = unit_coordinate(4, 3)
    lap = laplacian(y)
    assert proportionality(lap, multiply_radial(y, -2)) == Fraction(-3)
    assert proportionality(y, unit_coordinate(4, 1)) is None
    assert proportionality(sub(y, y), y) == 0


def test_exact_parts_and_rounding():
    y = unit_coordinate(2, 1)
    value, odd, r2 = exact_parts(y, [3.0, 4.0])
    assert (value, odd, r2) == (Fraction(3), True, Fraction(25))
    assert round_parts(value, odd, r2) == pytest.approx(0.6)


def test_exact_parts_rejects_origin():
    with pytest.raises(ValueError, match="origin"):
        exact_parts(unit_coordinate(3, 1), [0.0, 0.0, 0.0])


def test_text_form_parses_back():
    y1, y2 = unit_coordinate(3, 1), unit_coordinate(3, 2)
    f = sub(scale(y1, Fraction(-1, 2)), multiply_radial(laplacian(y2), 2))
    text = to_text(f)
    assert parse_field(text, 3) == f


def test_parse_field_rejects_garbage():
    with pytest.raises(ValueError):
        parse_field("x1 + 2", 2)

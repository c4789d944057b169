import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyharm.deformation import (
    BIHARMONIC,
    TRIHARMONIC,
    ConstraintPoly,
    DeformationParameter,
    QuadExt,
    biharmonic_admissible,
    biharmonic_t,
    classify,
    corollary_check,
    enumerate_admissible,
    stated_solvable_bih,
    normalize_kind,
    square_free_part,
    statement_discrepancies,
    triharmonic_admissible,
    triharmonic_branch_closed_form,
    triharmonic_poly,
    triharmonic_roots,
)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=30)


@st.composite
def quad(draw, d):
    return QuadExt(draw(rationals), draw(rationals), d)


# -- QuadExt ------------------------------------------------------------------


def test_quadext_normal_form():
    assert QuadExt.sqrt_of(8) == QuadExt(Fraction(0), Fraction(2), 2)
    assert QuadExt.sqrt_of(8).d == 2
    assert QuadExt.sqrt_of(Fraction(1, 4)).is_rational
    assert QuadExt(1, 3, 1) == 4
    assert square_free_part(72) == (6, 2)


def test_quadext_text():
    t = QuadExt(Fraction(14, 15), Fraction(-1, 15), 61)
    assert str(t) == "14/15 - 1/15*sqrt(61)"
    assert str(QuadExt(0, 1, 5)) == "sqrt(5)"
    assert str(QuadExt(Fraction(1, 2))) == "1/2"


@settings(max_examples=80, deadline=None)
@given(quad(61), quad(61), quad(61))
def test_quadext_field_axioms(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x - x == 0
    if x != 0:
        assert x / x == 1
        assert (y / x) * x == y


@settings(max_examples=80, deadline=None)
@given(quad(7))
def test_quadext_sign_matches_float(x):
    value = float(x)
    if abs(value) > 1e-9:
        assert x.sign() == (1 if value > 0 else -1)
    assert x * x.conjugate() == x.norm()


def test_quadext_rejects_mixed_fields():
    with pytest.raises(ValueError, match="sqrt"):
        QuadExt.sqrt_of(2) + QuadExt.sqrt_of(3)


def test_quadext_comparisons():
    root = QuadExt(Fraction(14, 15), Fraction(-1, 15), 61)
    assert 0 < root < 1
    assert root > Fraction(41, 100)
    assert root < Fraction(42, 100)
    assert float(root) == pytest.approx((14 - math.sqrt(61)) / 15)


# -- constraint polynomials -----------------------------------------------------


def test_constraint_poly_basics():
    p = ConstraintPoly((Fraction(9), Fraction(-28), Fraction(15)))
    assert p.degree == 2
    assert p.monic().coefficient(2) == 1
    assert p.scale(25).ratio_to(p) == 25
    assert p.ratio_to(ConstraintPoly((1, 1))) is None
    assert str(p) == "15*t^2 - 28*t + 9"
    roots = p.roots()
    assert len(roots) == 2
    assert all(p(r) == 0 for r in roots)
    assert roots[0] < roots[1]


def test_constraint_poly_trailing_zeros_are_dropped():
    assert ConstraintPoly((1, 0, 0)).degree == 0
    assert ConstraintPoly((0,)).is_zero()
    assert ConstraintPoly.monomial(3, 2).coefficients == (0, 0, 3)


def test_deformation_parameter_angle():
    half = DeformationParameter(Fraction(1, 2), "alpha", branch="single")
    assert half.admissible
    assert half.angle == pytest.approx(math.pi / 4)
    with pytest.raises(ValueError):
        DeformationParameter(Fraction(3, 2), "alpha").angle


def test_normalize_kind():
    assert normalize_kind("bih") == BIHARMONIC
    assert normalize_kind("Triharmonic") == TRIHARMONIC
    with pytest.raises(ValueError):
        normalize_kind("quadharmonic")


# -- biharmonic -----------------------------------------------------------------


def test_biharmonic_spot_value():
    assert biharmonic_t(4, 4) == Fraction(1, 2)
    rec = biharmonic_admissible(4, 4)
    assert rec.equation_solvable
    assert rec.which_branch == "single"
    assert rec.proper_map_exists
    assert rec.t_minus.angle == pytest.approx(math.pi / 4)


def test_biharmonic_degenerate_pair():
    with pytest.raises(ValueError, match="zero denominator"):
        biharmonic_t(1, 1)
    rec = classify("bih", 1, 1)
    assert rec.degenerate
    assert not rec.equation_solvable
    assert rec.roots == []


@pytest.mark.parametrize("m,solvable", [(2, False), (3, False), (4, True), (6, True), (7, False)])
def test_biharmonic_first_order(m, solvable):
    assert biharmonic_admissible(1, m).equation_solvable is solvable


def test_biharmonic_table_matches_statement():
    records = enumerate_admissible("bih", 10, 30, require_map=False)
    assert statement_discrepancies(records) == []
    for rec in records:
        assert rec.equation_solvable == stated_solvable_bih(rec.ell, rec.m)


# -- triharmonic ------------------------------------------------------------------


def test_triharmonic_poly_first_order():
    assert triharmonic_poly(1, 6) == ConstraintPoly((225, -700, 375))


def test_triharmonic_roots_l1_m6():
    minus, plus = triharmonic_roots(1, 6)
    assert minus.t == QuadExt(Fraction(14, 15), Fraction(-1, 15), 61)
    assert minus.value == pytest.approx((14 - math.sqrt(61)) / 15, rel=1e-12)
    assert minus.branch == "minus"
    assert not plus.admissible
    assert triharmonic_admissible(1, 6).which_branch == "minus"


def test_triharmonic_plus_branch_cases():
    rec = triharmonic_admissible(4, 1)
    assert rec.which_branch == "plus"
    assert rec.t_plus.t == QuadExt(Fraction(2, 9), Fraction(1, 9), 13)
    assert triharmonic_admissible(1, 7).t_minus.t == QuadExt(Fraction(10, 9), Fraction(-1, 9), 10)


def test_triharmonic_no_real_solution():
    rec = triharmonic_admissible(1, 2)
    assert rec.roots == []
    assert rec.diagnostic == "no real solution"
    assert triharmonic_branch_closed_form(1, 2, "minus") is None


def _expected_low_order_branch(ell, m):
    if ell == 1:
        return "minus" if m in (6, 7) else "none"
    if ell == 2:
        return "plus" if m == 3 else "minus" if 5 <= m <= 11 else "none"
    return "plus" if m in (2, 3) else "minus" if 4 <= m <= 26 else "none"


@pytest.mark.parametrize("ell", [1, 2, 3])
@pytest.mark.parametrize("m", range(1, 31))
def test_low_order_branches(ell, m):
    rec = classify("tri", ell, m)
    assert rec.which_branch == _expected_low_order_branch(ell, m)
    assert rec.equation_solvable == (rec.which_branch != "none")


def test_roots_annihilate_constraint_exactly():
    for ell in range(1, 31):
        for m in range(1, 31):
            if ell * (ell + m - 2) == 0:
                continue
            poly = triharmonic_poly(ell, m)
            for root in triharmonic_roots(ell, m):
                assert poly(root.t) == 0
                assert triharmonic_branch_closed_form(ell, m, root.branch) == root.t


def test_triharmonic_statement_misses_three_pairs():
    records = enumerate_admissible("tri", 10, 30, require_map=False)
    assert statement_discrepancies(records) == [(4, 1), (4, 2), (5, 1)]
    for ell, m in ((4, 1), (4, 2), (5, 1)):
        assert classify("tri", ell, m).t_plus.admissible


def test_branch_closed_form_rejects_unknown_branch():
    with pytest.raises(ValueError):
        triharmonic_branch_closed_form(2, 3, "single")


# -- scans --------------------------------------------------------------------------


def test_enumerate_order_and_map_filter():
    records = enumerate_admissible("bih", 6, 6)
    assert len(records) == 21
    assert [(r.ell, r.m) for r in records] == sorted((r.ell, r.m) for r in records)
    assert all(r.map_exists for r in records)
    everything = enumerate_admissible("bih", 6, 6, require_map=False)
    assert len(everything) == 36
    assert not classify("bih", 5, 1).map_exists
    assert not classify("bih", 5, 1).proper_map_exists


def test_enumerate_is_thread_independent():
    serial = enumerate_admissible("tri", 6, 12)
    threaded = enumerate_admissible("tri", 6, 12, threads=4)
    assert [r.to_dict() for r in serial] == [r.to_dict() for r in threaded]


def test_enumerate_rejects_bad_bounds():
    with pytest.raises(ValueError):
        enumerate_admissible("bih", 0, 5)


@pytest.mark.parametrize("kind", ["bih", "tri"])
def test_every_dimension_admits_a_deformation(kind):
    assert corollary_check(kind, 3, 30) == []

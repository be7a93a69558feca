import pytest
from hypothesis import given, strategies as st

from conedbar.obstruction import (
    FAILS,
    HOLDS,
    INDETERMINATE,
    CurveSpec,
    hypothesis_check,
    obstruction_table,
    resolution_cohomology,
    rr_dims,
    scanned_nu_bound,
)


def laurent_count_h1(deg):
    # Cech count on CP^1: Laurent monomials t^j on the annulus that extend to
    # neither chart A (j >= 0) nor chart B after the O(deg) twist (j <= deg)
    return sum(1 for j in range(-50, 51) if j < 0 and j > deg)


def monomial_count_h0(deg):
    return sum(1 for j in range(0, 51) if j <= deg)


@pytest.mark.parametrize("deg", range(-8, 9))
def test_genus0_matches_monomial_counts(deg):
    assert rr_dims(0, deg) == (monomial_count_h0(deg), laurent_count_h1(deg))


@pytest.mark.parametrize("mu", range(-6, 2))
def test_genus0_sections_of_negative_powers(mu):
    # divisor of degree -1, so D^mu has degree -mu
    h0, h1 = rr_dims(0, -mu)
    assert (h0, h1) == (1 - mu, 0)


def test_genus1_elliptic_function_counts():
    assert rr_dims(1, 0, triviality_hint=True) == (1, 1)
    for mu in range(-6, 0):
        assert rr_dims(1, -mu) == (-mu, 0)


def test_genus1_degree_zero_needs_hint():
    assert rr_dims(1, 0) == (None, None)
    assert rr_dims(1, 0, triviality_hint=False) == (0, 0)


def test_genus2_special_window_is_indeterminate():
    assert rr_dims(2, 1) == (None, None)
    assert rr_dims(2, 2) == (None, None)
    assert rr_dims(2, 3) == (2, 0)
    assert rr_dims(2, -1) == (0, 2)


@given(st.integers(0, 6), st.integers(-30, 30), st.sampled_from([None, True, False]))
def test_riemann_roch_on_determinate_rows(genus, deg, hint):
    h0, h1 = rr_dims(genus, deg, hint)
    if h0 is not None:
        assert h0 - h1 == deg + 1 - genus
        assert h0 >= 0 and h1 >= 0


@given(st.integers(0, 6), st.integers(-30, 30))
def test_serre_duality_symmetry(genus, deg):
    h0, h1 = rr_dims(genus, deg)
    d0, _ = rr_dims(genus, 2 * genus - 2 - deg)
    if h1 is not None and d0 is not None:
        assert h1 == d0


def test_table_genus0_quadric():
    table = obstruction_table(CurveSpec(0, 2), k=-1)
    assert table.verdict_T14 == HOLDS
    assert table.verdict_T81 == HOLDS
    assert table.row(-1).h1 == 1
    assert table.verdict_T12 == FAILS
    assert table.riemann_roch_defects() == []


def test_table_degree_minus_one_reading_of_quadric():
    # normal bundle of degree -1 instead of -2: the mu = -1 summand vanishes
    assert obstruction_table(CurveSpec(0, 1), k=-1).verdict_T12 == HOLDS


@pytest.mark.parametrize("e", range(1, 6))
def test_table_genus1_bounded_hypothesis(e):
    table = obstruction_table(CurveSpec(1, e), k=1)
    assert table.verdict_T14 == HOLDS
    assert table.verdict_T81 == HOLDS


def test_table_rows_follow_range():
    table = obstruction_table(CurveSpec(0, 3), k=-2, mu_range=range(-2, 3))
    assert [r.mu for r in table.rows] == [-2, -1, 0, 1, 2]
    assert [r.deg for r in table.rows] == [-6, -3, 0, 3, 6]
    assert [r.h1 for r in table.rows] == [5, 2, 0, 0, 0]


@pytest.mark.parametrize("e", range(1, 5))
def test_resolution_cohomology(e):
    assert resolution_cohomology(CurveSpec(0, e)) == 0
    assert resolution_cohomology(CurveSpec(1, e)) == 1


def test_resolution_cohomology_genus2_unknown_when_special():
    assert resolution_cohomology(CurveSpec(2, 1)) is None
    # deg 0 is O_X; degrees 3, 6 are beyond 2g - 2
    assert resolution_cohomology(CurveSpec(2, 3)) == 2


def test_hypothesis_check_witnesses():
    verdict, rows = hypothesis_check("T14", CurveSpec(0, 2))
    assert verdict == HOLDS and all(r.h1 == 0 for r in rows)
    verdict, rows = hypothesis_check("T14", CurveSpec(2, 1))
    assert verdict == INDETERMINATE
    assert [r.deg for r in rows if r.h1 is None] == [1, 2]
    assert hypothesis_check("T81", CurveSpec(1, 1))[0] == HOLDS
    with pytest.raises(ValueError):
        hypothesis_check("T99", CurveSpec(0, 1))


def test_scanned_bound():
    assert scanned_nu_bound(CurveSpec(0, 2)) == 1
    # genus 2, e = 1: need nu * mu > 2 for all mu >= 1
    assert scanned_nu_bound(CurveSpec(2, 1)) == 3
    assert scanned_nu_bound(CurveSpec(2, 1), nu_max=2) is None


def test_text_table_is_aligned():
    lines = obstruction_table(CurveSpec(0, 2), k=-1).to_text().splitlines()
    rows = lines[:5]
    assert len({len(line) for line in rows}) == 1

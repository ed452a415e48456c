import numpy as np
import pytest
from scipy.integrate import quad

from sigmatoda.curves import CurvePoint, make_curve
from sigmatoda.errors import BranchPointSingularity
from sigmatoda.periods import (
    PeriodData,
    QuadratureConfig,
    build_cycles,
    compute_periods,
    first_kind_diff,
    legendre_residual,
    second_kind_diff,
    second_kind_numerator,
)


@pytest.fixture(scope="module")
def g1():
    curve = make_curve(1, [0, -1, 0])
    return curve, compute_periods(curve)


@pytest.fixture(scope="module")
def g2():
    curve = make_curve(2, [1, 0, 0, 0, 0])
    return curve, compute_periods(curve)


def test_first_kind_diff_values():
    curve = make_curve(2, [1, 0, 0, 0, 0])
    p = CurvePoint(2.0, 3.0)
    assert first_kind_diff(curve, 1, p) == pytest.approx(1 / 6)
    assert first_kind_diff(curve, 2, p) == pytest.approx(2 / 6)
    with pytest.raises(BranchPointSingularity):
        first_kind_diff(curve, 1, CurvePoint(-1.0, 0.0))


def test_second_kind_diff_genus1_classical():
    # for y^2 = x^3 - x the only second-kind numerator is lambda_3 x = x
    curve = make_curve(1, [0, -1, 0])
    assert np.allclose(second_kind_numerator(curve, 1), [0, 1])
    p = CurvePoint(2.0, np.sqrt(6.0))
    assert second_kind_diff(curve, 1, p) == pytest.approx(2.0 / (2 * np.sqrt(6.0)))


def test_second_kind_diff_genus2_top_form():
    curve = make_curve(2, [1, 0, 0, 0, 0])
    assert np.allclose(second_kind_numerator(curve, 2), [0, 0, 1])
    num1 = second_kind_numerator(curve, 1)  # lam3 x + 2 lam4 x^2 + 3 x^3
    assert np.allclose(num1, [0, 0, 0, 3.0])


def test_second_kind_diff_index_contract():
    curve = make_curve(1, [0, -1, 0])
    with pytest.raises(ValueError):
        second_kind_numerator(curve, 2)


def test_build_cycles_canonical_intersection(g2):
    curve, _ = g2
    basis = build_cycles(curve)
    g = curve.genus
    inter = basis.intersection_matrix()
    expected = np.block([[np.zeros((g, g), int), np.eye(g, dtype=int)],
                         [-np.eye(g, dtype=int), np.zeros((g, g), int)]])
    assert np.array_equal(inter, expected)


def test_build_cycles_deterministic(g1):
    curve, _ = g1
    b1, b2 = build_cycles(curve), build_cycles(curve)
    assert np.array_equal(b1.branch_points, b2.branch_points)
    assert b1.alpha_pairs == b2.alpha_pairs
    assert b1.beta_chains == b2.beta_chains
    # genus 1: alpha around {-1, 0}, beta around {0, 1}
    assert np.allclose(b1.branch_points, [-1, 0, 1])
    assert b1.alpha_pairs == (0,)
    assert b1.beta_chains == ((1,),)


def test_legendre_certificate_genus1(g1):
    _, pd = g1
    assert pd.legendre_residual < 1e-10


def test_legendre_certificate_genus2(g2):
    _, pd = g2
    assert pd.legendre_residual < 1e-8


def test_omega1_matches_independent_quadrature(g1):
    # alpha loop encircles [-1, 0]; on that segment x^3 - x > 0
    _, pd = g1
    oracle, err = quad(lambda t: 1.0 / (2.0 * np.sqrt(t**3 - t)), -1.0, 0.0)
    assert err < 1e-9
    assert abs(abs(pd.omega1[0, 0]) - abs(oracle)) < 1e-10


def test_riemann_matrix_properties(g2):
    _, pd = g2
    t = pd.riemann
    assert np.max(np.abs(t - t.T)) < 1e-8
    eigs = np.linalg.eigvalsh(t.imag)
    assert np.all(eigs > 0)


def test_genus1_tau_upper_half(g1):
    _, pd = g1
    tau = pd.omega2[0, 0] / pd.omega1[0, 0]
    assert tau.imag > 0
    # the lemniscatic curve has square period lattice
    assert tau == pytest.approx(1j, abs=1e-10)


def test_perturbed_periods_fail_certificate(g1):
    _, pd = g1
    bad = PeriodData(pd.omega1 * (1 + 1e-3), pd.omega2, pd.eta1, pd.eta2,
                     pd.riemann, 0.0, 0.0, pd.cycles)
    assert legendre_residual(bad) > 1e-4


def test_refinement_agrees_within_reported_error(g2):
    curve, pd = g2
    finer = compute_periods(curve, quad=QuadratureConfig(base_nodes=512))
    for a, b in ((pd.omega1, finer.omega1), (pd.omega2, finer.omega2),
                 (pd.eta1, finer.eta1), (pd.eta2, finer.eta2)):
        assert np.max(np.abs(a - b)) <= max(pd.error_estimate, 1e-13) * 10

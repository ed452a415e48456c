import numpy as np
import pytest

from sigmatoda.curves import CurvePoint, make_curve, random_curve_points
from sigmatoda.errors import ConfluentInput
from sigmatoda.sigma import abel_map, sigma_context, wp
from sigmatoda.toda import (
    V,
    V_c,
    char_poly,
    d_log_sigma,
    directional_derivative,
    flaschka,
    flaschka_ode_residual,
    flaschka_wp_path,
    frame_well_conditioned,
    hirota_residual,
    invariant_drift,
    lax_det_residual,
    lax_matrix,
    site_u,
    spectral_morphism,
    toda2d_residual,
    toda_frame,
    toda_residual_1d,
)


@pytest.fixture(scope="module")
def ctx1():
    return sigma_context(make_curve(1, [0, -1, 0]))


@pytest.fixture(scope="module")
def ctx2():
    return sigma_context(make_curve(2, [1, 0, 0, 0, 0]))


def conditioned_frame(ctx, rng, n_range=range(-4, 5)):
    for _ in range(40):
        v1 = random_curve_points(ctx.curve, rng, 1)[0]
        frame = toda_frame(ctx, v1, rng=rng)
        if frame_well_conditioned(frame, n_range):
            return frame
    raise RuntimeError("no conditioned frame found")


def test_directional_derivative_exact_vs_fd(ctx2):
    rng = np.random.default_rng(0)
    pts = random_curve_points(ctx2.curve, rng, 2)
    u = abel_map(ctx2, pts).u
    xp = 0.7 - 0.2j

    def log_sigma(v):
        from sigmatoda.sigma import sigma

        return np.log(sigma(ctx2, v))

    exact = d_log_sigma(ctx2, xp, u, order=1)
    fd = directional_derivative(ctx2, xp, log_sigma, u, order=1)
    assert exact == pytest.approx(fd, abs=1e-6)
    exact2 = d_log_sigma(ctx2, xp, u, order=2)
    fd2 = directional_derivative(ctx2, xp, log_sigma, u, order=2, fd_step=1e-4)
    assert exact2 == pytest.approx(fd2, rel=1e-5, abs=1e-5)


def test_directional_derivatives_commute(ctx2):
    # mixed directional derivatives of log sigma agree in either order
    rng = np.random.default_rng(1)
    pts = random_curve_points(ctx2.curve, rng, 2)
    u = abel_map(ctx2, pts).u
    from sigmatoda.sigma import sigma_jet2
    from sigmatoda.toda import direction_vector

    d1 = direction_vector(0.3 + 0.4j, 2)
    d2 = direction_vector(-1.2 + 0.1j, 2)
    sig, grad, hess = sigma_jet2(ctx2, u)
    m12 = (d1 @ hess @ d2) / sig - (d1 @ grad) * (d2 @ grad) / sig**2
    m21 = (d2 @ hess @ d1) / sig - (d2 @ grad) * (d1 @ grad) / sig**2
    assert m12 == pytest.approx(m21, rel=1e-14)


def test_v_genus1_is_wp(ctx1):
    rng = np.random.default_rng(2)
    frame = conditioned_frame(ctx1, rng)
    u = site_u(frame, 0, 0.1)
    assert V(frame, u) == pytest.approx(wp(ctx1, 1, 1, u), rel=1e-12)
    from sigmatoda.curves import f12

    assert V_c(frame) == pytest.approx(f12(ctx1.curve, frame.v1.x), rel=1e-14)


def test_toda_second_difference_residual(ctx1, ctx2):
    rng = np.random.default_rng(3)
    for ctx, tol in ((ctx1, 1e-6), (ctx2, 1e-5)):
        frame = conditioned_frame(ctx, rng)
        t0 = complex(rng.normal() * 0.05, rng.normal() * 0.05)
        if not frame_well_conditioned(frame, range(-4, 5), t0):
            t0 = 0.0
        for n in range(-3, 4):
            assert toda_residual_1d(frame, n, t0) < tol


def test_fd_step_convergence_order(ctx1):
    rng = np.random.default_rng(4)
    frame = conditioned_frame(ctx1, rng)
    r_coarse = toda_residual_1d(frame, 0, 0.02, fd_step=4e-2, richardson=False)
    r_fine = toda_residual_1d(frame, 0, 0.02, fd_step=2e-2, richardson=False)
    assert r_fine < r_coarse / 2.5  # second order in the step


def test_hirota_residual_and_joint_pass(ctx1, ctx2):
    rng = np.random.default_rng(5)
    for ctx, tol_h, tol_t in ((ctx1, 1e-7, 1e-6), (ctx2, 1e-5, 1e-5)):
        frame = conditioned_frame(ctx, rng)
        for n in (-2, 0, 2):
            assert hirota_residual(frame, n, 0.04) < tol_h
            assert toda_residual_1d(frame, n, 0.04) < tol_t


def test_two_time_residual(ctx2):
    rng = np.random.default_rng(6)
    for _ in range(3):
        v1, v2 = random_curve_points(ctx2.curve, rng, 2)
        try:
            r = toda2d_residual(ctx2, v1, v2, 0, 0.02, -0.01, rng=rng)
        except Exception:
            continue
        assert r < 1e-5


def test_two_time_confluent_guard(ctx2):
    rng = np.random.default_rng(7)
    v1 = random_curve_points(ctx2.curve, rng, 1)[0]
    with pytest.raises(ConfluentInput):
        toda2d_residual(ctx2, v1, v1, 0)


def test_two_time_matches_one_time_in_limit(ctx1):
    # v2 -> v1 reproduces the one-time equation's residual behavior
    rng = np.random.default_rng(8)
    v1 = random_curve_points(ctx1.curve, rng, 1)[0]
    x2 = v1.x + 1e-4
    y2 = np.sqrt(ctx1.curve.f(x2))
    if abs(y2 - v1.y) > abs(y2 + v1.y):
        y2 = -y2
    r = toda2d_residual(ctx1, v1, CurvePoint(x2, y2), 0, 0.01, 0.02, rng=rng)
    assert r < 1e-4


def test_flaschka_double_path(ctx1, ctx2):
    rng = np.random.default_rng(9)
    for ctx in (ctx1, ctx2):
        frame = conditioned_frame(ctx, rng)
        for k in (-1, 0, 1):
            a_sigma, _ = flaschka(frame, k, 0.03)
            a_wp = flaschka_wp_path(frame, k, 0.03)
            assert abs(a_sigma - a_wp) < 1e-7 * max(1.0, abs(a_sigma))


def test_flaschka_genus1_closed_forms(ctx1):
    # a and b reduce to coordinate differences through the step point 2*v1
    rng = np.random.default_rng(10)
    frame = conditioned_frame(ctx1, rng)
    from sigmatoda.addition import point_multiples

    double = point_multiples(ctx1.curve, frame.v1, 2)[1]
    assert len(double) == 1
    xc, yc = double[0].x, double[0].y
    assert V_c(frame) == pytest.approx(xc, rel=1e-9)
    t0 = 0.017
    for k in (0, 1):
        a_k, b_k = flaschka(frame, k, t0)
        u_next = site_u(frame, k + 1, t0)
        u_here = site_u(frame, k, t0)
        x_next = wp(ctx1, 1, 1, u_next)
        assert a_k == pytest.approx(xc - x_next, rel=1e-8)
        # b_k = (y(u_k) - y_c) / (x(u_k) - x_c) for one involution choice of y_c
        h = 1e-5
        d1 = (wp(ctx1, 1, 1, u_here + h) - wp(ctx1, 1, 1, u_here - h)) / (2 * h)
        d2 = (wp(ctx1, 1, 1, u_here + h / 2) - wp(ctx1, 1, 1, u_here - h / 2)) / h
        y_here = (4 * d2 - d1) / 6
        x_here = wp(ctx1, 1, 1, u_here)
        candidates = [(y_here - s * yc) / (x_here - xc) for s in (1, -1)]
        assert min(abs(b_k - c) for c in candidates) < 1e-6 * max(1.0, abs(b_k))


def test_flaschka_equations_of_motion(ctx1, ctx2):
    rng = np.random.default_rng(11)
    frame1 = conditioned_frame(ctx1, rng)
    assert flaschka_ode_residual(frame1, 3, 0.02) < 1e-6
    frame2 = conditioned_frame(ctx2, rng)
    assert flaschka_ode_residual(frame2, 2, 0.02) < 1e-5


def test_ode_residual_richardson_floor(ctx1):
    rng = np.random.default_rng(12)
    frame = conditioned_frame(ctx1, rng)
    assert flaschka_ode_residual(frame, 2, 0.02, fd_step=1e-3) < 1e-8


def test_lax_and_invariants_random_state():
    rng = np.random.default_rng(13)
    a = rng.normal(size=3) + 0.2
    b = rng.normal(size=3)
    from sigmatoda.toda import TodaState

    state = TodaState(a.astype(complex), b.astype(complex))
    assert lax_det_residual(state) < 1e-10
    data = char_poly(state)
    assert data.invariants[0] == pytest.approx(np.sum(b), rel=1e-12)
    i2 = sum(b[i] * b[j] for i in range(3) for j in range(i)) - np.sum(a)
    assert data.invariants[1] == pytest.approx(i2, rel=1e-12)
    assert data.invariants[-1] == pytest.approx(np.prod(a), rel=1e-12)
    assert data.p_coeffs[-1] == pytest.approx((-1.0) ** 3)
    res, roots = spectral_morphism(state)
    assert res < 1e-9
    assert roots.size == 6
    mat = lax_matrix(state, 1.3 + 0.2j)
    assert mat.shape == (3, 3)


def test_flaschka_independent_of_truncation_policy(ctx2):
    # the variables are curve data; doubling the theta radius must not move them
    import dataclasses

    rng = np.random.default_rng(15)
    frame = conditioned_frame(ctx2, rng)
    wide_ctx = dataclasses.replace(ctx2, trunc_radius=2 * ctx2.trunc_radius)
    wide = toda_frame(wide_ctx, frame.v1, u0=frame.u0)
    for k in (0, 1):
        a0, b0 = flaschka(frame, k, 0.02)
        a1, b1 = flaschka(wide, k, 0.02)
        assert abs(a0 - a1) < 1e-7 * max(1.0, abs(a0))
        assert abs(b0 - b1) < 1e-7 * max(1.0, abs(b0))


def test_invariant_drift_negative_control(ctx1):
    # a frame whose step is not torsion has no N-periodic wraparound
    rng = np.random.default_rng(14)
    frame = conditioned_frame(ctx1, rng)
    drift = invariant_drift(frame, 3, [0.0, 0.1, 0.2])
    assert drift > 1e-4

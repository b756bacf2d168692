import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holmgren import fundsol as fs
from holmgren import hyperfun as hf
from holmgren.fundsol import ProblemConfig
from holmgren.verify import apply_operator_fd_batch, residual_scan


CONFIGS = [
    ProblemConfig(2, 1, 0, (0.3,)),
    ProblemConfig(2, 1, 1, (0.3,)),
    ProblemConfig(2, 2, 1, (0.2, 0.35)),
    ProblemConfig(3, 1, 0, (0.25,)),
    ProblemConfig(3, 1, 1, (0.25,)),
    ProblemConfig(3, 2, 0, (0.15, 0.4)),
    ProblemConfig(3, 2, 1, (0.15, 0.4)),
    ProblemConfig(3, 2, 2, (0.15, 0.4)),
    ProblemConfig(3, 3, 2, (0.1, 0.2, 0.3)),
]
IDS = [f"m{c.m}n{c.n}k{c.k}" for c in CONFIGS]


def _pair(cfg):
    x = np.array([0.45, 0.2, 0.1][: cfg.m])
    xi = np.array([0.3, 0.35, 0.25][: cfg.m])
    if cfg.m == 2:
        x, xi = np.array([0.45, 0.2]), np.array([0.3, 0.35])
    return x, xi


# ---------------------------------------------------------------------------
# configuration and constants


@pytest.mark.parametrize("args", [
    (1, 1, 0, (0.2,)), (2, 3, 0, (0.2, 0.2, 0.2)), (2, 1, 2, (0.2,)),
    (2, 2, 0, (0.2,)), (2, 1, 0, (0.5,)), (2, 1, 0, (0.0,)), (2, 1, 0, (0.2,), -1.0),
])
def test_config_rejects_invalid(args):
    with pytest.raises(ValueError):
        ProblemConfig(*args)


def test_beta_gamma_closed_form():
    a = 0.25
    cfg = ProblemConfig(3, 1, 0, (a,))
    beta = 0.5 + a
    assert fs.beta_k(cfg) == pytest.approx(beta)
    g = 2 ** (2 * beta - 3) * math.gamma(beta) / math.pi ** 1.5 * math.gamma(a) / math.gamma(2 * a)
    assert fs.gamma_k(cfg) == pytest.approx(g, rel=1e-13)
    cfg1 = ProblemConfig(3, 1, 1, (a,))
    beta1 = 1.5 - a
    assert fs.beta_k(cfg1) == pytest.approx(beta1)
    g1 = (2 ** (2 * beta1 - 3) * math.gamma(beta1) / math.pi ** 1.5
          * math.gamma(1 - a) / math.gamma(2 - 2 * a))
    assert fs.gamma_k(cfg1) == pytest.approx(g1, rel=1e-13)


def test_kernel_params_layout():
    cfg = ProblemConfig(3, 3, 2, (0.1, 0.2, 0.3))
    p = fs.kernel_params(cfg)
    assert p.b == pytest.approx((0.9, 0.8, 0.3))
    assert p.c == pytest.approx((1.8, 1.6, 0.6))
    assert fs.kernel_params(cfg, 1).a == pytest.approx(p.a + 1)
    assert fs.reduced_params(cfg, 1).b == pytest.approx((0.9, 0.3))


def test_image_exponent():
    assert fs.image_exponent(ProblemConfig(3, 2, 1, (0.1, 0.2))) == pytest.approx(1.6)
    assert fs.image_exponent(ProblemConfig(2, 1, 0, (0.3,))) == pytest.approx(0.6)


# ---------------------------------------------------------------------------
# geometry


def test_geometry_arithmetic_example():
    cfg = ProblemConfig(2, 1, 0, (0.2,), R=3.0)
    g = fs.geometry(cfg, [1.0, 1.0], [2.0, 1.0])
    assert g.r2 == pytest.approx(1.0)
    assert g.ri2[0] == pytest.approx(9.0)
    assert g.theta[0] == pytest.approx(-8.0)


def test_geometry_zero_singular_coordinate():
    cfg = ProblemConfig(3, 2, 0, (0.2, 0.3))
    g = fs.geometry(cfg, [0.0, 0.3, 0.1], [0.4, 0.2, 0.3])
    assert g.theta[0] == 0.0
    assert g.ri2[0] == pytest.approx(g.r2)


def test_geometry_xi_on_sphere():
    cfg = ProblemConfig(3, 2, 0, (0.2, 0.3))
    xi = np.array([0.6, 0.0, 0.8])
    g = fs.geometry(cfg, [0.2, 0.3, 0.1], xi)
    assert np.allclose(g.xi_bar, xi)
    assert g.r2_bar == pytest.approx(g.r2)
    assert np.allclose(g.theta_bar, g.theta)


def test_geometry_errors():
    cfg = ProblemConfig(2, 1, 0, (0.2,))
    with pytest.raises(fs.SingularGeometryError):
        fs.geometry(cfg, [0.3, 0.1], [0.3, 0.1])
    with pytest.raises(fs.SingularGeometryError):
        fs.geometry(cfg, [0.3, 0.1], [0.0, 0.0])
    with pytest.raises(hf.DomainError):
        fs.q_k(cfg, [-0.3, 0.1], [0.2, 0.2])


def test_invert_point_examples():
    xb, rho = fs.invert_point([0.5, 0.0, 0.0], 1.0)
    assert rho == 0.5 and np.allclose(xb, [2.0, 0.0, 0.0])
    xi = np.array([0.6, 0.8])
    assert np.allclose(fs.invert_point(xi, 1.0)[0], xi)
    with pytest.raises(fs.SingularGeometryError):
        fs.invert_point([0.0, 0.0], 1.0)


@given(st.lists(st.floats(0.05, 2.0), min_size=2, max_size=4), st.floats(0.5, 3.0))
def test_double_inversion(v, R):
    xi = np.array(v)
    back, _ = fs.invert_point(fs.invert_point(xi, R)[0], R)
    assert np.allclose(back, xi, rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3),
       st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3))
def test_theta_nonpositive_in_orthant(x, xi):
    cfg = ProblemConfig(3, 3, 1, (0.1, 0.2, 0.3))
    x, xi = np.array(x), np.array(xi)
    if np.linalg.norm(x - xi) < 1e-6:
        return
    g = fs.geometry(cfg, x, xi)
    assert np.all(g.theta <= 0) and np.all(g.theta_bar <= 0)


def test_face_distance_forms_coincide():
    cfg = ProblemConfig(3, 2, 1, (0.2, 0.3), R=1.5)
    xi = np.array([0.3, 0.4, 0.5])
    xb, rho = fs.invert_point(xi, cfg.R)
    for x in ([0.0, 0.3, 0.2], [0.0, 0.7, -0.4]):
        f = fs.face_geometry(cfg, 0, x, xi)
        x = np.array(x)
        scaled = (rho / cfg.R) ** 2 * float((x - xb) @ (x - xb))
        assert f.r0i2_bar == pytest.approx(scaled, rel=1e-13)


# ---------------------------------------------------------------------------
# fundamental solution


def _q_one_variable(cfg, x, xi):
    """Independent evaluation for n = 1 through mpmath's 2F1."""
    a = cfg.alpha[0]
    beta = fs.beta_k(cfg)
    r2 = float(np.sum((np.asarray(x) - xi) ** 2))
    theta = -4 * x[0] * xi[0] / r2
    if cfg.k == 0:
        F = mp.hyp2f1(beta, a, 2 * a, theta)
        pre = 1.0
    else:
        F = mp.hyp2f1(beta, 1 - a, 2 - 2 * a, theta)
        pre = (x[0] * xi[0]) ** (1 - 2 * a)
    return fs.gamma_k(cfg) * pre * r2 ** (-beta) * float(F)


def test_q_spot_value_m3n1k0():
    cfg = ProblemConfig(3, 1, 0, (0.25,))
    x, xi = [0.5, 0.2, 0.1], [0.6, 0.1, 0.3]
    assert fs.q_k(cfg, x, xi) == pytest.approx(_q_one_variable(cfg, x, xi), rel=1e-10)


@pytest.mark.parametrize("k", [0, 1])
@pytest.mark.parametrize("m", [2, 3])
def test_q_matches_hypergeometric_oracle(m, k):
    cfg = ProblemConfig(m, 1, k, (0.35,))
    rng = np.random.default_rng(m + 10 * k)
    for _ in range(5):
        x = rng.uniform(0.05, 0.6, m)
        xi = rng.uniform(0.05, 0.6, m)
        assert fs.q_k(cfg, x, xi) == pytest.approx(_q_one_variable(cfg, x, xi), rel=1e-10)


def test_q_two_variables_against_decomposition():
    cfg = ProblemConfig(3, 2, 1, (0.15, 0.4))
    x, xi = np.array([0.45, 0.2, 0.1]), np.array([0.3, 0.35, 0.25])
    g = fs.geometry(cfg, x, xi)
    F = hf.fa_decompose_lemma1(fs.kernel_params(cfg), g.theta, 80, 1e-15).value
    ref = fs.gamma_k(cfg) * (x[0] * xi[0]) ** (1 - 0.3) * g.r2 ** (-fs.beta_k(cfg)) * F
    assert fs.q_k(cfg, x, xi) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("cfg", [c for c in CONFIGS if c.k > 0], ids=[i for c, i in zip(CONFIGS, IDS) if c.k > 0])
def test_q_vanishes_on_dirichlet_face(cfg):
    x, xi = _pair(cfg)
    x[0] = 0.0
    assert fs.q_k(cfg, x, xi) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.02, 0.7), min_size=3, max_size=3),
       st.lists(st.floats(0.02, 0.7), min_size=3, max_size=3),
       st.integers(0, 2))
def test_q_symmetry(x, xi, k):
    cfg = ProblemConfig(3, 2, k, (0.15, 0.4))
    x, xi = np.array(x), np.array(xi)
    if np.linalg.norm(x - xi) < 1e-2:
        return
    q1, q2 = fs.q_k(cfg, x, xi), fs.q_k(cfg, xi, x)
    assert q1 == pytest.approx(q2, rel=1e-10)


def test_q_singular_at_coincidence():
    cfg = ProblemConfig(2, 1, 0, (0.2,))
    with pytest.raises(fs.SingularGeometryError):
        fs.q_k(cfg, [0.3, 0.2], [0.3, 0.2])


@pytest.mark.parametrize("cfg", CONFIGS, ids=IDS)
def test_grad_matches_finite_differences(cfg):
    x, xi = _pair(cfg)
    g = fs.grad_q_k(cfg, x, xi)
    h = 1e-5
    for i in range(cfg.m):
        e = np.zeros(cfg.m)
        e[i] = h
        fd = (fs.q_k(cfg, x + e, xi) - fs.q_k(cfg, x - e, xi)) / (2 * h)
        assert g[i] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_grad_odd_in_free_coordinate():
    cfg = ProblemConfig(3, 1, 1, (0.3,))
    xi = np.array([0.3, 0.2, 0.4])
    x1 = np.array([0.25, 0.1, 0.4 + 0.15])
    x2 = np.array([0.25, 0.1, 0.4 - 0.15])
    assert fs.grad_q_k(cfg, x1, xi)[2] == pytest.approx(-fs.grad_q_k(cfg, x2, xi)[2], rel=1e-12)


@pytest.mark.parametrize("cfg", CONFIGS, ids=IDS)
def test_dq_dn_chain_rule(cfg):
    _, xi = _pair(cfg)
    x = np.abs(np.array([0.6, 0.5, 0.4][: cfg.m]))
    x *= cfg.R / np.linalg.norm(x)
    assembled = float(fs.grad_q_k(cfg, x, xi) @ x) / cfg.R
    assert fs.dq_dn(cfg, x, xi) == pytest.approx(assembled, rel=1e-9)


def test_dq_dn_radial_difference():
    cfg = ProblemConfig(3, 1, 1, (0.3,))
    xi = np.array([0.3, 0.2, 0.4])
    x = np.array([0.6, 0.48, 0.64])
    h = 1e-5
    fd = (fs.q_k(cfg, x * (1 + h), xi) - fs.q_k(cfg, x * (1 - h), xi)) / (2 * h)
    assert fs.dq_dn(cfg, x, xi) == pytest.approx(fd, rel=1e-7)
    with pytest.raises(hf.DomainError):
        fs.dq_dn(cfg, x * 0.9, xi)


@pytest.mark.parametrize("cfg", CONFIGS, ids=IDS)
def test_q_residual_second_order(cfg):
    _, xi = _pair(cfg)
    pts = np.array([[0.5, 0.3, 0.35][: cfg.m], [0.6, 0.55, 0.1][: cfg.m]])
    rep = residual_scan(cfg, lambda X: fs.q_k_batch(cfg, X, xi), pts, 1e-2)
    ratio = np.abs(rep.residuals) / np.abs(rep.residuals_half)
    assert np.all((ratio > 3.5) & (ratio < 4.5))
    assert residual_scan(cfg, lambda X: fs.q_k_batch(cfg, X, xi), pts, 1e-3).max_residual < 1e-3


# ---------------------------------------------------------------------------
# Green's function


@pytest.mark.parametrize("cfg", CONFIGS, ids=IDS)
def test_green_vanishes_on_sphere(cfg):
    _, xi = _pair(cfg)
    rng = np.random.default_rng(3)
    S = np.abs(rng.normal(size=(20, cfg.m)))
    S[:, cfg.n:] *= rng.choice([-1, 1], size=(20, cfg.m - cfg.n))
    S *= cfg.R / np.linalg.norm(S, axis=1, keepdims=True)
    assert np.max(np.abs(fs.green_G_k_batch(cfg, S, xi))) < 1e-10


def test_green_vanishes_on_dirichlet_face():
    cfg = ProblemConfig(3, 2, 1, (0.15, 0.4))
    assert fs.green_G_k(cfg, [0.0, 0.3, 0.2], [0.3, 0.35, 0.25]) == 0.0


def test_green_spot_value_m3n1k1():
    cfg = ProblemConfig(3, 1, 1, (0.3,))
    x, xi = np.array([0.2, 0.3, 0.1]), np.array([0.4, 0.1, 0.3])
    rho = float(np.linalg.norm(xi))
    xb = xi / rho ** 2
    ref = _q_one_variable(cfg, x, xi) - rho ** -(1 + 0.6) * _q_one_variable(cfg, x, xb)
    assert fs.green_G_k(cfg, x, xi) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("cfg", CONFIGS, ids=IDS)
def test_green_residual(cfg):
    _, xi = _pair(cfg)
    pts = np.array([[0.5, 0.3, 0.45][: cfg.m]])
    r = apply_operator_fd_batch(cfg, lambda X: fs.green_G_k_batch(cfg, X, xi), pts, 1e-3)
    assert abs(r[0]) < 1e-3


@pytest.mark.parametrize("cfg", CONFIGS, ids=IDS)
def test_dG_dn_closed_form(cfg):
    _, xi = _pair(cfg)
    rng = np.random.default_rng(5)
    for _ in range(5):
        x = np.abs(rng.normal(size=cfg.m))
        x *= cfg.R / np.linalg.norm(x)
        assembled = float(fs.grad_green_batch(cfg, x, xi)[0] @ x) / cfg.R
        closed = fs.dG_dn_sphere(cfg, x, xi)
        assert closed == pytest.approx(assembled, rel=1e-8)
        F1 = hf.fa(fs.kernel_params(cfg, 1), fs.geometry(cfg, x, xi).theta).value
        if F1 > 0:
            assert closed < 0


def test_dG_dn_vanishes_as_xi_reaches_sphere():
    cfg = ProblemConfig(2, 1, 0, (0.3,))
    x = np.array([0.6, 0.8])
    d = np.array([0.8, -0.6])
    vals = [abs(fs.dG_dn_sphere(cfg, x, rho * d)) for rho in (0.9, 0.99, 0.999)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-2 * vals[0]


def test_dG_dn_requires_sphere_point():
    cfg = ProblemConfig(2, 1, 0, (0.3,))
    with pytest.raises(hf.DomainError):
        fs.dG_dn_sphere(cfg, [0.3, 0.3], [0.2, 0.2])
    with pytest.raises(hf.DomainError):
        fs.dG_dn_sphere(cfg, [0.6, 0.8], [0.8, 0.8])


# ---------------------------------------------------------------------------
# face kernels


def _fd_tau(cfg, i, x, xi):
    out = []
    for t in (1e-3, 1e-4):
        y = np.array(x, float)
        y[i] = t
        h = t / 100
        e = np.zeros(cfg.m)
        e[i] = h
        d = (fs.green_G_k(cfg, y + e, xi) - fs.green_G_k(cfg, y - e, xi)) / (2 * h)
        a = np.asarray(cfg.alpha)
        w = np.prod(np.delete(y[: cfg.n], i) ** np.delete(2 * a, i))
        out.append(w * t ** (2 * a[i]) * d)
    return out


@pytest.mark.parametrize("cfg", [c for c in CONFIGS if c.k > 0], ids=[i for c, i in zip(CONFIGS, IDS) if c.k > 0])
def test_tau_kernel_limit(cfg):
    x, xi = _pair(cfg)
    for i in range(cfg.k):
        y = x.copy()
        y[i] = 0.0
        K = fs.face_kernel_batch(cfg, i, y, xi)[0]
        fd = _fd_tau(cfg, i, y, xi)
        assert K == pytest.approx(fd[-1], rel=1e-3)
        # the two samples approach the kernel
        assert abs(fd[1] - K) < abs(fd[0] - K) + 1e-12


@pytest.mark.parametrize("cfg", [c for c in CONFIGS if c.k < c.n], ids=[i for c, i in zip(CONFIGS, IDS) if c.k < c.n])
def test_nu_kernel_limit(cfg):
    x, xi = _pair(cfg)
    for i in range(cfg.k, cfg.n):
        y = x.copy()
        y[i] = 1e-4
        K = fs.face_kernel_batch(cfg, i, y, xi)[0]
        assert K == pytest.approx(fs.green_G_k(cfg, y, xi), rel=1e-3)


def test_tau_kernel_pure_power_law():
    a = 0.3
    cfg = ProblemConfig(2, 1, 1, (a,))
    x, xi = np.array([0.0, 0.2]), np.array([0.4, 0.3])
    beta = fs.beta_k(cfg)
    r0 = float(np.sum((x - xi) ** 2))
    rho2 = float(xi @ xi)
    rb = 1 - 2 * float(x @ xi) + float(x @ x) * rho2
    ref = (1 - 2 * a) * fs.gamma_k(cfg) * xi[0] ** (1 - 2 * a) * (r0 ** -beta - rb ** -beta)
    assert fs.face_kernel_batch(cfg, 0, x, xi)[0] == pytest.approx(ref, rel=1e-13)


def test_nu_kernel_two_term_difference():
    cfg = ProblemConfig(2, 1, 0, (0.3,))
    x, xi = np.array([0.0, -0.5]), np.array([0.4, 0.3])
    beta = fs.beta_k(cfg)
    r0 = float(np.sum((x - xi) ** 2))
    rb = 1 - 2 * float(x @ xi) + float(x @ x) * float(xi @ xi)
    ref = fs.gamma_k(cfg) * (r0 ** -beta - rb ** -beta)
    assert fs.face_kernel_batch(cfg, 0, x, xi)[0] == pytest.approx(ref, rel=1e-13)


def test_nu_kernel_decays_toward_sphere():
    cfg = ProblemConfig(3, 2, 0, (0.15, 0.4))
    x = np.array([0.0, 0.2, -0.3])
    d = np.array([0.5, 0.5, 0.7071067811865476])
    vals = [abs(fs.face_kernel_batch(cfg, 0, x, r * d)[0]) for r in (0.9, 0.99, 0.999)]
    assert vals[0] > vals[1] > vals[2]


def test_face_kernel_zero_with_vanishing_dirichlet_coordinate():
    cfg = ProblemConfig(3, 3, 2, (0.1, 0.2, 0.3))
    x = np.array([0.0, 0.0, 0.3])
    assert fs.face_kernel_batch(cfg, 0, x, [0.3, 0.2, 0.1])[0] == 0.0


def test_face_kernel_coincident_point():
    cfg = ProblemConfig(2, 1, 0, (0.3,))
    with pytest.raises(fs.SingularGeometryError):
        fs.face_kernel_batch(cfg, 0, [0.0, 0.3], [0.0, 0.3])

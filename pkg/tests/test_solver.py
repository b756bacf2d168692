import math

import numpy as np
import pytest

from holmgren import fundsol as fs
from holmgren import solver as sv
from holmgren.fundsol import ProblemConfig
from holmgren.verify import interior_lattice, residual_scan


CASES = [
    ProblemConfig(2, 1, 0, (0.3,)),
    ProblemConfig(2, 1, 1, (0.3,)),
    ProblemConfig(2, 2, 1, (0.2, 0.35)),
    ProblemConfig(3, 1, 0, (0.25,)),
    ProblemConfig(3, 2, 1, (0.15, 0.3)),
    ProblemConfig(3, 2, 2, (0.15, 0.3)),
]
IDS = [f"m{c.m}n{c.n}k{c.k}" for c in CASES]


def _points(cfg):
    base = [np.array([0.3, 0.35, 0.25]), np.array([0.45, 0.2, -0.3])]
    out = []
    for b in base:
        p = b[: cfg.m].copy()
        p[: cfg.n] = np.abs(p[: cfg.n])
        out.append(p)
    return out


# ---------------------------------------------------------------------------
# data and bookkeeping


def test_boundary_data_validation():
    cfg = ProblemConfig(3, 2, 1, (0.2, 0.3))
    one = lambda X: np.ones(len(X))
    with pytest.raises(ValueError, match="tau"):
        sv.BoundaryData([], [one], one).validate(cfg)
    with pytest.raises(ValueError, match="nu"):
        sv.BoundaryData([one], [], one).validate(cfg)
    with pytest.raises(ValueError, match="phi"):
        sv.BoundaryData([one], [one], None).validate(cfg)
    sv.BoundaryData([one], [one], one).validate(cfg)


def test_combine_is_pointwise_linear():
    cfg = ProblemConfig(3, 2, 1, (0.2, 0.3))
    d1, u1 = sv.make_family(cfg, "constant", value=2.0)
    d2, u2 = sv.make_family(cfg, "coordinate")
    d = d1.combine(d2, 0.5, -3.0)
    X = np.array([[0.1, 0.2, 0.3], [0.0, 0.4, -0.2]])
    assert np.allclose(d.phi(X), 0.5 * u1(X) - 3.0 * u2(X))
    assert np.allclose(d.tau[0](X), 0.5 * u1(X) - 3.0 * u2(X))
    assert np.allclose(d.nu[0](X), 0.0)


def test_margin_refusals():
    cfg = ProblemConfig(3, 2, 1, (0.2, 0.3))
    data, _ = sv.make_family(cfg, "constant")
    with pytest.raises(sv.MarginError, match="exceeds"):
        sv.solve(cfg, data, [0.6, 0.6, 0.5])
    with pytest.raises(sv.MarginError, match="xi_2"):
        sv.solve(cfg, data, [0.3, 0.01, 0.2])
    with pytest.raises(ValueError, match="coordinates"):
        sv.check_margin(cfg, [0.3, 0.3])
    # points exactly on the margin are accepted
    d = np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
    sv.check_margin(cfg, 0.95 * d)
    sv.check_margin(cfg, [0.05, 0.3, 0.2])
    sv.check_margin(cfg, [0.02, 0.3, 0.2], delta=0.01)


def test_family_registry():
    cfg = ProblemConfig(3, 2, 1, (0.2, 0.3))
    assert set(sv.FAMILIES) == {"constant", "coordinate", "power", "quadratic", "polynomial"}
    with pytest.raises(ValueError, match="unknown boundary family"):
        sv.make_family(cfg, "cubic")
    with pytest.raises(ValueError):
        sv.make_family(cfg, "coordinate", index=1)
    with pytest.raises(ValueError):
        sv.make_family(cfg, "power", index=3)
    with pytest.raises(ValueError):
        sv.make_family(cfg, "quadratic", i=2, j=2)


def test_power_family_data():
    cfg = ProblemConfig(3, 2, 0, (0.2, 0.3))
    data, u = sv.make_family(cfg, "power", index=2)
    X = np.array([[0.0, 0.3, 0.1]])
    assert data.nu[1](X)[0] == pytest.approx(0.4)
    assert data.nu[0](X)[0] == 0.0
    assert u(np.array([[0.1, 0.5, 0.2]]))[0] == pytest.approx(0.5 ** 0.4)


def test_polynomial_family_matches_terms():
    cfg = ProblemConfig(2, 1, 0, (0.25,))
    # x_1^2 / (1 + 2a) - x_2^2 solves the equation
    data, u = sv.make_family(cfg, "polynomial", terms=[[1 / 1.5, [2, 0]], [-1.0, [0, 2]]])
    X = np.array([[0.3, 0.4]])
    assert u(X)[0] == pytest.approx(0.09 / 1.5 - 0.16)
    assert sv.solve(cfg, data, [0.3, 0.4]) == pytest.approx(u(X)[0], abs=1e-6)


def test_compatibility_check():
    cfg = ProblemConfig(3, 3, 2, (0.1, 0.2, 0.3))
    data, _ = sv.make_family(cfg, "quadratic", i=1, j=3)
    assert sv.check_compatibility(cfg, data)
    bad = sv.BoundaryData([lambda X: np.ones(len(X))] * 2, data.nu, data.phi)
    assert not sv.check_compatibility(cfg, bad)


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv(sv.THREADS_ENV, "3")
    assert sv.thread_count() == 3
    monkeypatch.delenv(sv.THREADS_ENV)
    assert sv.thread_count() >= 1


def test_kernel_index_validation():
    cfg = ProblemConfig(3, 2, 1, (0.2, 0.3))
    with pytest.raises(ValueError):
        sv.tau_kernel(cfg, 2, [0.2, 0.0, 0.1], [0.3, 0.3, 0.3])
    with pytest.raises(ValueError):
        sv.nu_kernel(cfg, 1, [0.0, 0.2, 0.1], [0.3, 0.3, 0.3])
    assert math.isfinite(sv.tau_kernel(cfg, 1, [0.0, 0.2, 0.1], [0.3, 0.3, 0.3]))
    assert math.isfinite(sv.nu_kernel(cfg, 2, [0.2, 0.0, 0.1], [0.3, 0.3, 0.3]))


# ---------------------------------------------------------------------------
# Poisson kernel


@pytest.mark.parametrize("cfg", CASES, ids=IDS)
def test_poisson_kernel_matches_normal_derivative(cfg):
    xi = _points(cfg)[0]
    x = np.abs(np.array([0.6, 0.5, 0.4][: cfg.m]))
    x /= np.linalg.norm(x)
    P = sv.poisson_kernel(cfg, x, xi)
    rhs = -fs.weight(cfg, x)[0] * fs.dG_dn_sphere(cfg, x, xi)
    assert P * 2 * fs.beta_k(cfg) * fs.gamma_k(cfg) == pytest.approx(rhs, rel=1e-10)


def test_poisson_kernel_positive_on_half_circle():
    cfg = ProblemConfig(2, 1, 0, (0.3,))
    t = np.linspace(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3, 400)
    X = np.stack([np.cos(t), np.sin(t)], axis=1)
    for xi in ([0.3, 0.2], [0.1, -0.6], [0.7, 0.5]):
        assert np.all(sv.poisson_kernel_batch(cfg, X, xi) > 0)


def test_poisson_kernel_vanishes_as_xi_reaches_sphere():
    cfg = ProblemConfig(3, 1, 0, (0.25,))
    x = np.array([0.36, 0.48, 0.8])
    d = np.array([0.6, 0.8, 0.0])
    vals = [sv.poisson_kernel(cfg, x, r * d) for r in (0.9, 0.99, 0.999)]
    assert vals[0] > vals[1] > vals[2] > 0
    with pytest.raises(ValueError):
        sv.poisson_kernel(cfg, [0.1, 0.1, 0.1], [0.2, 0.2, 0.2])


def test_poisson_kernel_unit_mass():
    # int_S 2 beta gamma P dS reproduces the constant solution
    cfg = ProblemConfig(2, 1, 0, (0.3,))
    from holmgren.geomquad import integrate, sphere_grid
    xi = np.array([0.4, 0.1])
    g = sphere_grid(cfg, 32, xi)
    c = 2 * fs.beta_k(cfg) * fs.gamma_k(cfg)
    assert c * integrate(g, lambda X: sv.poisson_kernel_batch(cfg, X, xi)) == pytest.approx(1.0, abs=1e-8)


# ---------------------------------------------------------------------------
# manufactured solutions


MANUFACTURED = [(c, f) for c in CASES for f in ("constant", "coordinate", "power")
                if not (f == "coordinate" and c.m == c.n)]


@pytest.mark.parametrize("cfg,family", MANUFACTURED,
                         ids=[f"m{c.m}n{c.n}k{c.k}-{f}" for c, f in MANUFACTURED])
def test_manufactured_solutions(cfg, family):
    params = {"index": cfg.n} if family == "power" else {}
    data, u = sv.make_family(cfg, family, **params)
    for p in _points(cfg):
        assert sv.solve(cfg, data, p) == pytest.approx(u(p)[0], abs=1e-3)


def test_manufactured_full_orthant():
    cfg = ProblemConfig(3, 3, 1, (0.1, 0.2, 0.3))
    for name in ("constant", "power"):
        data, u = sv.make_family(cfg, name)
        p = np.array([0.3, 0.35, 0.25])
        assert sv.solve(cfg, data, p) == pytest.approx(u(p)[0], abs=1e-3)


def test_focused_grid_improves_on_plain():
    cfg = ProblemConfig(2, 2, 1, (0.2, 0.35))
    data, u = sv.make_family(cfg, "quadratic", i=1, j=2)
    p = np.array([0.1, 0.3])
    exact = u(p)[0]
    focused = abs(sv.solve(cfg, data, p) - exact)
    plain = abs(sv.solve(cfg, data, p, focused=False) - exact)
    assert focused < 1e-6
    assert focused <= plain


def test_level_refinement_converges():
    cfg = ProblemConfig(2, 1, 1, (0.3,))
    data, u = sv.make_family(cfg, "quadratic", i=1, j=2)
    p = np.array([0.3, 0.4])
    errs = [abs(sv.solve(cfg, data, p, levels=L) - u(p)[0]) for L in (6, 12)]
    assert errs[1] < errs[0]


def test_linearity():
    rng = np.random.default_rng(7)
    for cfg in (CASES[2], CASES[4]):
        d1, _ = sv.make_family(cfg, "constant", value=rng.normal())
        d2, _ = sv.make_family(cfg, "quadratic", i=1, j=cfg.m)
        s, t = rng.normal(size=2)
        xi = _points(cfg)[0]
        comb = sv.solve(cfg, d1.combine(d2, s, t), xi, levels=10)
        sep = s * sv.solve(cfg, d1, xi, levels=10) + t * sv.solve(cfg, d2, xi, levels=10)
        assert comb == pytest.approx(sep, rel=1e-10)


def test_k_zero_and_k_n_use_empty_sums():
    cfg0 = ProblemConfig(2, 1, 0, (0.3,))
    data, _ = sv.make_family(cfg0, "constant")
    assert set(sv.solve_terms(cfg0, data, [0.3, 0.2])) == {"D1", "S"}
    cfg1 = ProblemConfig(2, 1, 1, (0.3,))
    data, _ = sv.make_family(cfg1, "constant")
    terms = sv.solve_terms(cfg1, data, [0.3, 0.2])
    assert set(terms) == {"D1", "S"} and terms["D1"] != 0


def test_kernel_failure_is_identified():
    cfg = ProblemConfig(2, 1, 0, (0.3,))
    data = sv.BoundaryData([], [lambda X: np.full(len(X), np.nan)], lambda X: np.ones(len(X)))
    with pytest.raises(FloatingPointError, match="D1"):
        sv.solve(cfg, data, [0.3, 0.2])


# ---------------------------------------------------------------------------
# solve_grid


def test_solve_grid_bookkeeping():
    cfg = ProblemConfig(2, 2, 1, (0.2, 0.35))
    data, _ = sv.make_family(cfg, "quadratic", i=1, j=2)
    pts = [[0.3, 0.3], [0.2, 0.5], [0.5, 0.1]]
    rep = sv.solve_grid(cfg, data, pts, threads=2)
    assert rep.ok and len(rep.values) == 3
    for v, c in zip(rep.values, rep.contributions):
        assert abs(v - math.fsum(c.values())) <= 1e-12 * max(1.0, abs(v))
    assert rep.values[1] == pytest.approx(sv.solve(cfg, data, pts[1]), rel=1e-14)
    assert rep.levels == {"sphere": 24, "face": 24}


def test_solve_grid_empty_and_failures():
    cfg = ProblemConfig(2, 1, 0, (0.3,))
    data, _ = sv.make_family(cfg, "constant")
    rep = sv.solve_grid(cfg, data, [])
    assert rep.values == [] and rep.ok
    rep = sv.solve_grid(cfg, data, [[0.3, 0.2], [0.01, 0.2], [0.3, 0.1]], threads=1)
    assert [i for i, _ in rep.failures] == [1]
    assert "MarginError" in rep.failures[0][1]
    assert math.isnan(rep.values[1]) and math.isfinite(rep.values[2])


# ---------------------------------------------------------------------------
# boundary behaviour of the solution


TREND_CASES = [ProblemConfig(2, 2, 1, (0.2, 0.35)), ProblemConfig(3, 2, 1, (0.15, 0.3))]


@pytest.mark.parametrize("cfg", TREND_CASES, ids=["m2n2k1", "m3n2k1"])
def test_dirichlet_face_recovery_trend(cfg):
    data, u = sv.make_family(cfg, "quadratic", i=1, j=cfg.m)
    base = np.full(cfg.m, 0.35)
    errs = []
    for s in (0.2, 0.1, 0.05):
        xi = base.copy()
        xi[0] = s
        face = xi.copy()
        face[0] = 0.0
        errs.append(abs(sv.solve(cfg, data, xi) - data.tau[0](face[None, :])[0]))
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("cfg", TREND_CASES, ids=["m2n2k1", "m3n2k1"])
def test_weighted_derivative_recovery_trend(cfg):
    p = 2
    j = 1 if cfg.m == 2 else cfg.m
    data, u = sv.make_family(cfg, "quadratic", i=p, j=j)
    a = cfg.alpha[p - 1]
    base = np.full(cfg.m, 0.35)
    errs = []
    for s in (0.2, 0.1, 0.05):
        xi = base.copy()
        xi[p - 1] = s
        h = 0.2 * s
        e = np.zeros(cfg.m)
        e[p - 1] = h
        d = (sv.solve(cfg, data, xi + e, delta=0.01) - sv.solve(cfg, data, xi - e, delta=0.01)) / (2 * h)
        face = xi.copy()
        face[p - 1] = 0.0
        errs.append(abs(s ** (2 * a) * d - data.nu[p - 1 - cfg.k](face[None, :])[0]))
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("cfg", TREND_CASES, ids=["m2n2k1", "m3n2k1"])
def test_sphere_recovery_trend(cfg):
    data, u = sv.make_family(cfg, "quadratic", i=1, j=cfg.m)
    w = np.ones(cfg.m)
    w[-1] = 1.3
    w /= np.linalg.norm(w)
    target = data.phi(w[None, :] * cfg.R)[0]
    errs = [abs(sv.solve(cfg, data, r * w) - target) for r in (0.8, 0.9, 0.95)]
    assert errs[0] > errs[1] > errs[2]


def test_solution_residual_small():
    cfg = ProblemConfig(2, 1, 1, (0.3,))
    data, _ = sv.make_family(cfg, "quadratic", i=1, j=2)
    U = lambda X: np.array([sv.solve(cfg, data, x) for x in np.atleast_2d(X)])
    rep = residual_scan(cfg, U, interior_lattice(cfg, 3), 1e-3)
    assert rep.max_residual <= 1e-2


def test_solution_residual_small_3d():
    cfg = ProblemConfig(3, 2, 1, (0.15, 0.3))
    data, _ = sv.make_family(cfg, "quadratic", i=1, j=3)
    U = lambda X: np.array([sv.solve(cfg, data, x) for x in np.atleast_2d(X)])
    rep = residual_scan(cfg, U, np.array([[0.3, 0.35, 0.25]]), 1e-3)
    assert rep.max_residual <= 1e-2

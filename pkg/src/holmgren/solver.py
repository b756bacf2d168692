"""Explicit solution of the mixed problem: Dirichlet data on faces p <= k, weighted
derivative data on faces p > k and Dirichlet data on the sphere.

    u(xi) =   sum_{p<=k} int_{D_p} tau_p(x) Gt_p(x; xi) dx
            - sum_{p>k}  int_{D_p} x~^(2 alpha) nu_p(x) G_k(x_p^0; xi) dx
            + 2 beta gamma int_S phi(x) P(x; xi) dS

with ``Gt_p = x~^(2 alpha) lim x_p^(2 alpha_p) dG_k/dx_p`` and ``P`` the Poisson kernel.
Boundary data callables take an (N, m) array of points (x_p = 0 already set on
a face) and return N values.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import fundsol as fs
from .fundsol import ProblemConfig
from .geomquad import default_level, face_grid, integrate, sphere_grid

__all__ = [
    "MarginError",
    "BoundaryData",
    "SolveReport",
    "tau_kernel",
    "nu_kernel",
    "poisson_kernel",
    "poisson_kernel_batch",
    "solve",
    "solve_terms",
    "solve_grid",
    "check_margin",
    "check_compatibility",
    "data_from_exact",
    "FAMILIES",
    "make_family",
    "thread_count",
]

DEFAULT_DELTA = 0.05
THREADS_ENV = "HOLMGREN_THREADS"

Func = Callable[[np.ndarray], np.ndarray]


class MarginError(ValueError):
    """Evaluation point too close to the boundary."""


@dataclass
class BoundaryData:
    tau: list = field(default_factory=list)
    nu: list = field(default_factory=list)
    phi: Func | None = None

    def validate(self, cfg: ProblemConfig):
        if len(self.tau) != cfg.k:
            raise ValueError(f"need {cfg.k} tau functions, got {len(self.tau)}")
        if len(self.nu) != cfg.n - cfg.k:
            raise ValueError(f"need {cfg.n - cfg.k} nu functions, got {len(self.nu)}")
        if self.phi is None:
            raise ValueError("phi is missing")

    def combine(self, other: "BoundaryData", s: float = 1.0, t: float = 1.0) -> "BoundaryData":
        """Data for s*self + t*other."""
        lin = lambda f, g: (lambda X: s * np.asarray(f(X)) + t * np.asarray(g(X)))
        return BoundaryData([lin(f, g) for f, g in zip(self.tau, other.tau)],
                            [lin(f, g) for f, g in zip(self.nu, other.nu)],
                            lin(self.phi, other.phi))


@dataclass
class SolveReport:
    points: list
    values: list
    contributions: list
    levels: dict
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def thread_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# kernels


def _as_point(x):
    return np.asarray(x, float).reshape(-1)


def tau_kernel(cfg: ProblemConfig, i: int, x, xi) -> float:
    """Kernel multiplying tau_i on the Dirichlet face D_i (``i`` 1-based, i <= k)."""
    if not 1 <= i <= cfg.k:
        raise ValueError(f"tau kernel needs 1 <= i <= k={cfg.k}")
    return float(fs.face_kernel_batch(cfg, i - 1, _as_point(x), xi)[0])


def nu_kernel(cfg: ProblemConfig, i: int, x, xi) -> float:
    """Value of G_k on the face D_i (``i`` 1-based, k < i <= n)."""
    if not cfg.k < i <= cfg.n:
        raise ValueError(f"nu kernel needs k={cfg.k} < i <= n={cfg.n}")
    return float(fs.face_kernel_batch(cfg, i - 1, _as_point(x), xi)[0])


def poisson_kernel_batch(cfg: ProblemConfig, X, xi) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, float))
    xi = _as_point(xi)
    return -fs.weight(cfg, X) * fs.dG_dn_sphere_batch(cfg, X, xi) / (
        2 * fs.beta_k(cfg) * fs.gamma_k(cfg))


def poisson_kernel(cfg: ProblemConfig, x, xi) -> float:
    """x^(2a) prod_{j<=k}(x_j xi_j)^(1-2a_j) F_A(1+beta; theta) (R^2-rho^2)/(R r^(2+2beta))."""
    x = _as_point(x)
    if abs(np.linalg.norm(x) - cfg.R) > 1e-9 * cfg.R:
        raise ValueError("x must lie on the sphere")
    xi = _as_point(xi)
    if not xi @ xi < cfg.R ** 2:
        raise ValueError("xi must lie inside the ball")
    return float(poisson_kernel_batch(cfg, x, xi)[0])


# ---------------------------------------------------------------------------
# solve


def check_margin(cfg: ProblemConfig, xi, delta: float = DEFAULT_DELTA):
    xi = _as_point(xi)
    if xi.size != cfg.m:
        raise ValueError(f"point has {xi.size} coordinates, expected {cfg.m}")
    rho = float(np.linalg.norm(xi))
    R = cfg.R
    # small relative slack so points placed exactly on the margin are accepted
    if rho > (1 - delta) * R * (1 + 1e-12):
        raise MarginError(f"|xi| = {rho:.6g} exceeds (1 - delta) R = {(1 - delta) * R:.6g}")
    low = np.flatnonzero(xi[: cfg.n] < delta * R * (1 - 1e-12))
    if low.size:
        j = low[0]
        raise MarginError(f"xi_{j + 1} = {xi[j]:.6g} is below delta R = {delta * R:.6g}")


def _levels(cfg, levels) -> dict:
    d = default_level(cfg.m)
    if levels is None:
        return {"sphere": d, "face": d}
    if isinstance(levels, int):
        return {"sphere": levels, "face": levels}
    return {"sphere": int(levels.get("sphere", d)), "face": int(levels.get("face", d))}


@lru_cache(maxsize=64)
def _sphere(cfg, level):
    return sphere_grid(cfg, level)


@lru_cache(maxsize=64)
def _face(cfg, p, level):
    return face_grid(cfg, p, level)


def _face_weight(cfg, p, X):
    a = np.asarray(cfg.alpha)
    keep = [j for j in range(cfg.n) if j != p - 1]
    return np.prod(X[:, keep] ** (2 * a[keep]), axis=1)


def solve_terms(cfg: ProblemConfig, data: BoundaryData, xi, levels=None,
                delta: float = DEFAULT_DELTA, focused: bool = True) -> dict:
    """Contributions of every boundary piece to u(xi), keyed 'D1'..'Dn' and 'S'.

    ``focused`` refines each grid near the kernel peak closest to ``xi``;
    otherwise fixed grids are used.
    """
    data.validate(cfg)
    check_margin(cfg, xi, delta)
    xi = _as_point(xi)
    lv = _levels(cfg, levels)
    out = {}
    for p in range(1, cfg.n + 1):
        grid = face_grid(cfg, p, lv["face"], xi) if focused else _face(cfg, p, lv["face"])
        if p <= cfg.k:
            f = data.tau[p - 1]
            integrand = lambda X, f=f, p=p: (np.asarray(f(X), float)
                                             * fs.face_kernel_batch(cfg, p - 1, X, xi))
            out[f"D{p}"] = _integrate(grid, integrand)
        else:
            f = data.nu[p - 1 - cfg.k]
            integrand = lambda X, f=f, p=p: (_face_weight(cfg, p, X) * np.asarray(f(X), float)
                                             * fs.face_kernel_batch(cfg, p - 1, X, xi))
            out[f"D{p}"] = -_integrate(grid, integrand)
    grid = sphere_grid(cfg, lv["sphere"], xi) if focused else _sphere(cfg, lv["sphere"])
    c = 2 * fs.beta_k(cfg) * fs.gamma_k(cfg)
    out["S"] = c * _integrate(grid, lambda X: np.asarray(data.phi(X), float)
                              * poisson_kernel_batch(cfg, X, xi))
    return out


def _integrate(grid, f):
    try:
        return integrate(grid, f)
    except FloatingPointError:
        raise
    except Exception as exc:  # attach surface context
        raise RuntimeError(f"kernel evaluation failed on {grid.surface_id}: {exc}") from exc


def solve(cfg: ProblemConfig, data: BoundaryData, xi, levels=None,
          delta: float = DEFAULT_DELTA, focused: bool = True) -> float:
    """u_k(xi) from the explicit representation."""
    terms = solve_terms(cfg, data, xi, levels, delta, focused)
    return math.fsum(terms.values())


def solve_grid(cfg: ProblemConfig, data: BoundaryData, points: Sequence, levels=None,
               delta: float = DEFAULT_DELTA, threads: int | None = None,
               focused: bool = True) -> SolveReport:
    """Solve at every point; failures are collected, not raised."""
    pts = [_as_point(p) for p in points]
    lv = _levels(cfg, levels)

    def one(p):
        try:
            t = solve_terms(cfg, data, p, lv, delta, focused)
            return math.fsum(t.values()), t, None
        except Exception as exc:
            return math.nan, {}, f"{type(exc).__name__}: {exc}"

    nthreads = threads or thread_count()
    if nthreads > 1 and len(pts) > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            res = list(ex.map(one, pts))
    else:
        res = [one(p) for p in pts]
    failures = [(i, msg) for i, (_, _, msg) in enumerate(res) if msg]
    return SolveReport(pts, [r[0] for r in res], [r[1] for r in res], lv, failures)


# ---------------------------------------------------------------------------
# boundary data


def check_compatibility(cfg: ProblemConfig, data: BoundaryData, samples: int = 20,
                        tol: float = 1e-9, seed: int = 0) -> bool:
    """Check tau_p on face edges against phi and neighbouring tau_q on sampled points."""
    data.validate(cfg)
    rng = np.random.default_rng(seed)
    R = cfg.R
    for p in range(1, cfg.k + 1):
        # S_p: |x| = R on the face x_p = 0
        X = np.abs(rng.normal(size=(samples, cfg.m)))
        X[:, cfg.n:] = rng.normal(size=(samples, cfg.m - cfg.n))
        X[:, p - 1] = 0.0
        X *= R / np.linalg.norm(X, axis=1, keepdims=True)
        if np.max(np.abs(np.asarray(data.tau[p - 1](X)) - np.asarray(data.phi(X)))) > tol:
            return False
        for q in range(p + 1, cfg.k + 1):
            Y = X * rng.uniform(0.1, 1.0, size=(samples, 1))
            Y[:, q - 1] = 0.0
            if np.max(np.abs(np.asarray(data.tau[p - 1](Y)) - np.asarray(data.tau[q - 1](Y)))) > tol:
                return False
    return True


def data_from_exact(cfg: ProblemConfig, u: Func, nu: Sequence[Func] | None = None) -> BoundaryData:
    """Boundary data of a known solution ``u``; ``nu[j]`` is the weighted derivative
    on face k+1+j (zero when omitted)."""
    zero = lambda X: np.zeros(len(np.atleast_2d(X)))
    nus = list(nu) if nu is not None else [zero] * (cfg.n - cfg.k)
    return BoundaryData([u] * cfg.k, nus, u)


def _alpha_full(cfg, j):
    return cfg.alpha[j] if j < cfg.n else 0.0


def _constant(cfg, value=1.0):
    u = lambda X: np.full(len(np.atleast_2d(X)), float(value))
    return data_from_exact(cfg, u), u


def _coordinate(cfg, index=None):
    j = (cfg.m if index is None else int(index)) - 1
    if j < cfg.n:
        raise ValueError("the coordinate family needs a non-singular index > n")
    u = lambda X: np.atleast_2d(X)[:, j].copy()
    return data_from_exact(cfg, u), u


def _power(cfg, index=None):
    p = (cfg.n if index is None else int(index)) - 1
    if not 0 <= p < cfg.n:
        raise ValueError("the power family needs a singular index 1..n")
    e = 1 - 2 * cfg.alpha[p]
    u = lambda X: np.atleast_2d(X)[:, p] ** e
    zero = lambda X: np.zeros(len(np.atleast_2d(X)))
    const = lambda X: np.full(len(np.atleast_2d(X)), e)
    nus = [const if j == p else zero for j in range(cfg.k, cfg.n)]
    return data_from_exact(cfg, u, nus), u


def _quadratic(cfg, i=1, j=None):
    a = int(i) - 1
    b = (cfg.m if j is None else int(j)) - 1
    if a == b:
        raise ValueError("quadratic family needs two distinct indices")
    ca = 1 / (1 + 2 * _alpha_full(cfg, a))
    cb = 1 / (1 + 2 * _alpha_full(cfg, b))
    u = lambda X: ca * np.atleast_2d(X)[:, a] ** 2 - cb * np.atleast_2d(X)[:, b] ** 2
    return data_from_exact(cfg, u), u


def _polynomial(cfg, terms=()):
    """Restriction of sum c * prod x_j^e_j; ``terms`` is a list of [c, [e_1..e_m]].

    Weighted face derivatives of a polynomial vanish, so nu = 0. The result
    solves the problem only if the polynomial satisfies the equation.
    """
    coef = np.array([float(t[0]) for t in terms])
    expo = np.array([[float(e) for e in t[1]] for t in terms]).reshape(len(coef), cfg.m)

    def u(X):
        X = np.atleast_2d(X)
        return (np.prod(X[:, None, :] ** expo[None, :, :], axis=2) * coef).sum(axis=1)

    return data_from_exact(cfg, u), u


FAMILIES = {
    "constant": _constant,
    "coordinate": _coordinate,
    "power": _power,
    "quadratic": _quadratic,
    "polynomial": _polynomial,
}


def make_family(cfg: ProblemConfig, name: str, **params):
    """Return ``(BoundaryData, exact_solution)`` for a registered family."""
    try:
        factory = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown boundary family {name!r}; known: {sorted(FAMILIES)}") from None
    return factory(cfg, **params)

"""Fundamental solutions, Green's function and boundary kernels for

    L u = sum_{i=1}^m u_{x_i x_i} + sum_{j=1}^n (2 alpha_j / x_j) u_{x_j} = 0

in the quarter ball  {|x| < R, x_1..x_n > 0}.

Conventions (1-based indices in docstrings, 0-based in code):

* ``k`` faces x_p = 0, p <= k, carry Dirichlet data; the faces p > k carry the
  weighted derivative ``lim x_p^(2 alpha_p) du/dx_p``.
* ``r_i^2 = r^2 + 4 x_i xi_i`` so ``theta_i = 1 - r_i^2 / r^2 = -4 x_i xi_i / r^2 <= 0``.
* The Green's function is ``G_k(x, xi) = q_k(x, xi) - (R/rho)^s q_k(x, xi_bar)`` with
  ``s = m - 2 + 2 sum(alpha)``, the exponent that makes ``G_k`` vanish on the sphere.

The F_A factors are always evaluated with the Laplace integral (all theta <= 0
here), which keeps kernels smooth in x and xi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hyperfun import DomainError, FAParams, fa_laplace_batch

__all__ = [
    "ProblemConfig",
    "GeometryCache",
    "FaceGeometry",
    "SingularGeometryError",
    "beta_k",
    "gamma_k",
    "image_exponent",
    "kernel_params",
    "reduced_params",
    "weight",
    "geometry",
    "face_geometry",
    "invert_point",
    "q_k",
    "q_k_batch",
    "grad_q_k",
    "grad_q_k_batch",
    "dq_dn",
    "green_G_k",
    "green_G_k_batch",
    "grad_green_batch",
    "dG_dn_sphere",
    "dG_dn_sphere_batch",
    "face_kernel_batch",
]

GEOM_EPS = 1e-12


class SingularGeometryError(ValueError):
    """Coincident points or an undefined inversion."""


@dataclass(frozen=True)
class ProblemConfig:
    m: int
    n: int
    k: int
    alpha: tuple[float, ...]
    R: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "R", float(self.R))
        if self.m < 2:
            raise ValueError(f"m={self.m}: need m >= 2")
        if not 1 <= self.n <= self.m:
            raise ValueError(f"n={self.n}: need 1 <= n <= m={self.m}")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"k={self.k}: need 0 <= k <= n={self.n}")
        if len(self.alpha) != self.n:
            raise ValueError(f"alpha has {len(self.alpha)} entries, expected n={self.n}")
        for j, a in enumerate(self.alpha):
            if not 0 < 2 * a < 1:
                raise ValueError(f"alpha[{j}]={a}: need 0 < 2 alpha < 1")
        if not self.R > 0:
            raise ValueError("R must be positive")


def beta_k(cfg: ProblemConfig) -> float:
    """m/2 + k - 1 - sum_{i<=k} alpha_i + sum_{i>k} alpha_i."""
    a = cfg.alpha
    return cfg.m / 2 + cfg.k - 1 - sum(a[: cfg.k]) + sum(a[cfg.k:])


def gamma_k(cfg: ProblemConfig) -> float:
    """Normalising constant of q_k."""
    b = beta_k(cfg)
    lg = (2 * b - cfg.m) * math.log(2) + math.lgamma(b) - cfg.m / 2 * math.log(math.pi)
    for j, a in enumerate(cfg.alpha):
        if j < cfg.k:
            lg += math.lgamma(1 - a) - math.lgamma(2 - 2 * a)
        else:
            lg += math.lgamma(a) - math.lgamma(2 * a)
    return math.exp(lg)


def image_exponent(cfg: ProblemConfig) -> float:
    """Exponent s in the image coefficient (R/rho)^s of the Green's function."""
    return cfg.m - 2 + 2 * sum(cfg.alpha)


def kernel_params(cfg: ProblemConfig, shift_a: int = 0) -> FAParams:
    """F_A parameters of q_k; ``shift_a`` adds to the first parameter."""
    k = cfg.k
    b = [1 - a for a in cfg.alpha[:k]] + list(cfg.alpha[k:])
    c = [2 - 2 * a for a in cfg.alpha[:k]] + [2 * a for a in cfg.alpha[k:]]
    return FAParams(beta_k(cfg) + shift_a, tuple(b), tuple(c))


def reduced_params(cfg: ProblemConfig, i: int) -> FAParams:
    """Kernel parameters with the (0-based) slot ``i`` deleted."""
    return kernel_params(cfg).delete(i)


def _fa_rows(params: FAParams, theta: np.ndarray) -> np.ndarray:
    if params.n == 0:
        return np.ones(len(theta))
    return fa_laplace_batch(params, theta)


def weight(cfg: ProblemConfig, X) -> np.ndarray:
    """x^(2 alpha) = prod_{j<=n} x_j^(2 alpha_j) for each row of X."""
    X = np.atleast_2d(np.asarray(X, float))
    return np.prod(X[:, : cfg.n] ** (2 * np.asarray(cfg.alpha)), axis=1)


def _prefactor(cfg: ProblemConfig, X: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """prod_{j<=k} (x_j xi_j)^(1 - 2 alpha_j), computed in log space."""
    k = cfg.k
    if k == 0:
        return np.ones(len(X))
    prod = X[:, :k] * xi[:k]
    zero = np.any(prod <= 0, axis=1)
    with np.errstate(divide="ignore"):
        lg = np.log(np.where(prod > 0, prod, 1.0)) @ (1 - 2 * np.asarray(cfg.alpha[:k]))
    out = np.exp(lg)
    out[zero] = 0.0
    return out


def invert_point(xi, R: float):
    """Return (xi_bar, rho) with xi_bar = (R^2/rho^2) xi."""
    xi = np.asarray(xi, float)
    rho = float(np.linalg.norm(xi))
    if rho == 0:
        raise SingularGeometryError("inversion undefined at xi = 0")
    return xi * (R * R / (rho * rho)), rho


@dataclass
class GeometryCache:
    x: np.ndarray
    xi: np.ndarray
    r2: float
    ri2: np.ndarray
    theta: np.ndarray
    rho2: float
    xi_bar: np.ndarray
    r2_bar: float
    ri2_bar: np.ndarray
    theta_bar: np.ndarray
    weight: float


def _dist(X: np.ndarray, xi: np.ndarray, n: int):
    d = X - xi
    r2 = np.einsum("ij,ij->i", d, d)
    cross = 4 * X[:, :n] * xi[:n]
    return r2, r2[:, None] + cross, cross


def geometry(cfg: ProblemConfig, x, xi) -> GeometryCache:
    """Distances and F_A arguments for a pair of points."""
    x = np.asarray(x, float)
    xi = np.asarray(xi, float)
    _check_orthant(cfg, x[None, :])
    _check_orthant(cfg, xi[None, :])
    r2, ri2, cross = _dist(x[None, :], xi, cfg.n)
    if r2[0] < (GEOM_EPS * cfg.R) ** 2:
        raise SingularGeometryError("x coincides with xi")
    xb, rho = invert_point(xi, cfg.R)
    r2b, ri2b, crossb = _dist(x[None, :], xb, cfg.n)
    theta = -cross[0] / r2[0]
    theta_bar = -crossb[0] / r2b[0]
    assert np.all(theta <= 0) and np.all(theta_bar <= 0)
    return GeometryCache(x, xi, float(r2[0]), ri2[0], theta, rho * rho, xb, float(r2b[0]),
                         ri2b[0], theta_bar, float(weight(cfg, x)[0]))


@dataclass
class FaceGeometry:
    i: int
    r0i2: float
    r0il2: np.ndarray
    theta0i: np.ndarray
    r0i2_bar: float
    theta0i_bar: np.ndarray


def face_geometry(cfg: ProblemConfig, i: int, x, xi) -> FaceGeometry:
    """Face distances for x on the face x_i = 0 (``i`` 0-based).

    ``r0i2_bar = R^2 - 2 x.xi + |x|^2 rho^2 / R^2``, which equals
    ``(rho/R)^2 |x - xi_bar|^2``.
    """
    x = np.array(x, float)
    x[i] = 0.0
    xi = np.asarray(xi, float)
    r0i2, r0il2, theta, r0i2b, thetab = _face_terms(cfg, i, x[None, :], xi)
    return FaceGeometry(i, float(r0i2[0]), r0il2[0], theta[0], float(r0i2b[0]), thetab[0])


def _face_terms(cfg, i, X, xi):
    R = cfg.R
    keep = [l for l in range(cfg.n) if l != i]
    d = X - xi
    d[:, i] = xi[i]
    r0i2 = np.einsum("ij,ij->i", d, d)
    cross = 4 * X[:, keep] * xi[keep]
    r0il2 = r0i2[:, None] + cross
    rho2 = float(xi @ xi)
    r0i2b = R * R - 2 * X @ xi + np.einsum("ij,ij->i", X, X) * rho2 / (R * R)
    return r0i2, r0il2, -cross / r0i2[:, None], r0i2b, -cross / r0i2b[:, None]


def _check_orthant(cfg, X):
    if np.any(X[:, : cfg.n] < 0):
        raise DomainError("points must lie in the closed orthant x_1..x_n >= 0")


def _prep(cfg, X, xi):
    X = np.atleast_2d(np.asarray(X, float))
    xi = np.asarray(xi, float).reshape(-1)
    if X.shape[1] != cfg.m or xi.size != cfg.m:
        raise ValueError(f"points must have {cfg.m} coordinates")
    _check_orthant(cfg, X)
    _check_orthant(cfg, xi[None, :])
    return X, xi


def _q_core(cfg, X, xi):
    r2, _, cross = _dist(X, xi, cfg.n)
    if np.any(r2 < (GEOM_EPS * cfg.R) ** 2):
        raise SingularGeometryError("x coincides with xi")
    return r2, -cross / r2[:, None]


def q_k_batch(cfg: ProblemConfig, X, xi) -> np.ndarray:
    """q_k(x, xi) for each row x of X."""
    X, xi = _prep(cfg, X, xi)
    r2, theta = _q_core(cfg, X, xi)
    b = beta_k(cfg)
    F = _fa_rows(kernel_params(cfg), theta)
    return gamma_k(cfg) * _prefactor(cfg, X, xi) * r2 ** (-b) * F


def q_k(cfg: ProblemConfig, x, xi) -> float:
    """Fundamental solution q_k(x, xi)."""
    return float(q_k_batch(cfg, x, xi)[0])


def grad_q_k_batch(cfg: ProblemConfig, X, xi) -> np.ndarray:
    """Gradient of q_k in x, shape (N, m).

    For i <= k the x-derivative of the prefactor contributes
    ``(1 - 2 alpha_i)/x_i``; every singular slot i <= n gains the term with
    ``F_A(1 + beta; b + e_i; c + e_i)``.
    """
    X, xi = _prep(cfg, X, xi)
    r2, theta = _q_core(cfg, X, xi)
    beta = beta_k(cfg)
    g = gamma_k(cfg)
    base = kernel_params(cfg)
    P = _prefactor(cfg, X, xi)
    F0 = _fa_rows(base, theta)
    F1 = _fa_rows(base.with_a(beta + 1), theta)
    rb = r2 ** (-beta)
    out = (-2 * beta * g * P * rb / r2 * F1)[:, None] * (X - xi)
    for i in range(cfg.n):
        if xi[i] == 0:
            continue
        Fi = _fa_rows(base.shift(i), theta)
        ratio = base.b[i] / base.c[i]
        out[:, i] -= 4 * beta * ratio * g * P * xi[i] * rb / r2 * Fi
    for i in range(cfg.k):
        with np.errstate(divide="ignore", invalid="ignore"):
            term = (1 - 2 * cfg.alpha[i]) / X[:, i] * g * P * rb * F0
        out[:, i] += np.where(P > 0, term, 0.0)
    return out


def grad_q_k(cfg: ProblemConfig, x, xi) -> np.ndarray:
    return grad_q_k_batch(cfg, x, xi)[0]


def dq_dn(cfg: ProblemConfig, x, xi) -> float:
    """Outer normal derivative of q_k at x on the sphere |x| = R."""
    x = np.asarray(x, float)
    R = float(np.linalg.norm(x))
    if abs(R - cfg.R) > 1e-9 * cfg.R:
        raise DomainError(f"|x| = {R} is not on the sphere of radius {cfg.R}")
    X, xi = _prep(cfg, x, xi)
    r2, theta = _q_core(cfg, X, xi)
    beta = beta_k(cfg)
    base = kernel_params(cfg)
    q = q_k_batch(cfg, X, xi)[0]
    F0 = _fa_rows(base, theta)[0]
    F1 = _fa_rows(base.with_a(beta + 1), theta)[0]
    # log-derivative form: dq/dn = q * d/dn log q, split into its pieces
    pref = gamma_k(cfg) * _prefactor(cfg, X, xi)[0] * r2[0] ** (-beta)
    val = -2 * beta * pref * F1 * float((x - xi) @ x) / (R * r2[0])
    for i in range(cfg.n):
        if xi[i] == 0:
            continue
        Fi = _fa_rows(base.shift(i), theta)[0]
        val -= 4 * beta * base.b[i] / base.c[i] * pref * xi[i] * x[i] / (R * r2[0]) * Fi
    if q != 0:
        val += q * sum((1 - 2 * cfg.alpha[i]) for i in range(cfg.k)) / R
    return float(val)


def green_G_k_batch(cfg: ProblemConfig, X, xi) -> np.ndarray:
    """Green's function of the quarter ball for each row x of X."""
    X, xi = _prep(cfg, X, xi)
    xb, rho = invert_point(xi, cfg.R)
    c = (cfg.R / rho) ** image_exponent(cfg)
    return q_k_batch(cfg, X, xi) - c * q_k_batch(cfg, X, xb)


def green_G_k(cfg: ProblemConfig, x, xi) -> float:
    return float(green_G_k_batch(cfg, x, xi)[0])


def grad_green_batch(cfg: ProblemConfig, X, xi) -> np.ndarray:
    X, xi = _prep(cfg, X, xi)
    xb, rho = invert_point(xi, cfg.R)
    c = (cfg.R / rho) ** image_exponent(cfg)
    return grad_q_k_batch(cfg, X, xi) - c * grad_q_k_batch(cfg, X, xb)


def dG_dn_sphere_batch(cfg: ProblemConfig, X, xi) -> np.ndarray:
    """Closed-form outer normal derivative of G_k on the sphere."""
    X, xi = _prep(cfg, X, xi)
    r2, theta = _q_core(cfg, X, xi)
    beta = beta_k(cfg)
    F1 = _fa_rows(kernel_params(cfg, 1), theta)
    rho2 = float(xi @ xi)
    R = cfg.R
    return (2 * beta * gamma_k(cfg) * _prefactor(cfg, X, xi) * F1
            * (rho2 - R * R) / (R * r2 ** (1 + beta)))


def dG_dn_sphere(cfg: ProblemConfig, x, xi) -> float:
    x = np.asarray(x, float)
    if abs(np.linalg.norm(x) - cfg.R) > 1e-9 * cfg.R:
        raise DomainError("x must lie on the sphere")
    xi = np.asarray(xi, float)
    if not xi @ xi < cfg.R ** 2:
        raise DomainError("xi must lie inside the ball")
    return float(dG_dn_sphere_batch(cfg, x, xi)[0])


def face_kernel_batch(cfg: ProblemConfig, i: int, X, xi) -> np.ndarray:
    """Boundary kernel on the face x_i = 0 (``i`` 0-based), rows of X with x_i = 0.

    For i < k (Dirichlet face) this is ``x~^(2 alpha) lim x_i^(2 alpha_i) dG/dx_i``;
    otherwise it is ``lim G_k`` as x_i -> 0. The face weight
    ``x~^(2 alpha)`` is included only in the first case.
    """
    X, xi = _prep(cfg, X, xi)
    X = X.copy()
    X[:, i] = 0.0
    r0i2, _, theta, r0i2b, thetab = _face_terms(cfg, i, X, xi)
    if np.any(r0i2 < (GEOM_EPS * cfg.R) ** 2):
        raise SingularGeometryError("face point coincides with xi")
    beta = beta_k(cfg)
    red = reduced_params(cfg, i)
    F = _fa_rows(red, theta)
    Fb = _fa_rows(red, thetab)
    diff = F * r0i2 ** (-beta) - Fb * r0i2b ** (-beta)
    g = gamma_k(cfg)
    if i < cfg.k:
        keep = [j for j in range(cfg.k) if j != i]
        P = np.ones(len(X))
        if keep:
            prod = X[:, keep] * xi[keep]
            with np.errstate(divide="ignore"):
                lg = np.log(np.where(prod > 0, prod, 1.0)) @ (1 - 2 * np.asarray(cfg.alpha)[keep])
            P = np.where(np.any(prod <= 0, axis=1), 0.0, np.exp(lg))
        a_i = cfg.alpha[i]
        w = np.prod(np.delete(X[:, : cfg.n], i, axis=1)
                    ** np.delete(2 * np.asarray(cfg.alpha), i), axis=1)
        return (1 - 2 * a_i) * g * w * xi[i] ** (1 - 2 * a_i) * P * diff
    return g * _prefactor(cfg, X, xi) * diff

"""Quadrature on the spherical part S, the flat faces D_p and the quarter ball itself.

Points on the unit sphere in d dimensions use hyperspherical angles

    w_1 = cos phi_1,  w_j = sin phi_1 ... sin phi_{j-1} cos phi_j,  w_d = sin phi_1 ... sin phi_{d-1}

with surface element prod_i sin(phi_i)^(d-1-i). Requiring the first ``c``
coordinates to be positive restricts phi_j to [0, pi/2] for j < d-1 and the last
angle to (-pi/2, pi/2) (c = d-1) or (0, pi/2) (c = d).

Bounded angular ranges use Gauss-Legendre nodes after the end-graded substitution
``phi = a + (b-a) g(t)``, ``g(t) = t^3 (10 - 15 t + 6 t^2)``, so that the
``x_j^(2 alpha_j)`` weights and face edges are resolved. A full period uses
uniform nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fundsol import ProblemConfig

__all__ = [
    "SurfaceGrid",
    "gauss_legendre",
    "graded_rule",
    "axis_rule",
    "sphere_angles",
    "radial_rule",
    "unit_sphere_rule",
    "sphere_grid",
    "face_grid",
    "ball_grid",
    "integrate",
    "sphere_measure",
    "face_measure",
    "default_level",
]


@dataclass
class SurfaceGrid:
    nodes: np.ndarray
    weights: np.ndarray
    surface_id: str
    level: int = 0

    def __len__(self):
        return len(self.weights)


def default_level(m: int) -> int:
    return 24 if m <= 2 else 16


def gauss_legendre(q: int, a: float = 0.0, b: float = 1.0):
    """q-point Gauss-Legendre rule on [a, b]."""
    t, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (b - a) * t + 0.5 * (a + b), 0.5 * (b - a) * w


def _grade(t):
    return t ** 3 * (10 - 15 * t + 6 * t * t), 30 * t * t * (1 - t) ** 2


def graded_rule(q: int, a: float, b: float):
    """Gauss-Legendre on [a, b] after the end-graded substitution."""
    t, w = gauss_legendre(q)
    g, dg = _grade(t)
    return a + (b - a) * g, (b - a) * w * dg


_T_TABLE = np.linspace(0.0, 1.0, 2001)
_G_TABLE = _grade(_T_TABLE)[0]

PANEL_OFFSETS = (1.0, 4.0)


def _panel_breaks(y_center, y_width, to_t):
    """Breakpoints in the reference variable t around a peak at y_center."""
    ys = [y_center + sgn * f * y_width for f in PANEL_OFFSETS for sgn in (-1, 1)]
    ts = sorted({0.0, 1.0, *[float(to_t(y)) for y in ys]})
    out = [ts[0]]
    for t in ts[1:]:
        if t - out[-1] > 1e-9:
            out.append(t)
    out[-1] = 1.0
    return out


def _composite(q: int, breaks):
    nodes, weights = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        t, w = gauss_legendre(q, lo, hi)
        nodes.append(t)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def axis_rule(q: int, a: float, b: float, graded: bool = True, center=None, width=None):
    """Rule on [a, b], end-graded when ``graded``; with ``center``/``width`` the
    reference interval is split into panels around the peak, q nodes each."""
    if center is None:
        t, w = gauss_legendre(q)
    else:
        if graded:
            to_t = lambda y: np.interp(np.clip((y - a) / (b - a), 0, 1), _G_TABLE, _T_TABLE)
        else:
            to_t = lambda y: np.clip((y - a) / (b - a), 0, 1)
        t, w = _composite(q, _panel_breaks(center, width, to_t))
    if graded:
        g, dg = _grade(t)
        return a + (b - a) * g, (b - a) * w * dg
    return a + (b - a) * t, (b - a) * w


def radial_rule(q: int, R: float = 1.0, grade: int = 2, center=None, width=None):
    """Nodes in (0, R) clustered toward R: r = R (1 - (1 - u)^grade).

    ``grade=1`` is plain Gauss-Legendre. ``center``/``width`` add panels
    around a radius where the integrand peaks.
    """
    if center is None:
        u, w = gauss_legendre(q)
    else:
        to_u = lambda r: 1.0 - (1.0 - min(max(r / R, 0.0), 1.0)) ** (1.0 / grade)
        u, w = _composite(q, _panel_breaks(center, width, to_u))
    s = 1.0 - u
    return R * (1.0 - s ** grade), R * grade * s ** (grade - 1) * w


def sphere_angles(v) -> np.ndarray:
    """Hyperspherical angles of a nonzero vector (inverse of the parametrisation)."""
    v = np.asarray(v, float)
    d = v.size
    phi = np.empty(d - 1)
    for j in range(d - 2):
        phi[j] = math.atan2(float(np.linalg.norm(v[j + 1:])), v[j])
    phi[d - 2] = math.atan2(v[d - 1], v[d - 2])
    return phi


def unit_sphere_rule(d: int, c: int, level: int, focus=None, width: float | None = None):
    """Nodes and weights on {|w| = 1} in R^d with w_1..w_c > 0.

    ``d = 1`` gives the points {+1, -1} (or {+1} when constrained). A unit
    vector ``focus`` and angular ``width`` refine every angular axis near the
    focus direction with composite panels of ``level`` nodes.
    """
    if d < 1:
        raise ValueError("d >= 1 required")
    if not 0 <= c <= d:
        raise ValueError("0 <= c <= d required")
    if level < 1:
        raise ValueError("level >= 1 required")
    if d == 1:
        if c:
            return np.ones((1, 1)), np.ones(1)
        return np.array([[1.0], [-1.0]]), np.ones(2)
    fphi = sphere_angles(focus) if focus is not None else None

    def local(j):
        if fphi is None:
            return None, None
        scale = float(np.prod(np.sin(fphi[:j])))
        return fphi[j], min(width / max(scale, width), math.pi)

    axes = []
    for j in range(d - 2):
        hi = math.pi / 2 if j < c else math.pi
        axes.append(axis_rule(level, 0.0, hi, True, *local(j)))
    if c >= d:
        axes.append(axis_rule(level, 0.0, math.pi / 2, True, *local(d - 2)))
    elif c == d - 1:
        axes.append(axis_rule(level, -math.pi / 2, math.pi / 2, True, *local(d - 2)))
    elif fphi is None:
        q = 2 * level
        axes.append((2 * math.pi * np.arange(q) / q, np.full(q, 2 * math.pi / q)))
    else:
        ctr, wid = local(d - 2)
        # periodic axis: one period starting opposite the focus
        axes.append(axis_rule(level, ctr - math.pi, ctr + math.pi, False, ctr, wid))
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    phi = np.stack([g.ravel() for g in grids], axis=1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    N = len(phi)
    pts = np.empty((N, d))
    s = np.ones(N)
    for j in range(d - 1):
        pts[:, j] = s * np.cos(phi[:, j])
        w = w * np.sin(phi[:, j]) ** (d - 2 - j) if j < d - 2 else w
        s = s * np.sin(phi[:, j])
    pts[:, d - 1] = s
    if c:
        # round-off may leave tiny negatives on constrained axes
        pts[:, :c] = np.abs(pts[:, :c])
    return pts, w


def sphere_grid(cfg: ProblemConfig, level: int | None = None, focus=None) -> SurfaceGrid:
    """Quadrature on S = {|x| = R, x_1..x_n > 0}.

    With an interior ``focus`` point the rule is refined near the direction of
    ``focus`` on a scale R - |focus|.
    """
    level = level or default_level(cfg.m)
    R = cfg.R
    if focus is not None:
        focus = np.asarray(focus, float)
        rho = float(np.linalg.norm(focus))
        pts, w = unit_sphere_rule(cfg.m, cfg.n, level, focus / rho, (R - rho) / R)
    else:
        pts, w = unit_sphere_rule(cfg.m, cfg.n, level)
    return SurfaceGrid(R * pts, w * R ** (cfg.m - 1), "S", level)


def face_grid(cfg: ProblemConfig, p: int, level: int | None = None, focus=None) -> SurfaceGrid:
    """Quadrature on the face D_p (``p`` 1-based): x_p = 0, |x| < R, other x_j > 0 (j <= n).

    With an interior ``focus`` point the rule is refined near its projection
    on the face on a scale given by its distance to the face.
    """
    if not 1 <= p <= cfg.n:
        raise ValueError(f"face p={p} outside 1..{cfg.n}")
    level = level or default_level(cfg.m)
    d = cfg.m - 1
    if focus is None:
        pts, w = unit_sphere_rule(d, cfg.n - 1, level)
        r, wr = radial_rule(level, cfg.R)
    else:
        focus = np.asarray(focus, float)
        proj = np.delete(focus, p - 1)
        dist = abs(float(focus[p - 1]))
        rp = float(np.linalg.norm(proj))
        r, wr = radial_rule(level, cfg.R, 2, rp, dist)
        if d > 1 and rp > 0:
            pts, w = unit_sphere_rule(d, cfg.n - 1, level, proj / rp, dist / rp)
        else:
            pts, w = unit_sphere_rule(d, cfg.n - 1, level)
    nodes_t = (r[:, None, None] * pts[None, :, :]).reshape(-1, d)
    weights = (wr[:, None] * r[:, None] ** (d - 1) * w[None, :]).ravel()
    nodes = np.insert(nodes_t, p - 1, 0.0, axis=1)
    return SurfaceGrid(nodes, weights, f"D{p}", level)


def ball_grid(cfg: ProblemConfig, level: int | None = None) -> SurfaceGrid:
    """Volume quadrature on the quarter ball (radial Gauss-Legendre times sphere rule)."""
    level = level or default_level(cfg.m)
    pts, w = unit_sphere_rule(cfg.m, cfg.n, level)
    r, wr = radial_rule(level, cfg.R, grade=1)
    nodes = (r[:, None, None] * pts[None, :, :]).reshape(-1, cfg.m)
    weights = (wr[:, None] * r[:, None] ** (cfg.m - 1) * w[None, :]).ravel()
    return SurfaceGrid(nodes, weights, "Omega", level)


def integrate(grid: SurfaceGrid, f, vectorized: bool = True) -> float:
    """Sum of w_i f(node_i) with compensated summation.

    ``f`` takes an (N, m) array when ``vectorized`` is true, else one node.
    """
    if vectorized:
        vals = np.asarray(f(grid.nodes), float).reshape(-1)
    else:
        vals = np.array([f(x) for x in grid.nodes], float)
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        j = bad[0]
        raise FloatingPointError(
            f"non-finite integrand {vals[j]} on {grid.surface_id} at node {j}: {grid.nodes[j]}")
    return math.fsum((grid.weights * vals).tolist())


def sphere_measure(m: int, n: int, R: float = 1.0) -> float:
    """Area of the orthant portion of the sphere of radius R."""
    return 2 * math.pi ** (m / 2) / math.gamma(m / 2) * R ** (m - 1) / 2 ** n


def face_measure(m: int, n: int, R: float = 1.0) -> float:
    """Volume of a face D_p (an (m-1)-ball with n-1 sign constraints)."""
    d = m - 1
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * R ** d / 2 ** (n - 1)

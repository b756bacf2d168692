"""Gamma, Pochhammer, Gauss 2F1, Kummer 1F1 and the Lauricella function F_A.

F_A^(n) is evaluated three ways:

* ``fa_direct``: the defining multiple series, summed by total-degree shells.
* ``fa_decompose_lemma1`` / ``fa_decompose_recursive`` / ``fa_reduced_corollary1``:
  expansions in products of Gauss functions over triangular multi-indices.
* ``fa_laplace``: the Laplace integral
  ``F_A = 1/Gamma(a) int_0^inf exp(-t) t^(a-1) prod_i 1F1(b_i; c_i; z_i t) dt``,
  discretised by the trapezoidal rule in ``v = log t`` (exponentially convergent
  for the analytic integrands met here).

``fa`` dispatches between the direct series and the Laplace integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import special as sc

__all__ = [
    "DomainError",
    "StrategyMismatch",
    "FAParams",
    "TriangularMultiIndex",
    "SeriesResult",
    "ln_gamma",
    "log_pochhammer",
    "pochhammer",
    "gauss_2f1",
    "pfaff_2f1",
    "kummer_1f1",
    "fa_direct",
    "index_A",
    "index_B",
    "triangular_pairs",
    "fa_decompose_lemma1",
    "fa_decompose_recursive",
    "fa_reduced_corollary1",
    "lemma2_identity",
    "lemma3_limit",
    "fa_laplace",
    "fa_laplace_batch",
    "fa",
    "fa_derivative",
]

DIRECT_THRESHOLD = 0.5
OVERLAP_UPPER = 0.9
LAPLACE_STEP = 0.125


class DomainError(ValueError):
    """Raised when arguments fall outside the domain of a function."""


class StrategyMismatch(RuntimeError):
    """Two evaluation strategies disagree beyond tolerance."""


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


@dataclass(frozen=True)
class FAParams:
    """Parameters ``(a; b_1..b_n; c_1..c_n)`` of F_A^(n)."""

    a: float
    b: tuple[float, ...]
    c: tuple[float, ...]

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        c = tuple(float(v) for v in self.c)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if len(b) != len(c):
            raise DomainError(f"len(b)={len(b)} differs from len(c)={len(c)}")
        for i, ci in enumerate(c):
            if _is_nonpositive_int(ci):
                raise DomainError(f"c[{i}]={ci} is zero or a negative integer")

    @property
    def n(self) -> int:
        return len(self.b)

    def shift(self, i: int) -> "FAParams":
        """Parameters of dF_A/dz_i: a+1, b_i+1, c_i+1 (0-based ``i``)."""
        b = list(self.b)
        c = list(self.c)
        b[i] += 1.0
        c[i] += 1.0
        return FAParams(self.a + 1.0, tuple(b), tuple(c))

    def with_a(self, a: float) -> "FAParams":
        return FAParams(a, self.b, self.c)

    def delete(self, i: int) -> "FAParams":
        """Drop the (0-based) slot ``i``."""
        return FAParams(self.a, self.b[:i] + self.b[i + 1:], self.c[:i] + self.c[i + 1:])


@dataclass
class SeriesResult:
    value: float
    terms_used: int
    tail_estimate: float
    strategy: str
    converged: bool = True
    details: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# gamma and Pochhammer


def ln_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"ln_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def _lgamma_signed(x: float) -> tuple[float, float]:
    if _is_nonpositive_int(x):
        raise DomainError(f"Gamma has a pole at {x}")
    return math.lgamma(x), (1.0 if x > 0 or math.floor(x) % 2 == 0 else -1.0)


def log_pochhammer(mu: float, lam: int) -> tuple[float, float]:
    """Return ``(log|(mu)_lam|, sign)``; sign is 0 when the symbol vanishes."""
    if lam < 0:
        raise DomainError("lam must be nonnegative")
    if lam == 0:
        return 0.0, 1.0
    if _is_nonpositive_int(mu):
        if mu + lam > 0:
            return -math.inf, 0.0
        # product of negative integers mu..mu+lam-1
        return (math.lgamma(1 - mu) - math.lgamma(1 - mu - lam),
                -1.0 if lam % 2 else 1.0)
    if _is_nonpositive_int(mu + lam):
        # cannot happen unless mu is a nonpositive integer
        raise DomainError(f"invalid Pochhammer arguments ({mu}, {lam})")
    la, sa = _lgamma_signed(mu + lam)
    lb, sb = _lgamma_signed(mu)
    return la - lb, sa * sb


def pochhammer(mu: float, lam: int) -> float:
    """Rising factorial ``(mu)_lam = mu (mu+1) ... (mu+lam-1)``; +-inf beyond double range."""
    if lam < 0:
        raise DomainError("lam must be nonnegative")
    if lam <= 64:
        out = 1.0
        for j in range(lam):
            out *= mu + j
            if out == 0.0 or not math.isfinite(out):
                break
        if math.isfinite(out):
            return out
    la, s = log_pochhammer(mu, lam)
    if not s:
        return 0.0
    return s * math.exp(la) if la < 709.0 else s * math.inf


def _log_poch_array(mu: float, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised log|(mu)_p| and signs for p = 0..nmax."""
    logs = np.empty(nmax + 1)
    signs = np.empty(nmax + 1)
    for p in range(nmax + 1):
        logs[p], signs[p] = log_pochhammer(mu, p)
    return logs, signs


# ---------------------------------------------------------------------------
# Gauss and Kummer functions

_CHUNK = 512


def _series_2f1(a: float, b: float, c: float, z: float, tol: float,
                max_terms: int) -> SeriesResult:
    """Raw hypergeometric series with a ratio-based tail bound."""
    if z == 0.0 or a == 0.0 or b == 0.0:
        return SeriesResult(1.0, 1, 0.0, "direct")
    az = abs(z)
    parts: list[float] = []
    term = 1.0
    total = 1.0
    start = 0
    tail = math.inf
    converged = False
    parts.append(1.0)
    while start < max_terms:
        p = np.arange(start, start + _CHUNK, dtype=float)
        ratios = (a + p) * (b + p) / ((c + p) * (p + 1.0)) * z
        terms = term * np.cumprod(ratios)
        # terminating series: a or b a nonpositive integer
        zero = np.flatnonzero(terms == 0.0)
        if zero.size:
            parts.extend(terms[: zero[0]].tolist())
            return SeriesResult(math.fsum(parts), len(parts), 0.0, "direct")
        abs_r = np.abs(ratios)
        # once |ratio| < 1 the remainder after term j is bounded by
        # |t_j| * R / (1 - R) with R = max(current ratio, |z|)
        nxt = np.abs((a + p + 1) * (b + p + 1) / ((c + p + 1) * (p + 2.0)) * z)
        rbound = np.maximum(nxt, az)
        with np.errstate(divide="ignore", invalid="ignore"):
            tails = np.where(rbound < 1.0, np.abs(terms) * rbound / (1.0 - rbound), np.inf)
        running = total + np.cumsum(terms)
        ok = np.flatnonzero((tails <= tol * np.maximum(np.abs(running), 1e-300))
                            & (abs_r < 1.0))
        if ok.size:
            j = ok[0]
            parts.extend(terms[: j + 1].tolist())
            tail = float(tails[j])
            converged = True
            break
        parts.extend(terms.tolist())
        total = float(running[-1])
        term = float(terms[-1])
        start += _CHUNK
        if not math.isfinite(term):
            break
    value = math.fsum(parts)
    return SeriesResult(value, len(parts), tail, "direct", converged)


def pfaff_2f1(a: float, b: float, c: float, z: float, *, tol: float = 1e-15,
              max_terms: int = 200_000, swap: bool | None = None) -> SeriesResult:
    """F(a,b;c;z) = (1-z)^(-b) F(c-a, b; c; z/(z-1)).

    F is symmetric in ``a, b``; ``swap=True`` applies the identity with the roles
    of ``a`` and ``b`` exchanged. ``swap=None`` picks the variant whose new series
    has the larger smallest upper parameter (fewer sign changes in the terms).
    """
    if z >= 1:
        raise DomainError(f"z={z} >= 1")
    if swap is None:
        swap = min(c - b, a) > min(c - a, b)
    if swap:
        a, b = b, a
    w = z / (z - 1.0)
    inner = _series_2f1(c - a, b, c, w, tol, max_terms)
    pref = (1.0 - z) ** (-b)
    return SeriesResult(pref * inner.value, inner.terms_used, abs(pref) * inner.tail_estimate,
                        "transformed", inner.converged, {"w": w})


def gauss_2f1(a: float, b: float, c: float, z: float, *, tol: float = 1e-15,
              max_terms: int = 200_000, method: str = "auto") -> SeriesResult:
    """Gauss hypergeometric function F(a, b; c; z) for real z < 1.

    ``method="auto"`` sums the series directly for ``0 <= z < 1`` and maps
    negative ``z`` to ``z/(z-1)`` in (0, 1) first. ``"series"`` and
    ``"transform"`` force one route.
    """
    if _is_nonpositive_int(c):
        raise DomainError(f"c={c} is zero or a negative integer")
    if not z < 1:
        raise DomainError(f"gauss_2f1 requires z < 1, got {z}")
    if method == "series" or (method == "auto" and z >= 0):
        if abs(z) >= 1:
            raise DomainError(f"direct series diverges at z={z}")
        return _series_2f1(a, b, c, z, tol, max_terms)
    if method in ("auto", "transform"):
        return pfaff_2f1(a, b, c, z, tol=tol, max_terms=max_terms)
    raise ValueError(f"unknown method {method!r}")


def kummer_1f1(b, c, x):
    """Confluent hypergeometric function Phi(b; c; x) (array-friendly)."""
    if _is_nonpositive_int(c):
        raise DomainError(f"c={c} is zero or a negative integer")
    with np.errstate(over="ignore"):
        out = sc.hyp1f1(b, c, x)
    if np.any(np.isinf(out)):
        raise OverflowError(f"kummer_1f1 overflow for b={b}, c={c}")
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# direct multiple series


@lru_cache(maxsize=None)
def _compositions(d: int, n: int) -> np.ndarray:
    """All n-tuples of nonnegative integers summing to d, shape (K, n)."""
    if n == 1:
        return np.array([[d]], dtype=np.int64)
    rows = []
    for first in range(d, -1, -1):
        rest = _compositions(d - first, n - 1)
        rows.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    out = np.vstack(rows)
    out.setflags(write=False)
    return out


def _coef_table(b: float, c: float, z: float, nmax: int) -> np.ndarray:
    """(b)_p z^p / ((c)_p p!) for p = 0..nmax."""
    out = np.empty(nmax + 1)
    out[0] = 1.0
    for p in range(nmax):
        out[p + 1] = out[p] * (b + p) / ((c + p) * (p + 1.0)) * z
    return out


def _check_z(params: FAParams, z) -> np.ndarray:
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != params.n:
        raise DomainError(f"expected {params.n} arguments, got {z.size}")
    return z


def fa_direct(params: FAParams, z: Sequence[float], tol: float = 1e-10,
              max_degree: int = 200) -> SeriesResult:
    """Sum the defining series of F_A^(n) by total degree p_1 + ... + p_n.

    Stops once two consecutive degree shells are below ``tol`` times the
    partial sum.
    """
    z = _check_z(params, z)
    if np.sum(np.abs(z)) >= 1:
        raise DomainError(f"sum |z| = {np.sum(np.abs(z))} >= 1; direct series diverges")
    n = params.n
    tables = [_coef_table(bi, ci, zi, max_degree) for bi, ci, zi in zip(params.b, params.c, z)]
    with np.errstate(divide="ignore"):
        logq = [np.log(np.abs(t)) for t in tables]
    sgnq = [np.sign(t) for t in tables]
    la, sa = _log_poch_array(params.a, max_degree)
    shells: list[float] = []
    quiet = 0
    converged = False
    for d in range(max_degree + 1):
        comp = _compositions(d, n)
        lg = np.full(len(comp), la[d])
        sg = np.full(len(comp), sa[d])
        for i in range(n):
            lg = lg + logq[i][comp[:, i]]
            sg = sg * sgnq[i][comp[:, i]]
        shell = math.fsum((sg * np.exp(lg)).tolist())
        shells.append(shell)
        total = math.fsum(shells)
        if abs(shell) <= tol * abs(total):
            quiet += 1
            if quiet >= 2:
                converged = True
                break
        else:
            quiet = 0
    total = math.fsum(shells)
    tail = abs(shells[-1])
    if len(shells) >= 3 and shells[-2] != 0:
        r = abs(shells[-1] / shells[-2])
        if r < 1:
            tail = max(tail, abs(shells[-1]) * r / (1 - r))
    terms = sum(len(_compositions(d, n)) for d in range(len(shells)))
    return SeriesResult(total, terms, tail, "direct", converged)


# ---------------------------------------------------------------------------
# triangular multi-index decompositions


def triangular_pairs(n: int) -> list[tuple[int, int]]:
    """Index pairs (i, j) with 2 <= i <= j <= n, in row-major order."""
    return [(i, j) for i in range(2, n + 1) for j in range(i, n + 1)]


@dataclass(frozen=True)
class TriangularMultiIndex:
    """Nonnegative integers m_{i,j} on the set 2 <= i <= j <= n."""

    n: int
    entries: tuple[int, ...] = ()

    def __post_init__(self):
        pairs = triangular_pairs(self.n)
        ent = tuple(int(v) for v in self.entries) or (0,) * len(pairs)
        if len(ent) != len(pairs):
            raise ValueError(f"need {len(pairs)} entries for n={self.n}, got {len(ent)}")
        if any(v < 0 for v in ent):
            raise ValueError("entries must be nonnegative")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def from_dict(cls, n: int, values: dict) -> "TriangularMultiIndex":
        pairs = triangular_pairs(n)
        unknown = set(values) - set(pairs)
        if unknown:
            raise ValueError(f"pairs {sorted(unknown)} outside the triangular set for n={n}")
        return cls(n, tuple(values.get(p, 0) for p in pairs))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        pairs = triangular_pairs(self.n)
        return self.entries[pairs.index(ij)] if ij in pairs else 0

    @property
    def order(self) -> int:
        return sum(self.entries)


@lru_cache(maxsize=None)
def _index_matrices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Incidence matrices so that A(k, n) = MA[k-1] @ m and B(k, n) = MB[k-1] @ m."""
    pairs = triangular_pairs(n)
    col = {p: t for t, p in enumerate(pairs)}
    MA = np.zeros((n, len(pairs)), dtype=np.int64)
    MB = np.zeros((n, len(pairs)), dtype=np.int64)
    for k in range(1, n + 1):
        for i in range(2, k + 2):
            for j in range(i, n + 1):
                MA[k - 1, col[(i, j)]] += 1
        for i in range(2, k + 1):
            MB[k - 1, col[(i, k)]] += 1
        for i in range(k + 1, n + 1):
            MB[k - 1, col[(k + 1, i)]] += 1
    return MA, MB


def index_A(k: int, n: int, m: TriangularMultiIndex) -> int:
    """A(k, n) = sum_{i=2}^{k+1} sum_{j=i}^{n} m_{i,j}."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return sum(m[(i, j)] for i in range(2, k + 2) for j in range(i, n + 1))


def index_B(k: int, n: int, m: TriangularMultiIndex) -> int:
    """B(k, n) = sum_{i=2}^{k} m_{i,k} + sum_{i=k+1}^{n} m_{k+1,i}."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return (sum(m[(i, k)] for i in range(2, k + 1))
            + sum(m[(k + 1, i)] for i in range(k + 1, n + 1)))


def _shell_multi_indices(n: int, order: int) -> np.ndarray:
    T = n * (n - 1) // 2
    if T == 0:
        return np.zeros((1 if order == 0 else 0, 0), dtype=np.int64)
    return _compositions(order, T)


def _log_factorials(M: np.ndarray) -> np.ndarray:
    return np.sum(sc.gammaln(M + 1.0), axis=1)


class _GaussCache:
    """Memoised F(a + A, b + B; c + B; z) for one decomposition call."""

    def __init__(self, tol: float):
        self.tol = tol
        self.store: dict = {}

    def __call__(self, a, b, c, z):
        key = (a, b, c, z)
        hit = self.store.get(key)
        if hit is None:
            hit = gauss_2f1(a, b, c, z, tol=self.tol).value if z != 0 else 1.0
            self.store[key] = hit
        return hit


def _shell_converged(shells: list[float], tol: float) -> bool:
    total = abs(math.fsum(shells))
    return (len(shells) >= 3 and abs(shells[-1]) <= tol * total
            and abs(shells[-2]) <= tol * total)


def _diverging(shells: list[float]) -> bool:
    if len(shells) < 8:
        return False
    tail = [abs(s) for s in shells[-6:]]
    return all(tail[i + 1] > tail[i] for i in range(5)) and tail[-1] > 1e3 * abs(math.fsum(shells))


def _lemma1_sum(a: float, bs, cs, zs, slots, n_idx: int, max_order: int, tol: float,
                strategy: str, gtol: float) -> SeriesResult:
    """Shared engine for the triangular expansion.

    ``slots[k]`` gives for each factor k the row of the (n_idx) index matrices to
    use; this is the identity for the full expansion and skips the deleted slot
    in the reduced form.
    """
    MA, MB = _index_matrices(n_idx) if n_idx >= 1 else (np.zeros((0, 0)), np.zeros((0, 0)))
    gauss = _GaussCache(gtol)
    la_tab, sa_tab = _log_poch_array(a, max_order)
    lb = [_log_poch_array(b, max_order) for b in bs]
    lc = [_log_poch_array(c, max_order) for c in cs]
    shells: list[float] = []
    converged = False
    terms = 0
    diverged = False
    for order in range(max_order + 1):
        M = _shell_multi_indices(n_idx, order)
        if M.shape[0] == 0:
            shells.append(0.0)
            continue
        K = M.shape[0]
        if M.shape[1]:
            Aall = M @ MA.T
            Ball = M @ MB.T
        else:
            Aall = np.zeros((K, max(n_idx, 1)), dtype=np.int64)
            Ball = np.zeros((K, max(n_idx, 1)), dtype=np.int64)
        Atot = Aall[:, -1] if n_idx >= 1 else np.zeros(K, dtype=np.int64)
        logt = la_tab[Atot] - _log_factorials(M)
        sgn = sa_tab[Atot].copy()
        for f, row in enumerate(slots):
            A = Aall[:, row]
            B = Ball[:, row]
            logt = logt + lb[f][0][B] - lc[f][0][B]
            sgn = sgn * lb[f][1][B] * lc[f][1][B]
            zf = zs[f]
            with np.errstate(divide="ignore"):
                logt = logt + np.where(B > 0, B * math.log(abs(zf)) if zf != 0 else -np.inf, 0.0)
            if zf < 0:
                sgn = sgn * np.where(B % 2 == 1, -1.0, 1.0)
            g = np.array([gauss(a + int(Ai), bs[f] + int(Bi), cs[f] + int(Bi), zf)
                          for Ai, Bi in zip(A, B)])
            with np.errstate(divide="ignore"):
                logt = logt + np.log(np.abs(g))
            sgn = sgn * np.sign(g)
        vals = sgn * np.exp(logt)
        vals[sgn == 0] = 0.0
        shells.append(math.fsum(vals.tolist()))
        terms += K
        if _shell_converged(shells, tol):
            converged = True
            break
        if _diverging(shells):
            diverged = True
            break
    tail = abs(shells[-1])
    if len(shells) >= 2 and shells[-2] != 0:
        r = abs(shells[-1] / shells[-2])
        if r < 1:
            tail = max(tail, abs(shells[-1]) * r / (1 - r))
    return SeriesResult(math.fsum(shells), max(terms, 1), tail, strategy,
                        converged and not diverged, {"diverged": diverged, "shells": len(shells)})


def fa_decompose_lemma1(params: FAParams, z: Sequence[float], max_order: int = 60,
                        tol: float = 1e-13) -> SeriesResult:
    """F_A^(n) as a sum over triangular multi-indices of products of n Gauss functions.

    Each term is ``(a)_{A(n,n)} / prod m_{i,j}!`` times, for k = 1..n,
    ``(b_k)_B/(c_k)_B z_k^B F(a + A(k,n), b_k + B; c_k + B; z_k)`` with
    ``B = B(k,n)``. Growing shells are reported via ``converged=False``.
    """
    z = _check_z(params, z)
    if np.any(z >= 1):
        raise DomainError("every z_i must be < 1")
    n = params.n
    return _lemma1_sum(params.a, params.b, params.c, z.tolist(), list(range(n)), n,
                       max_order, tol, "decomposition", 1e-15)


def fa_reduced_corollary1(params: FAParams, l: int, z: Sequence[float], max_order: int = 60,
                          tol: float = 1e-13) -> SeriesResult:
    """F_A^(n-1) with the l-th (1-based) parameter pair of ``params`` deleted.

    ``z`` holds the n-1 remaining arguments in their original order. Factors
    before the deleted slot use ``A(k, n-1), B(k, n-1)``; factors after it use
    ``A(k-1, n-1), B(k-1, n-1)``.
    """
    n = params.n
    if n < 2:
        raise DomainError("the reduced expansion needs n >= 2")
    if not 1 <= l <= n:
        raise DomainError(f"slot l={l} outside 1..{n}")
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != n - 1:
        raise DomainError(f"expected {n - 1} arguments, got {z.size}")
    if np.any(z >= 1):
        raise DomainError("every z_i must be < 1")
    keep = [k for k in range(n) if k != l - 1]
    bs = [params.b[k] for k in keep]
    cs = [params.c[k] for k in keep]
    # factor for original slot k (1-based) uses row k-1 when k < l, row k-2 when k > l
    slots = [k if k < l - 1 else k - 1 for k in keep]
    return _lemma1_sum(params.a, bs, cs, z.tolist(), slots, n - 1, max_order, tol,
                       "decomposition", 1e-15)


def fa_decompose_recursive(params: FAParams, z: Sequence[float], max_order: int = 60,
                           tol: float = 1e-13) -> SeriesResult:
    """F_A^(n) through the expansion in F(.;z_1) times F_A^(n-1)(.; z_2..z_n)."""
    z = _check_z(params, z)
    if params.n < 2:
        raise DomainError("the recursive expansion needs n >= 2")
    if np.any(z >= 1):
        raise DomainError("every z_i must be < 1")
    gauss = _GaussCache(1e-15)
    memo: dict = {}
    return _recursive(params.a, params.b, params.c, tuple(z.tolist()), max_order, tol, gauss, memo)


def _recursive(a, bs, cs, zs, max_order, tol, gauss, memo) -> SeriesResult:
    key = (a, bs, cs)
    if key in memo:
        return memo[key]
    n = len(bs)
    if n == 1:
        v = gauss(a, bs[0], cs[0], zs[0])
        res = SeriesResult(v, 1, 0.0, "decomposition")
        memo[key] = res
        return res
    shells: list[float] = []
    converged = False
    diverged = False
    terms = 0
    for order in range(max_order + 1):
        comp = _compositions(order, n - 1)
        vals = []
        for mm in comp:
            M = int(mm.sum())
            lt, st = log_pochhammer(a, M)
            l1, s1 = log_pochhammer(bs[0], M)
            l2, s2 = log_pochhammer(cs[0], M)
            lt += l1 - l2
            st *= s1 * s2
            if zs[0] == 0 and M > 0:
                continue
            if M:
                lt += M * math.log(abs(zs[0]))
                st *= -1.0 if (zs[0] < 0 and M % 2) else 1.0
            for j, mj in enumerate(mm, start=1):
                mj = int(mj)
                if mj == 0:
                    continue
                if zs[j] == 0:
                    st = 0.0
                    break
                lb_, sb_ = log_pochhammer(bs[j], mj)
                lc_, sc_ = log_pochhammer(cs[j], mj)
                lt += lb_ - lc_ - math.lgamma(mj + 1.0) + mj * math.log(abs(zs[j]))
                st *= sb_ * sc_ * (-1.0 if (zs[j] < 0 and mj % 2) else 1.0)
            if st == 0.0:
                continue
            g = gauss(a + M, bs[0] + M, cs[0] + M, zs[0])
            inner = _recursive(a + M,
                               tuple(bs[j] + int(mm[j - 1]) for j in range(1, n)),
                               tuple(cs[j] + int(mm[j - 1]) for j in range(1, n)),
                               zs[1:], max_order, tol, gauss, memo)
            vals.append(st * math.exp(lt) * g * inner.value)
        terms += len(comp)
        shells.append(math.fsum(vals))
        if _shell_converged(shells, tol):
            converged = True
            break
        if _diverging(shells):
            diverged = True
            break
    tail = abs(shells[-1])
    res = SeriesResult(math.fsum(shells), max(terms, 1), tail, "decomposition",
                       converged and not diverged, {"diverged": diverged})
    memo[key] = res
    return res


def lemma2_identity(a: float, b: Sequence[float], max_order: int = 60) -> tuple[float, float]:
    """Truncated multi-index sum and its gamma-function closed form.

    The sum runs over triangular multi-indices of total order <= ``max_order``
    of ``(a)_{A(n,n)} / prod m! * prod_k (b_k)_B (a - b_k)_{A - B} / (a)_A`` with
    ``A = A(k,n), B = B(k,n)``. The closed form is
    ``Gamma(a - sum b) Gamma(a)^(n-1) / prod Gamma(a - b_k)``.
    """
    b = [float(v) for v in b]
    n = len(b)
    if n < 1:
        raise DomainError("need at least one b")
    if _is_nonpositive_int(a):
        raise DomainError(f"a={a} is zero or a negative integer")
    if not a > sum(b):
        raise DomainError(f"need a > sum(b); a={a}, sum(b)={sum(b)}")
    lg, sg = _lgamma_signed(a - sum(b))
    lga, sga = _lgamma_signed(a)
    lg += (n - 1) * lga
    sg *= sga ** (n - 1)
    for bk in b:
        l_, s_ = _lgamma_signed(a - bk)
        lg -= l_
        sg *= s_
    rhs = sg * math.exp(lg)

    MA, MB = _index_matrices(n)
    la, sa = _log_poch_array(a, max_order)
    lbs = [_log_poch_array(bk, max_order) for bk in b]
    lab = [_log_poch_array(a - bk, max_order) for bk in b]
    parts: list[float] = []
    for order in range(max_order + 1):
        M = _shell_multi_indices(n, order)
        if M.shape[0] == 0:
            continue
        if M.shape[1]:
            A = M @ MA.T
            B = M @ MB.T
        else:
            A = np.zeros((M.shape[0], 1), dtype=np.int64)
            B = np.zeros((M.shape[0], 1), dtype=np.int64)
        Atot = A[:, -1]
        lt = la[Atot] - _log_factorials(M)
        st = sa[Atot].copy()
        for k in range(n):
            lt = lt + lbs[k][0][B[:, k]] + lab[k][0][A[:, k] - B[:, k]] - la[A[:, k]]
            st = st * lbs[k][1][B[:, k]] * lab[k][1][A[:, k] - B[:, k]] * sa[A[:, k]]
        vals = st * np.exp(lt)
        vals[st == 0] = 0.0
        parts.append(math.fsum(vals.tolist()))
    return math.fsum(parts), rhs


def lemma3_limit(params: FAParams) -> float:
    """Limit of ``prod z_k^(-b_k) F_A(a; b; c; 1 - 1/z)`` as all z_k -> 0+.

    Equals ``Gamma(a - sum b) / Gamma(a) * prod Gamma(c_k) / Gamma(c_k - b_k)``.
    """
    sb = sum(params.b)
    if not params.a > sb:
        raise DomainError(f"need a > sum(b); a={params.a}, sum(b)={sb}")
    lg, sg = _lgamma_signed(params.a - sb)
    l_, s_ = _lgamma_signed(params.a)
    lg -= l_
    sg *= s_
    for bk, ck in zip(params.b, params.c):
        if _is_nonpositive_int(ck - bk):
            raise DomainError(f"c - b = {ck - bk} is zero or a negative integer")
        l1, s1 = _lgamma_signed(ck)
        l2, s2 = _lgamma_signed(ck - bk)
        lg += l1 - l2
        sg *= s1 * s2
    return sg * math.exp(lg)


# ---------------------------------------------------------------------------
# Laplace integral


def fa_laplace_batch(params: FAParams, Z, step: float = LAPLACE_STEP) -> np.ndarray:
    """Laplace-integral values of F_A for each row of ``Z`` (shape (N, n)).

    Requires ``a > 0`` and, per row, ``sum of positive z_i < 1``. The integrand
    is written as ``Phi(t) - exp(-lam t)`` with ``lam = -sum b_i z_i / c_i``;
    the subtracted part integrates to ``(1 + lam)^(-a)`` and the remainder is
    O(t^2) at the origin. Nodes lie on the fixed lattice ``v = j * step`` so
    that values depend smoothly on ``Z``.
    """
    a = params.a
    if not a > 0:
        raise DomainError(f"Laplace representation needs a > 0, got {a}")
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Z.shape[1] != params.n:
        raise DomainError(f"expected {params.n} columns, got {Z.shape[1]}")
    zpos = np.sum(np.clip(Z, 0.0, None), axis=1)
    if np.any(zpos >= 1):
        raise DomainError("Laplace representation needs sum of positive z_i < 1")
    b = np.asarray(params.b)
    c = np.asarray(params.c)
    lam = -(Z * (b / c)).sum(axis=1)
    out = np.empty(len(Z))
    chunk = max(1, 400_000 // 512)
    lg = math.lgamma(a)
    for s in range(0, len(Z), chunk):
        Zc = Z[s:s + chunk]
        lc = lam[s:s + chunk]
        decay = 1.0 - np.max(zpos[s:s + chunk], initial=0.0)
        big = max(float(np.max(np.abs(lc), initial=0.0)), float(np.max(np.abs(Zc), initial=0.0)), 1.0)
        vmin = -(40.0 + 2.0 * math.log(big)) / (a + 2.0) - math.log(big)
        vmax = math.log(60.0 / decay)
        j = np.arange(math.floor(vmin / step), math.ceil(vmax / step) + 1)
        v = j * step
        t = np.exp(v)
        phi = np.ones((len(Zc), len(t)))
        for i in range(params.n):
            phi *= sc.hyp1f1(b[i], c[i], Zc[:, i:i + 1] * t[None, :])
        w = np.exp(a * v - t - lg)
        rem = (phi - np.exp(-lc[:, None] * t[None, :])) @ w * step
        out[s:s + chunk] = (1.0 + lc) ** (-a) + rem
    return out


def fa_laplace(params: FAParams, z: Sequence[float], step: float = LAPLACE_STEP) -> SeriesResult:
    """Single-point Laplace-integral evaluation of F_A."""
    z = _check_z(params, z)
    v = fa_laplace_batch(params, z[None, :], step)[0]
    # halving the step changes nothing at this accuracy; use it as the estimate
    v2 = fa_laplace_batch(params, z[None, :], 2 * step)[0]
    return SeriesResult(float(v), int(1), abs(v - v2), "laplace")


def fa(params: FAParams, z: Sequence[float], tol: float = 1e-10, check: bool = False,
       threshold: float = DIRECT_THRESHOLD) -> SeriesResult:
    """Evaluate F_A^(n) choosing between the direct series and the Laplace integral.

    ``sum |z| <= threshold`` uses the direct series. Larger arguments use the
    Laplace integral when all positive parts sum below one and ``a > 0``
    (mixed signs included); otherwise the direct series is summed further.
    With ``check=True`` both strategies run in the band
    ``threshold <= sum |z| <= 0.9`` and must agree to 1e-7.
    """
    z = _check_z(params, z)
    if np.any(z >= 1):
        raise DomainError("every z_i must be < 1")
    s = float(np.sum(np.abs(z)))
    if s <= threshold:
        res = fa_direct(params, z, tol)
        if check and s >= threshold - 1e-12 and params.a > 0:
            _cross_check(res, fa_laplace(params, z))
        return res
    if np.any(z > 0) and s >= 1:
        raise DomainError(f"sum |z| = {s} >= 1 with positive components")
    if params.a > 0 and np.sum(np.clip(z, 0, None)) < 1:
        res = fa_laplace(params, z)
        if check and s <= OVERLAP_UPPER:
            _cross_check(res, fa_direct(params, z, tol))
        return res
    if s < 1:
        return fa_direct(params, z, tol, max_degree=2000)
    raise DomainError("no convergent representation for these arguments")


def _cross_check(r1: SeriesResult, r2: SeriesResult, rtol: float = 1e-7):
    if abs(r1.value - r2.value) > rtol * max(abs(r1.value), abs(r2.value), 1e-300):
        raise StrategyMismatch(
            f"{r1.strategy}={r1.value!r} vs {r2.strategy}={r2.value!r}")


def fa_derivative(params: FAParams, z: Sequence[float], i: int, tol: float = 1e-10) -> float:
    """dF_A/dz_i = a b_i / c_i * F_A(a+1; b + e_i; c + e_i; z), ``i`` 1-based."""
    if not 1 <= i <= params.n:
        raise DomainError(f"slot i={i} outside 1..{params.n}")
    bi = params.b[i - 1]
    if bi == 0 or params.a == 0:
        return 0.0
    return params.a * bi / params.c[i - 1] * fa(params.shift(i - 1), z, tol).value

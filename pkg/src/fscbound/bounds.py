"""Random-coding upper bounds on the decoding-failure probability over the
Gilbert-Elliott channel, minimized over the Gallager parameter rho.

All tables are 2x2 arrays indexed [s0, sN] with 0 = good, 1 = bad. Bounds
are assembled in the log domain; ``log_*`` functions return natural logs.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

from .markov import B, G, log_mgf_matrix, occupancy_pmf, stationary
from .specialfn import LOG2, LOG_ZERO, log_sum_exp

GRID_POINTS = 201
GOLDEN_TOL = 1e-6
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CodeParams:
    """Block length ``n`` and rate in nats per symbol; M = exp(n * rate)."""

    n: int
    rate: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"block length must be a positive integer, got {self.n}")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    @classmethod
    def from_bits(cls, n, rate_bits):
        """Rate given in bits per symbol, so that M = 2^(n * rate_bits)."""
        return cls(n, rate_bits * LOG2)

    @classmethod
    def with_codewords(cls, n, m_codewords):
        """Code whose codebook size is exactly ``m_codewords``."""
        if m_codewords <= 1:
            raise ValueError(f"codebook size must exceed 1, got {m_codewords}")
        return cls(n, math.log(m_codewords) / n)

    @property
    def log_m(self):
        return self.n * self.rate

    @property
    def m_codewords(self):
        return math.exp(self.log_m)


@dataclass(frozen=True)
class BoundResult:
    per_transition: np.ndarray
    rho_star: float | None  # None when rho was minimized entry by entry
    rho_per_transition: np.ndarray
    averaged: float
    order: str
    weights: tuple

    def clamped(self):
        """Table clamped to [0, 1] for presentation."""
        return np.minimum(self.per_transition, 1.0)


def log_gallager_g(eps, rho):
    """ln G(eps, rho) = -rho ln 2 + (1 + rho) ln(eps^(1/(1+rho)) + (1-eps)^(1/(1+rho)))."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"crossover must lie in [0, 1], got {eps}")
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    s = 1.0 / (1.0 + rho)
    parts = [s * math.log(v) for v in (eps, 1.0 - eps) if v > 0]
    return -rho * LOG2 + (1.0 + rho) * log_sum_exp(parts)


def gallager_g(eps, rho):
    return math.exp(log_gallager_g(eps, rho))


def e0_type(rho, eta_g, params):
    """Per-type exponent: -(ln G_b + eta_g ln(G_g / G_b))."""
    lg = log_gallager_g(params.eps_g, rho)
    lb = log_gallager_g(params.eps_b, rho)
    return -(lb + eta_g * (lg - lb))


def log_bound_typesum(params, code, rho, table=None):
    """Log of the bound summed over occupancy types.

    ``table`` may pass a precomputed OccupancyTable for (params, code.n).
    """
    n = code.n
    if table is None:
        table = occupancy_pmf(params, n)
    lg = log_gallager_g(params.eps_g, rho)
    lb = log_gallager_g(params.eps_b, rho)
    m = np.arange(n + 1)
    weight = m * lg + (n - m) * lb
    with np.errstate(divide="ignore"):
        logp = np.log(table.p)
    out = np.empty((2, 2))
    for c in (G, B):
        for d in (G, B):
            out[c, d] = log_sum_exp(logp[:, c, d] + weight) + rho * code.log_m
    return out


def bound_typesum(params, code, rho, table=None):
    return np.exp(log_bound_typesum(params, code, rho, table))


def _log_matrix_power(mat, n):
    """Entrywise log of mat^n for a nonnegative 2x2 matrix, by squaring
    with a running scale factor so nothing under- or overflows."""
    result = np.eye(2)
    result_log = 0.0
    base = np.array(mat, dtype=float)
    base_log = 0.0
    while True:
        if n & 1:
            result = result @ base
            result_log += base_log
            top = result.max()
            if top == 0:
                return np.full((2, 2), LOG_ZERO)
            result /= top
            result_log += math.log(top)
        n >>= 1
        if not n:
            break
        base = base @ base
        base_log *= 2.0
        top = base.max()
        if top == 0:
            return np.full((2, 2), LOG_ZERO)
        base /= top
        base_log += math.log(top)
    with np.errstate(divide="ignore"):
        return np.log(result) + result_log


def log_bound_matrixpower(params, code, rho):
    """Log of e(s0)^T A^N e(sN) e^(rho N R) with rows of the transition
    matrix weighted by the Gallager function of the departing state."""
    gg = gallager_g(params.eps_g, rho)
    gb = gallager_g(params.eps_b, rho)
    a, b = params.alpha, params.beta
    mat = np.array([[(1.0 - a) * gg, a * gg], [b * gb, (1.0 - b) * gb]])
    return _log_matrix_power(mat, code.n) + rho * code.log_m


def bound_matrixpower(params, code, rho):
    return np.exp(log_bound_matrixpower(params, code, rho))


def log_bound_rare(alpha_c, beta_c, eps_g, eps_b, code, rho):
    """Log of the rare-transition bound; alpha_c, beta_c are the expected
    numbers of g->b and b->g transitions per block (N alpha, N beta)."""
    lg = log_gallager_g(eps_g, rho)
    lb = log_gallager_g(eps_b, rho)
    y = code.n * (lg - lb)
    return code.n * lb + rho * code.log_m + log_mgf_matrix(alpha_c, beta_c, y)


def bound_rare(alpha_c, beta_c, eps_g, eps_b, code, rho):
    return np.exp(log_bound_rare(alpha_c, beta_c, eps_g, eps_b, code, rho))


def minimize_rho(objective, grid_points=GRID_POINTS, tol=GOLDEN_TOL):
    """Minimize ``objective`` over rho in [0, 1].

    A uniform grid locates the best cell, then golden-section search narrows
    the bracket around it. Returns (rho, value) for the smallest value seen,
    so a poor refinement can only loosen a bound, never invalidate it.
    """
    best = [None, math.inf]

    def f(rho):
        v = objective(rho)
        if not math.isfinite(v):
            raise ValueError(f"objective is not finite at rho={rho}: {v}")
        if v < best[1]:
            best[0], best[1] = rho, v
        return v

    grid = np.linspace(0.0, 1.0, grid_points)
    values = [f(float(r)) for r in grid]
    i = int(np.argmin(values))
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, grid_points - 1)])
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
    return best[0], best[1]


def _minimized(log_table_fn, weights, order):
    """Shared driver: minimize either each entry or the weighted scalar."""
    if order not in ("per_entry", "averaged"):
        raise ValueError(f"order must be 'per_entry' or 'averaged', got {order!r}")
    w = np.asarray(weights, dtype=float)
    cached = functools.lru_cache(maxsize=None)(log_table_fn)

    if order == "per_entry":
        table = np.empty((2, 2))
        rhos = np.empty((2, 2))
        for c in (G, B):
            for d in (G, B):
                rho, val = minimize_rho(lambda r, c=c, d=d: cached(r)[c, d])
                table[c, d] = math.exp(val)
                rhos[c, d] = rho
        rho_star = None
    else:
        log_w = np.log(w)[:, None]
        rho_star, _ = minimize_rho(lambda r: log_sum_exp(cached(r) + log_w))
        table = np.exp(cached(rho_star))
        rhos = np.full((2, 2), rho_star)
    averaged = float(w @ table.sum(axis=1))
    return BoundResult(table, rho_star, rhos, averaged, order, tuple(w))


def gallager_bound(params, code, *, order="per_entry", weights=None):
    """Matrix-power bound minimized over rho.

    ``weights`` is the law of s0 used for the averaged scalar; the
    stationary law of the chain by default.
    """
    if weights is None:
        weights = stationary(params)
    return _minimized(lambda r: log_bound_matrixpower(params, code, r), weights, order)


def rare_bound(alpha_c, beta_c, eps_g, eps_b, code, *, order="per_entry", weights=None):
    """Rare-transition bound minimized over rho."""
    if weights is None:
        weights = (beta_c / (alpha_c + beta_c), alpha_c / (alpha_c + beta_c))
    return _minimized(
        lambda r: log_bound_rare(alpha_c, beta_c, eps_g, eps_b, code, r), weights, order
    )

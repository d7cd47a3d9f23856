"""Exact random-coding failure probabilities.

A decoder assigns every codeword an integer score, the number of
disagreements with the received word, with good-state disagreements
weighted by ``gamma`` and rounded up: ``ceil(gamma * e_g) + e_b``.
Minimum-distance decoding is gamma = 1. The transmitted word fails when a
competitor scores at least as well (ties as errors) or when a tie is broken
against it (random tie breaking).

Conditioned on the occupancy n_g, the transmitted word's score and each
competitor's score are independent integer random variables, so the
conditional failure probability is a single sum over the transmitted score.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .markov import B, G, occupancy_pmf, stationary
from .specialfn import (
    LOG2,
    LOG_ZERO,
    log_binomial_pmf_row,
    log_binomial_row,
    log_sum_exp,
)

RULES = ("md", "ml")
TIES = ("error", "random")
_INTEGER_TOL = 1e-12
_SERIES_CUTOFF = 0.01


@dataclass(frozen=True)
class DecoderSpec:
    rule: str = "ml"
    ties: str = "error"

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}, got {self.rule!r}")
        if self.ties not in TIES:
            raise ValueError(f"ties must be one of {TIES}, got {self.ties!r}")


@dataclass(frozen=True)
class ExactResult:
    per_transition: np.ndarray
    averaged: float
    per_type: np.ndarray
    decoder: DecoderSpec
    m_codewords: float
    weights: tuple


def ceil_tol(x):
    """Ceiling that snaps to the nearest integer within 1e-12."""
    r = round(x)
    if abs(x - r) <= _INTEGER_TOL:
        return int(r)
    return math.ceil(x)


def gamma(params, decoder):
    """Weight of a good-state disagreement relative to a bad-state one."""
    if decoder.rule == "md" or params.eps_g == params.eps_b:
        return 1.0
    if params.eps_g <= 0.0:
        raise ValueError("maximum-likelihood weights need eps_g > 0 (gamma is infinite at eps_g = 0)")
    lg = math.log(params.eps_g) - math.log1p(-params.eps_g)
    lb = math.log(params.eps_b) - math.log1p(-params.eps_b)
    return lg / lb


def score_shifts(n_g, gam):
    return np.array([ceil_tol(gam * e) for e in range(n_g + 1)], dtype=np.int64)


def log_score_distribution(log_w_good, log_w_bad, shifts):
    """ln of sum over (i, j) with shifts[i] + j = s of w_good[i] w_bad[j]."""
    size = int(shifts[-1]) + len(log_w_bad)
    return kernels.accumulate_scores(
        np.ascontiguousarray(log_w_good, dtype=np.float64),
        np.ascontiguousarray(log_w_bad, dtype=np.float64),
        np.ascontiguousarray(shifts, dtype=np.int64),
        size,
    )


def ball_size_md(n, radius):
    """ln of the Hamming-ball size sum_{j <= radius} C(n, j)."""
    if radius < 0:
        return LOG_ZERO
    if radius >= n:
        return n * LOG2
    return log_sum_exp(log_binomial_row(n)[: radius + 1])


def ball_size_ml(n_g, n_b, gam, c_threshold):
    """ln of the number of words whose weighted score is at most c_threshold."""
    if gam < 1:
        raise ValueError(f"gamma must be >= 1, got {gam}")
    if c_threshold < 0:
        return LOG_ZERO
    counts = log_score_distribution(log_binomial_row(n_g), log_binomial_row(n_b), score_shifts(n_g, gam))
    return log_sum_exp(counts[: c_threshold + 1])


@dataclass(frozen=True)
class _TypeScores:
    log_sent: np.ndarray  # ln Pr(transmitted word scores s)
    log_rival: np.ndarray  # ln Pr(a random competitor scores s)
    log_rival_cdf: np.ndarray  # ln Pr(competitor scores <= s)


@functools.lru_cache(maxsize=4096)
def _type_scores(n_g, n, eps_g, eps_b, gam):
    n_b = n - n_g
    shifts = score_shifts(n_g, gam)
    sent = log_score_distribution(log_binomial_pmf_row(n_g, eps_g), log_binomial_pmf_row(n_b, eps_b), shifts)
    rival = log_score_distribution(log_binomial_row(n_g), log_binomial_row(n_b), shifts) - n * LOG2
    cdf = np.logaddexp.accumulate(rival)
    # the last cdf value is 1 up to rounding
    cdf = np.minimum(cdf, 0.0)
    return _TypeScores(sent, rival, cdf)


def _one_minus_tie_share(w, m):
    """1 - E[1/(K+1)] for K ~ Binomial(m - 1, w), extended to real m.

    E[1/(K+1)] = (1 - (1-w)^m) / (m w). Small m w uses the alternating
    series (m-1)w/2 - (m-1)(m-2)w^2/6 + ... to avoid cancellation.
    """
    w = np.clip(w, 0.0, 1.0)
    out = np.empty_like(w)
    small = m * w < _SERIES_CUTOFF
    ws = w[small]
    term = np.ones_like(ws)
    acc = np.zeros_like(ws)
    for k in range(1, 40):
        term = term * (-(m - k)) * ws / (k + 1)
        acc -= term
        if not np.any(np.abs(term) > 1e-18 * np.abs(acc)):
            break
    out[small] = acc
    wl = w[~small]
    with np.errstate(divide="ignore"):
        hit = -np.expm1(m * np.log1p(-wl))
    out[~small] = 1.0 - hit / (m * wl)
    return out


def failure_given_score(scores, t, ties):
    """Failure probability for each transmitted score, with t = M - 1
    independent competitors (t may be real)."""
    n_s = len(scores.log_sent)
    if t <= 0:
        return np.zeros(n_s)
    cdf = scores.log_rival_cdf[:n_s]
    with np.errstate(divide="ignore", invalid="ignore"):
        if ties == "error":
            return -np.expm1(t * np.log1p(-np.exp(cdf)))
        below = np.concatenate(([LOG_ZERO], cdf[:-1]))
        log_not_beaten = np.log1p(-np.exp(below))  # ln(1 - a)
        beaten = -np.expm1(t * log_not_beaten)
        w = np.exp(scores.log_rival[:n_s] - log_not_beaten)
        w = np.where(np.isfinite(w), w, 1.0)
        lost_tie = np.exp(t * log_not_beaten) * _one_minus_tie_share(w, t + 1.0)
    return np.clip(beaten + lost_tie, 0.0, 1.0)


def _cond_error(n_g, n, eps_g, eps_b, gam, t, ties):
    scores = _type_scores(n_g, n, eps_g, eps_b, gam)
    pf = failure_given_score(scores, t, ties)
    return min(1.0, math.fsum(np.exp(scores.log_sent) * pf))


def ge_cond_error(n_g, n, params, m_codewords, decoder):
    """Failure probability given that n_g of the n slots are good."""
    if not 0 <= n_g <= n:
        raise ValueError(f"n_g must lie in [0, {n}], got {n_g}")
    if m_codewords < 1:
        raise ValueError(f"codebook size must be >= 1, got {m_codewords}")
    gam = gamma(params, decoder)
    return _cond_error(n_g, n, params.eps_g, params.eps_b, gam, m_codewords - 1.0, decoder.ties)


def ge_exact(params, code, decoder, *, table=None, weights=None):
    """Exact failure probability averaged over occupancy types.

    ``code.m_codewords`` is used as a real number: M - 1 competitors enter
    only through (1 - q)^(M - 1) and the tie-share closed form, both of
    which extend smoothly to real M and are exact at integer M.
    """
    n = code.n
    if table is None:
        table = occupancy_pmf(params, n)
    if weights is None:
        weights = stationary(params)
    gam = gamma(params, decoder)
    t = math.expm1(code.log_m)
    per_type = np.array(
        [_cond_error(m, n, params.eps_g, params.eps_b, gam, t, decoder.ties) for m in range(n + 1)]
    )
    per_transition = np.einsum("m,mcd->cd", per_type, table.p)
    w = np.asarray(weights, dtype=float)
    averaged = float(w @ per_transition.sum(axis=1))
    return ExactResult(per_transition, averaged, per_type, decoder, code.m_codewords, tuple(w))


def bsc_exact(n, p, m_codewords, ties="error"):
    """Exact random-coding failure probability on a memoryless BSC(p)."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"crossover must lie in [0, 0.5], got {p}")
    if m_codewords < 1:
        raise ValueError(f"codebook size must be >= 1, got {m_codewords}")
    if ties not in TIES:
        raise ValueError(f"ties must be one of {TIES}, got {ties!r}")
    return _cond_error(n, n, p, p, 1.0, m_codewords - 1.0, ties)

"""Two-state (good/bad) Markov chain machinery.

State index 0 is the good state ``g``, index 1 the bad state ``b``. Occupancy
``n_g`` counts the good slots among s_0, ..., s_{N-1}: the state that governs
each of the N channel uses. s_N is the state the chain ends in.
"""

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .specialfn import LOG_ZERO, bessel_i_ratio

G, B = 0, 1
STATES = ("g", "b")


def state_index(s):
    if s in (G, B):
        return int(s)
    try:
        return STATES.index(s)
    except ValueError:
        raise ValueError(f"unknown state {s!r}, expected 'g' or 'b'") from None


@dataclass(frozen=True)
class ChannelParams:
    """Gilbert-Elliott channel: transition probabilities and per-state
    crossover probabilities."""

    alpha: float  # g -> b
    beta: float  # b -> g
    eps_g: float
    eps_b: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("eps_g", "eps_b"):
            v = getattr(self, name)
            if not 0.0 <= v < 0.5:
                raise ValueError(f"{name} must lie in [0, 0.5), got {v}")
        if self.eps_g > self.eps_b:
            raise ValueError(
                f"states are labelled so that eps_g <= eps_b, got eps_g={self.eps_g} > eps_b={self.eps_b}"
            )

    @property
    def transition_matrix(self):
        a, b = self.alpha, self.beta
        return np.array([[1.0 - a, a], [b, 1.0 - b]])

    @property
    def lam(self):
        """alpha beta / ((1 - alpha)(1 - beta)), the hypergeometric argument."""
        return self.alpha * self.beta / ((1.0 - self.alpha) * (1.0 - self.beta))

    @property
    def eps(self):
        return np.array([self.eps_g, self.eps_b])


def stationary(params):
    """Stationary law (pi_g, pi_b) of the state chain."""
    total = params.alpha + params.beta
    if total == 0:
        raise ValueError("alpha + beta = 0: the chain has no unique stationary law")
    pi_g = params.beta / total
    return pi_g, 1.0 - pi_g


@dataclass(frozen=True)
class OccupancyTable:
    """Joint PMF ``p[m, s0, sN] = Pr(n_g = m, s_N = sN | s_0 = s0)``."""

    n: int
    p: np.ndarray

    def __post_init__(self):
        if self.p.shape != (self.n + 1, 2, 2):
            raise ValueError(f"table shape {self.p.shape} does not match n={self.n}")
        self.p.setflags(write=False)

    def conditional(self, s0):
        """Pr(n_g = m | s_0) as an array over m."""
        return self.p[:, state_index(s0), :].sum(axis=1)

    def marginal(self, weights):
        """Pr(n_g = m) when s_0 is drawn from ``weights`` (pi_g, pi_b)."""
        w = np.asarray(weights, dtype=float)
        return np.einsum("msd,s->m", self.p, w)

    def end_state_matrix(self):
        """Sum over m: the N-step transition matrix."""
        return self.p.sum(axis=0)

    def max_abs_diff(self, other):
        return float(np.abs(self.p - other.p).max())


def _log_series(p, q, log_lam, log_fact, shift=0):
    """ln sum_k C(p, k - shift) C(q, k) lam^k over all k with nonzero terms.

    ``log_fact[j] = ln j!``; absolute error of each term is a few ulps of
    ln(N!), ample for probabilities reported to 1e-10.
    """
    if p < 0 or q < 0:
        return LOG_ZERO
    ks = np.arange(shift, min(p + shift, q) + 1)
    if ks.size == 0:
        return LOG_ZERO
    if log_lam == LOG_ZERO:
        return 0.0 if shift == 0 else LOG_ZERO
    j = ks - shift
    terms = (log_fact[p] - log_fact[j] - log_fact[p - j]) + (log_fact[q] - log_fact[ks] - log_fact[q - ks])
    terms += ks * log_lam
    top = terms.max()
    return top + math.log(np.exp(terms - top).sum())


def occupancy_pmf(params, n, *, gb_window="leading"):
    """Closed-form joint occupancy / final-state PMF.

    The good-to-good and bad-to-bad entries are differences of two terminating
    hypergeometric series; they are summed here after applying Pascal's rule
    to the difference, which keeps every term nonnegative.

    ``gb_window="trailing"`` swaps in an alternative expression for the g->b
    entry that is exact when occupancy counts s_1..s_N instead of
    s_0..s_{N-1}. It does *not* match this module's convention; it exists to
    document that one-slot shift.
    """
    if n < 1:
        raise ValueError(f"block length must be >= 1, got {n}")
    if gb_window not in ("leading", "trailing"):
        raise ValueError(f"gb_window must be 'leading' or 'trailing', got {gb_window!r}")
    a, b = params.alpha, params.beta
    if not (0 < a < 1 and 0 < b < 1):
        return occupancy_pmf_genmatrix(params, n)

    la, lb = math.log1p(-a), math.log1p(-b)
    log_alpha, log_beta = math.log(a), math.log(b)
    log_lam = math.log(params.lam)
    log_fact = np.array([math.lgamma(j + 1.0) for j in range(n + 1)])
    series = functools.partial(_log_series, log_lam=log_lam, log_fact=log_fact)
    p = np.zeros((n + 1, 2, 2))
    for m in range(n + 1):
        base = m * la + (n - m) * lb
        # F(-(N-m), -m) - F(-(N-m-1), -m) = sum_k C(N-m-1, k-1) C(m, k) lam^k
        if 0 < m < n:
            p[m, G, G] = math.exp(base + series(n - m - 1, m, shift=1))
            # F(-(N-m), -m) - F(-(N-m), -(m-1)) = sum_k C(m-1, k-1) C(N-m, k) lam^k
            p[m, B, B] = math.exp(base + series(m - 1, n - m, shift=1))
        if gb_window == "leading" and m >= 1:
            log_gb = log_alpha + (m - 1) * la + (n - m) * lb + series(n - m, m - 1)
            p[m, G, B] = math.exp(log_gb)
        elif gb_window == "trailing" and m < n:
            log_gb = log_alpha + m * la + (n - m - 1) * lb + series(n - m - 1, m)
            p[m, G, B] = math.exp(log_gb)
        if m < n:
            log_bg = log_beta + m * la + (n - m - 1) * lb + series(n - m - 1, m)
            p[m, B, G] = math.exp(log_bg)
    p[n, G, G] = (1.0 - a) ** n
    p[0, B, B] = (1.0 - b) ** n
    return OccupancyTable(n, p)


def occupancy_pmf_genmatrix(params, n):
    """Joint PMF read off the N-th power of [[(1-a)x, a x], [b, 1-b]].

    Entry (c, d) of the power is a polynomial in x whose m-th coefficient is
    Pr(n_g = m, s_N = d | s_0 = c). Valid on the closed parameter box.
    """
    if n < 1:
        raise ValueError(f"block length must be >= 1, got {n}")
    a, b = params.alpha, params.beta
    # poly[c, d, m]: coefficient of x^m in entry (c, d)
    poly = np.zeros((2, 2, n + 1))
    poly[G, G, 0] = 1.0
    poly[B, B, 0] = 1.0
    for _ in range(n):
        from_g = np.zeros_like(poly)
        # multiplying on the right: column d of the product mixes columns g, b
        from_g[:, :, 1:] = poly[:, :, :-1]
        nxt = np.empty_like(poly)
        nxt[:, G, :] = (1.0 - a) * from_g[:, G, :] + b * poly[:, B, :]
        nxt[:, B, :] = a * from_g[:, G, :] + (1.0 - b) * poly[:, B, :]
        poly = nxt
    return OccupancyTable(n, np.ascontiguousarray(poly.transpose(2, 0, 1)))


def enumerate_paths_oracle(params, n):
    """Brute-force occupancy table from all 2^N state paths (N <= 20)."""
    if n > 20:
        raise ValueError(f"enumeration of 2^{n} paths refused; n must be <= 20")
    if n < 1:
        raise ValueError(f"block length must be >= 1, got {n}")
    P = params.transition_matrix
    p = np.zeros((n + 1, 2, 2))
    for s0 in (G, B):
        for tail in itertools.product((G, B), repeat=n):
            path = (s0,) + tail
            prob = 1.0
            for u, v in zip(path[:-1], path[1:]):
                prob *= P[u, v]
            n_g = path[:-1].count(G)
            p[n_g, s0, path[-1]] += prob
    return OccupancyTable(n, p)


@dataclass(frozen=True)
class OccupancyDensity:
    """Limiting law of the fractional good-state occupancy x = n_g / N when
    the per-slot transition probabilities scale as alpha/N and beta/N.

    ``alpha`` and ``beta`` are the rate constants (expected transitions out
    of each state over one block).
    """

    alpha: float
    beta: float

    @property
    def atom_at_1(self):
        """Mass of x = 1 given s0 = sN = g (no transition in the block)."""
        return math.exp(-self.alpha)

    @property
    def atom_at_0(self):
        """Mass of x = 0 given s0 = sN = b."""
        return math.exp(-self.beta)

    def density(self, x, s0, sN):
        """Continuous part of f(x, s_N = sN | s_0 = s0) for 0 < x < 1."""
        c, d = state_index(s0), state_index(sN)
        a, b = self.alpha, self.beta
        if not 0.0 < x < 1.0:
            return 0.0
        env = math.exp(-a * x - b * (1.0 - x))
        z = 2.0 * math.sqrt(a * b * x * (1.0 - x))
        if c != d:
            return (a if c == G else b) * env * bessel_i_ratio(0, z)
        # sqrt(a b x/(1-x)) I_1(z) rewritten as a b x I_1(z)/(z/2), finite at x -> 1
        weight = x if c == G else 1.0 - x
        return a * b * weight * env * bessel_i_ratio(1, z)

    def atom(self, s0, sN):
        """(location, mass) of the point mass in this entry, or None."""
        c, d = state_index(s0), state_index(sN)
        if c == d == G:
            return 1.0, self.atom_at_1
        if c == d == B:
            return 0.0, self.atom_at_0
        return None

    def _integral(self, fn, lo, hi):
        val, _ = integrate.quad(fn, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)
        return val

    def total_mass(self, s0):
        """Atoms plus integrated density over both end states; should be 1."""
        total = 0.0
        for sN in STATES:
            total += self._integral(lambda x, sN=sN: self.density(x, s0, sN), 0.0, 1.0)
            atom = self.atom(s0, sN)
            if atom:
                total += atom[1]
        return total

    def cdf(self, x, s0, sN=None):
        """Pr(X <= x [, S_end = sN] | S_start = s0)."""
        ends = STATES if sN is None else (sN,)
        if x < 0:
            return 0.0
        total = 0.0
        for end in ends:
            total += self._integral(lambda u, e=end: self.density(u, s0, e), 0.0, min(x, 1.0))
            atom = self.atom(s0, end)
            if atom and atom[0] <= x:
                total += atom[1]
        return total

    def mgf_quadrature(self, y, s0, sN):
        """E[e^{yX} 1{S_end = sN} | S_start = s0] by direct quadrature."""
        val = self._integral(lambda u: math.exp(y * u) * self.density(u, s0, sN), 0.0, 1.0)
        atom = self.atom(s0, sN)
        if atom:
            val += math.exp(y * atom[0]) * atom[1]
        return val


def occupancy_density_ctmc(alpha_n, beta_n):
    """Rare-transition occupancy law with rate constants alpha_n, beta_n > 0."""
    if alpha_n <= 0 or beta_n <= 0:
        raise ValueError(f"rate constants must be positive, got ({alpha_n}, {beta_n})")
    return OccupancyDensity(float(alpha_n), float(beta_n))


def log_mgf_matrix(alpha_n, beta_n, y):
    """Entrywise log of exp([[y - a, a], [b, -b]]).

    Closed-form 2x2 exponential. The eigenvalues t/2 +- s are always real
    (off-diagonal product a b >= 0); the diagonal entries are assembled from
    s + h and s - h with s^2 - h^2 = a b, so neither side cancels.
    """
    a, b = float(alpha_n), float(beta_n)
    half_trace = 0.5 * (y - a - b)
    h = 0.5 * (y - a + b)  # (A - t/2 I)[g, g]; the [b, b] entry is -h
    ab = a * b
    s = math.hypot(h, math.sqrt(ab))
    lam1, lam2 = half_trace + s, half_trace - s
    out = np.empty((2, 2))
    if 2.0 * s < 1e-9 * max(abs(lam1), abs(lam2), 1.0):
        # coincident eigenvalues: sinh(s)/s -> 1 + s^2/6, cosh(s) -> 1 + s^2/2
        sh = 1.0 + s * s / 6.0
        ch = 1.0 + s * s / 2.0
        with np.errstate(divide="ignore"):
            out[G, G] = half_trace + math.log(ch + h * sh)
            out[B, B] = half_trace + math.log(ch - h * sh)
            out[G, B] = half_trace + (math.log(a * sh) if a > 0 else LOG_ZERO)
            out[B, G] = half_trace + (math.log(b * sh) if b > 0 else LOG_ZERO)
        return out
    if h >= 0:
        s_plus = s + h
        s_minus = ab / s_plus if s_plus > 0 else 0.0
    else:
        s_minus = s - h
        s_plus = ab / s_minus
    decay = math.exp(-2.0 * s)
    lead = half_trace + s - math.log(2.0 * s)

    def _log(v):
        return math.log(v) if v > 0 else LOG_ZERO

    out[G, G] = lead + _log(s_plus + s_minus * decay)
    out[B, B] = lead + _log(s_minus + s_plus * decay)
    # sinh(s)/s = e^s (1 - e^{-2s}) / (2s)
    log_sinh_ratio = lead + math.log(-math.expm1(-2.0 * s))
    out[G, B] = log_sinh_ratio + _log(a)
    out[B, G] = log_sinh_ratio + _log(b)
    return out


def mgf_matrix(alpha_n, beta_n, y):
    """Matrix generating function of the limiting occupancy: entry (c, d) is
    E[e^{yX} 1{S_end = d} | S_start = c]."""
    return np.exp(log_mgf_matrix(alpha_n, beta_n, y))

"""Log-domain combinatorics and the few special functions the rest of the
package needs.

Every probability that can underflow is carried as a natural logarithm.
``LOG_ZERO`` (``-inf``) stands for log(0).
"""

import math

import numpy as np

LOG_ZERO = -math.inf
LOG2 = math.log(2.0)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_MAX_LOG_FLOAT = math.log(np.finfo(float).max)

# Stirling series coefficients for lgamma(x+1) - [(x+1/2)ln x - x + ln sqrt(2 pi)]
_STIRLING = (1.0 / 12, -1.0 / 360, 1.0 / 1260, -1.0 / 1680, 1.0 / 1188, -691.0 / 360360)


def _stirlerr(x):
    """Remainder of Stirling's approximation to ln(x!), for x >= 1."""
    if x <= 15:
        return math.lgamma(x + 1.0) - (x + 0.5) * math.log(x) + x - _HALF_LOG_2PI
    inv = 1.0 / x
    inv2 = inv * inv
    acc = 0.0
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return acc * inv


def log_binomial(n, k):
    """ln C(n, k); ``LOG_ZERO`` when k lies outside [0, n].

    Uses a saddle-point split of the three log-factorials so the large
    leading terms cancel analytically instead of numerically.
    """
    if k < 0 or k > n:
        return LOG_ZERO
    k = min(k, n - k)
    if k == 0:
        return 0.0
    if n < 30:
        return math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)
    j = n - k
    entropy = -k * math.log(k / n) - j * math.log1p(-k / n)
    correction = _stirlerr(n) - _stirlerr(k) - _stirlerr(j)
    return entropy + correction + 0.5 * math.log(n / (k * j)) - _HALF_LOG_2PI


_SMALL_STIRLERR = np.array([0.0] + [_stirlerr(float(x)) for x in range(1, 16)])


def _stirlerr_array(x):
    """Vectorized ``_stirlerr`` for integer arrays with x >= 1."""
    x = np.asarray(x)
    out = np.empty(x.shape)
    small = x <= 15
    out[small] = _SMALL_STIRLERR[x[small]]
    big = x[~small].astype(float)
    inv = 1.0 / big
    inv2 = inv * inv
    acc = np.zeros_like(big)
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    out[~small] = acc * inv
    return out


def log_binomial_array(n, k):
    """Vectorized ``log_binomial`` for an integer n and integer array k."""
    k = np.asarray(k, dtype=np.int64)
    out = np.full(k.shape, LOG_ZERO)
    valid = (k >= 0) & (k <= n)
    kk = np.minimum(k[valid], n - k[valid])
    vals = np.zeros(kk.shape)
    if n < 30:
        table = np.array([log_binomial(n, j) for j in range(n // 2 + 1)])
        vals = table[kk]
    else:
        inner = kk > 0
        kin = kk[inner]
        j = n - kin
        entropy = -kin * np.log(kin / n) - j * np.log1p(-kin / n)
        correction = _stirlerr(n) - _stirlerr_array(kin) - _stirlerr_array(j)
        vals[inner] = entropy + correction + 0.5 * np.log(n / (kin * j)) - _HALF_LOG_2PI
    out[valid] = vals
    return out


def log_binomial_row(n):
    """Array of ln C(n, k) for k = 0..n."""
    return log_binomial_array(n, np.arange(n + 1))


def log_binomial_table(n_max):
    """Lower-triangular table ``t[n, k] = ln C(n, k)``; ``-inf`` above the diagonal."""
    table = np.full((n_max + 1, n_max + 1), LOG_ZERO)
    for n in range(n_max + 1):
        half = [log_binomial(n, k) for k in range(n // 2 + 1)]
        for k, v in enumerate(half):
            table[n, k] = v
            table[n, n - k] = v
    return table


def log_sum_exp(terms):
    """ln sum(exp(t)) with a max shift. Empty input gives ``LOG_ZERO``."""
    terms = np.asarray(terms, dtype=float).ravel()
    if terms.size == 0:
        return LOG_ZERO
    top = terms.max()
    if top == LOG_ZERO:
        return LOG_ZERO
    if top == math.inf:
        return math.inf
    return top + math.log(math.fsum(np.exp(terms - top)))


def log_hypergeom_term(m1, m2, log_lam):
    """ln F(-m1, -m2; 1; lam) for nonnegative integers m1, m2, given ln(lam).

    The series terminates after min(m1, m2) + 1 nonnegative terms.
    """
    if m1 < 0 or m2 < 0:
        return LOG_ZERO
    top = min(m1, m2)
    if top == 0 or log_lam == LOG_ZERO:
        return 0.0
    ks = np.arange(top + 1)
    lb1 = np.array([log_binomial(m1, k) for k in ks])
    lb2 = np.array([log_binomial(m2, k) for k in ks])
    return log_sum_exp(lb1 + lb2 + ks * log_lam)


def hypergeom_term(m1, m2, lam):
    """F(-m1, -m2; 1; lam) = sum_k C(m1,k) C(m2,k) lam^k."""
    if lam < 0:
        raise ValueError(f"hypergeometric argument must be nonnegative, got {lam}")
    if m1 < 0 or m2 < 0:
        return 0.0
    top = min(m1, m2)
    # direct recurrence while it cannot overflow, log domain otherwise
    if top * (math.log1p(lam) + LOG2 * 2) < 600:
        term = 1.0
        total = 1.0
        for k in range(top):
            term *= (m1 - k) * (m2 - k) / ((k + 1.0) * (k + 1.0)) * lam
            total += term
        return total
    log_val = log_hypergeom_term(m1, m2, math.log(lam) if lam > 0 else LOG_ZERO)
    if log_val > _MAX_LOG_FLOAT:
        raise OverflowError(f"F(-{m1}, -{m2}; 1; {lam}) exceeds the float range; use log_hypergeom_term")
    return math.exp(log_val)


def bessel_i(order, z):
    """Modified Bessel function of the first kind, order 0 or 1, z >= 0."""
    if order not in (0, 1):
        raise ValueError("only orders 0 and 1 are supported")
    if z < 0:
        raise ValueError(f"z must be nonnegative, got {z}")
    if z == 0:
        return 1.0 if order == 0 else 0.0
    return bessel_i_ratio(order, z) * (0.5 * z) ** order


def bessel_i_ratio(order, z):
    """I_order(z) / (z/2)^order, finite at z = 0 (equal to 1/order!)."""
    q = 0.25 * z * z
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + order))
        total += term
        if term < 1e-17 * total:
            return total


def prob_at_least_one(log_q, t):
    """1 - (1 - q)^t with q = exp(log_q): the chance that at least one of t
    independent trials hits an event of probability q."""
    if log_q > 0:
        raise ValueError(f"log_q must be <= 0 (q <= 1), got {log_q}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t == 0 or log_q == LOG_ZERO:
        return 0.0
    if log_q == 0:
        return 1.0
    if log_q > -LOG2:
        # q near 1: ln(1 - q) from expm1 keeps the digits of the small complement
        log_miss = math.log(-math.expm1(log_q)) if log_q < 0 else LOG_ZERO
    else:
        log_miss = math.log1p(-math.exp(log_q))
    return -math.expm1(t * log_miss)


def log_binomial_pmf_row(n, p):
    """ln Pr(K = k), k = 0..n, for K ~ Binomial(n, p); 0 ln 0 taken as 0."""
    k = np.arange(n + 1)
    out = log_binomial_row(n)
    if p == 0.0:
        out = np.where(k == 0, 0.0, LOG_ZERO)
    elif p == 1.0:
        out = np.where(k == n, 0.0, LOG_ZERO)
    else:
        out = out + k * math.log(p) + (n - k) * math.log1p(-p)
    return out

"""Monte Carlo simulation of random coding over the Gilbert-Elliott channel.

Every trial owns a counter-based random stream keyed by (seed, trial index),
so results do not depend on batching or on the number of worker processes.
Each trial draws, in order: the initial-state uniform, N transition
uniforms, N noise uniforms, the M x N codebook bits and one tie-break
uniform. The draws do not depend on the decoder, so decoders evaluated on
the same trial see the same channel, noise and codebook.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .exact import DecoderSpec, gamma, score_shifts
from .markov import state_index, stationary

MAX_SYMBOLS_PER_TRIAL = 2**22
INITIAL_STATES = ("g", "b", "stationary")
CHUNK = 2048


@dataclass(frozen=True)
class SimConfig:
    params: object
    n: int
    m_codewords: int
    decoder: DecoderSpec = field(default_factory=DecoderSpec)
    trials: int = 10_000
    seed: int = 0
    initial_state: str = "stationary"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"block length must be >= 1, got {self.n}")
        if int(self.m_codewords) != self.m_codewords or self.m_codewords < 2:
            raise ValueError(f"simulation needs an integer codebook size >= 2, got {self.m_codewords}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.initial_state not in INITIAL_STATES:
            raise ValueError(f"initial_state must be one of {INITIAL_STATES}, got {self.initial_state!r}")
        cost = self.n * self.m_codewords
        if cost > MAX_SYMBOLS_PER_TRIAL:
            raise ValueError(
                f"n * m = {cost} codeword symbols per trial exceeds the budget of "
                f"{MAX_SYMBOLS_PER_TRIAL}; {self.trials} trials would touch {cost * self.trials:.3g} symbols"
            )


@dataclass(frozen=True, eq=False)
class SimResult:
    decoder: DecoderSpec
    trials: int
    failures: int
    per_transition_failures: np.ndarray  # [s0, sN]
    per_transition_trials: np.ndarray  # [s0, sN]
    occupancy_hist: np.ndarray  # trial counts over n_g = 0..N

    @property
    def p_hat(self):
        return self.failures / self.trials

    @property
    def std_err(self):
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def per_transition(self):
        """Array [s0, sN, k] with k = 0 failures, k = 1 trials."""
        return np.stack([self.per_transition_failures, self.per_transition_trials], axis=-1)

    def to_dict(self):
        return {
            "decoder": {"rule": self.decoder.rule, "ties": self.decoder.ties},
            "trials": self.trials,
            "failures": self.failures,
            "p_hat": self.p_hat,
            "std_err": self.std_err,
            "per_transition_failures": self.per_transition_failures.tolist(),
            "per_transition_trials": self.per_transition_trials.tolist(),
            "occupancy_hist": self.occupancy_hist.tolist(),
        }

    def __eq__(self, other):
        if not isinstance(other, SimResult):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def trial_rng(seed, trial):
    """Independent stream for one trial."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, trial, 0, 0]))


def _init_mode(initial_state):
    if initial_state == "stationary":
        return kernels.INIT_STATIONARY
    return kernels.INIT_GOOD if state_index(initial_state) == 0 else kernels.INIT_BAD


def _draws(rng, n, m):
    u_init = rng.random()
    u_trans = rng.random(n)
    u_noise = rng.random(n)
    codebook = rng.integers(0, 2, size=(m, n), dtype=np.uint8)
    u_tie = rng.random()
    return u_init, u_trans, u_noise, codebook, u_tie


def simulate_states(params, n, initial_state, rng):
    """Slot states s_0..s_{N-1} (0 = good) and the final state s_N."""
    mode = _init_mode(initial_state)
    pi_g = stationary(params)[0] if mode == kernels.INIT_STATIONARY else 0.0
    path = kernels.sample_chains(
        np.array([rng.random()]), rng.random((1, n)), params.alpha, params.beta, pi_g, mode
    )[0]
    return path[:-1].copy(), int(path[-1])


def _good_scores(config, decoder):
    return np.ascontiguousarray(score_shifts(config.n, gamma(config.params, decoder)), dtype=np.int64)


def run_trial(config, rng, decoder=None):
    """One transmission. Returns (failed, s0, sN, n_g)."""
    decoder = decoder or config.decoder
    n, m, p = config.n, config.m_codewords, config.params
    u_init, u_trans, u_noise, codebook, u_tie = _draws(rng, n, m)
    mode = _init_mode(config.initial_state)
    pi_g = stationary(p)[0] if mode == kernels.INIT_STATIONARY else 0.0
    states = kernels.sample_chains(np.array([u_init]), u_trans[None, :], p.alpha, p.beta, pi_g, mode)
    failed = kernels.decode_batch(
        codebook[None], u_noise[None, :], states, p.eps_g, p.eps_b,
        _good_scores(config, decoder), decoder.ties == "random", np.array([u_tie]),
    )
    path = states[0]
    return bool(failed[0]), int(path[0]), int(path[-1]), int(np.count_nonzero(path[:-1] == 0))


def _run_chunk(config, decoders, start, stop):
    """Integer tallies for trials [start, stop) under each decoder."""
    n, m, p = config.n, config.m_codewords, config.params
    t = stop - start
    u_init = np.empty(t)
    u_trans = np.empty((t, n))
    u_noise = np.empty((t, n))
    codebooks = np.empty((t, m, n), dtype=np.uint8)
    u_tie = np.empty(t)
    for i in range(t):
        u_init[i], u_trans[i], u_noise[i], codebooks[i], u_tie[i] = _draws(trial_rng(config.seed, start + i), n, m)
    mode = _init_mode(config.initial_state)
    pi_g = stationary(p)[0] if mode == kernels.INIT_STATIONARY else 0.0
    states = kernels.sample_chains(u_init, u_trans, p.alpha, p.beta, pi_g, mode)
    s0 = states[:, 0].astype(np.intp)
    s_end = states[:, -1].astype(np.intp)
    n_good = np.count_nonzero(states[:, :-1] == 0, axis=1)
    trans_trials = np.zeros((2, 2), dtype=np.int64)
    np.add.at(trans_trials, (s0, s_end), 1)
    hist = np.bincount(n_good, minlength=n + 1).astype(np.int64)
    fails = []
    for dec in decoders:
        failed = kernels.decode_batch(
            codebooks, u_noise, states, p.eps_g, p.eps_b,
            _good_scores(config, dec), dec.ties == "random", u_tie,
        )
        tf = np.zeros((2, 2), dtype=np.int64)
        np.add.at(tf, (s0[failed], s_end[failed]), 1)
        fails.append(tf)
    return trans_trials, hist, fails


def estimate_many(config, decoders, *, workers=1, chunk=CHUNK):
    """Estimate failure probabilities for several decoders on shared trials."""
    decoders = list(decoders)
    bounds = [(s, min(s + chunk, config.trials)) for s in range(0, config.trials, chunk)]
    if workers and workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, *zip(*[(config, decoders, a, b) for a, b in bounds])))
    else:
        parts = [_run_chunk(config, decoders, a, b) for a, b in bounds]
    trans_trials = sum(part[0] for part in parts)
    hist = sum(part[1] for part in parts)
    results = []
    for k, dec in enumerate(decoders):
        tf = sum(part[2][k] for part in parts)
        results.append(SimResult(dec, config.trials, int(tf.sum()), tf, trans_trials, hist))
    return results


def estimate(config, *, workers=1, chunk=CHUNK):
    return estimate_many(config, [config.decoder], workers=workers, chunk=chunk)[0]

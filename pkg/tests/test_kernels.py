import os
import subprocess
import sys

import numpy as np
import pytest

from fscbound import kernels

BACKENDS = kernels.available_backends()


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.backend in BACKENDS


def test_fallback_forced_by_environment():
    env = dict(os.environ, FSCBOUND_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from fscbound import kernels; print(kernels.backend)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@pytest.fixture(params=sorted(BACKENDS))
def impl(request):
    return BACKENDS[request.param]


def test_accumulate_scores_small(impl):
    good = np.log([1.0, 2.0])
    bad = np.log([1.0, 3.0, 5.0])
    shifts = np.array([0, 2], dtype=np.int64)
    out = np.exp(impl.accumulate_scores(good, bad, shifts, 5))
    np.testing.assert_allclose(out, [1, 3, 5 + 2, 6, 10])


def test_accumulate_scores_skips_empty_weights(impl):
    out = impl.accumulate_scores(np.array([-np.inf, 0.0]), np.array([0.0]), np.array([0, 1], dtype=np.int64), 2)
    assert out[0] == -np.inf and out[1] == 0.0


def test_sample_chains_deterministic_cases(impl):
    u = np.full((1, 6), 0.5)
    frozen = impl.sample_chains(np.array([0.9]), u, 0.0, 0.0, 0.0, kernels.INIT_GOOD)
    assert frozen.tolist() == [[0] * 7]
    flip = impl.sample_chains(np.array([0.9]), u, 1.0, 1.0, 0.0, kernels.INIT_GOOD)
    assert flip.tolist() == [[0, 1, 0, 1, 0, 1, 0]]
    start = impl.sample_chains(np.array([0.2, 0.8]), np.zeros((2, 0)), 0.1, 0.1, 0.5, kernels.INIT_STATIONARY)
    assert start[:, 0].tolist() == [0, 1]


def test_noiseless_distinct_codebook_never_fails(impl):
    n, m, t = 5, 8, 20
    words = ((np.arange(m)[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    codebooks = np.ascontiguousarray(np.broadcast_to(words, (t, m, n)))
    rng = np.random.default_rng(0)
    states = rng.integers(0, 2, size=(t, n + 1)).astype(np.int8)
    good = np.arange(n + 1, dtype=np.int64) * 2
    for ties_random in (False, True):
        failed = impl.decode_batch(codebooks, rng.random((t, n)), states, 0.0, 0.0, good, ties_random, rng.random(t))
        assert not failed.any()


def test_identical_codewords_tie(impl):
    codebooks = np.zeros((2, 3, 4), dtype=np.uint8)
    states = np.zeros((2, 5), dtype=np.int8)
    good = np.arange(5, dtype=np.int64)
    args = (codebooks, np.ones((2, 4)), states, 0.0, 0.0, good)
    assert impl.decode_batch(*args, False, np.zeros(2)).all()
    # three-way tie: the sent word wins only when u lands in the first third
    lost = impl.decode_batch(*args, True, np.array([0.1, 0.5]))
    assert lost.tolist() == [False, True]


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
def test_backends_agree_on_random_inputs():
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    rng = np.random.default_rng(11)
    for _ in range(5):
        ng, nb = rng.integers(1, 30, size=2)
        good = np.log(rng.random(ng + 1))
        bad = np.log(rng.random(nb + 1))
        shifts = np.cumsum(rng.integers(1, 3, size=ng + 1)).astype(np.int64) - 1
        size = int(shifts[-1]) + nb + 1
        np.testing.assert_allclose(
            py.accumulate_scores(good, bad, shifts, size), cy.accumulate_scores(good, bad, shifts, size), rtol=1e-14
        )
        t, n, m = 50, int(rng.integers(1, 20)), int(rng.integers(2, 9))
        u_init, u_trans = rng.random(t), rng.random((t, n))
        for mode in (kernels.INIT_GOOD, kernels.INIT_BAD, kernels.INIT_STATIONARY):
            a = py.sample_chains(u_init, u_trans, 0.2, 0.3, 0.6, mode)
            b = cy.sample_chains(u_init, u_trans, 0.2, 0.3, 0.6, mode)
            assert np.array_equal(a, b)
        states = py.sample_chains(u_init, u_trans, 0.2, 0.3, 0.6, kernels.INIT_STATIONARY)
        codebooks = rng.integers(0, 2, size=(t, m, n), dtype=np.uint8)
        noise, tie = rng.random((t, n)), rng.random(t)
        good_score = np.array([int(np.ceil(1.7 * e)) for e in range(n + 1)], dtype=np.int64)
        for ties_random in (False, True):
            a = py.decode_batch(codebooks, noise, states, 0.1, 0.3, good_score, ties_random, tie)
            b = cy.decode_batch(codebooks, noise, states, 0.1, 0.3, good_score, ties_random, tie)
            assert np.array_equal(np.asarray(a, dtype=bool), np.asarray(b, dtype=bool))

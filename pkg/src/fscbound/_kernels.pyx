# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; must stay numerically identical to _pykernels."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, exp, log1p, floor

cnp.import_array()


cdef inline double _logaddexp(double a, double b) nogil:
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a > b:
        return a + log1p(exp(b - a))
    return b + log1p(exp(a - b))


def accumulate_scores(double[::1] log_w_good, double[::1] log_w_bad,
                      long long[::1] shifts, Py_ssize_t size):
    out_arr = np.full(size, -np.inf)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, s, ng = log_w_good.shape[0], nb = log_w_bad.shape[0]
    cdef double lw
    with nogil:
        for i in range(ng):
            lw = log_w_good[i]
            if lw == -INFINITY:
                continue
            s = shifts[i]
            for j in range(nb):
                out[s + j] = _logaddexp(out[s + j], lw + log_w_bad[j])
    return out_arr


def sample_chains(double[::1] u_init, double[:, ::1] u_trans, double alpha,
                  double beta, double pi_g, int init_mode):
    cdef Py_ssize_t t = u_trans.shape[0], n = u_trans.shape[1], i, k
    states_arr = np.empty((t, n + 1), dtype=np.int8)
    cdef signed char[:, ::1] states = states_arr
    cdef signed char cur
    with nogil:
        for i in range(t):
            if init_mode == 0:
                cur = 0
            elif init_mode == 1:
                cur = 1
            else:
                cur = 0 if u_init[i] < pi_g else 1
            states[i, 0] = cur
            for k in range(n):
                if cur == 0:
                    if u_trans[i, k] < alpha:
                        cur = 1
                elif u_trans[i, k] < beta:
                    cur = 0
                states[i, k + 1] = cur
    return states_arr


def decode_batch(unsigned char[:, :, ::1] codebooks, double[:, ::1] u_noise,
                 signed char[:, ::1] states, double eps_g, double eps_b,
                 long long[::1] good_score, bint ties_random, double[::1] u_tie):
    cdef Py_ssize_t t = codebooks.shape[0], m = codebooks.shape[1], n = codebooks.shape[2]
    cdef Py_ssize_t i, j, k
    cdef long long e_good, e_bad, score, sent, tied
    cdef unsigned char rx, d
    cdef bint beaten
    failed_arr = np.zeros(t, dtype=bool)
    cdef cnp.npy_bool[::1] failed = failed_arr
    received_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] received = received_arr
    good_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] good = good_arr
    with nogil:
        for i in range(t):
            for k in range(n):
                good[k] = states[i, k] == 0
                rx = codebooks[i, 0, k]
                if u_noise[i, k] < (eps_g if good[k] else eps_b):
                    rx ^= 1
                received[k] = rx
            sent = 0
            beaten = False
            tied = 0
            for j in range(m):
                e_good = 0
                e_bad = 0
                # branch-free: disagreements are coin flips, so branches mispredict
                for k in range(n):
                    d = codebooks[i, j, k] ^ received[k]
                    e_good += d & good[k]
                    e_bad += d
                e_bad -= e_good
                score = good_score[e_good] + e_bad
                if j == 0:
                    sent = score
                elif score < sent:
                    beaten = True
                    break
                elif score == sent:
                    tied += 1
                    if not ties_random:
                        break
            if beaten:
                failed[i] = True
            elif ties_random:
                failed[i] = floor(u_tie[i] * (tied + 1)) != 0
            else:
                failed[i] = tied > 0
    return failed_arr

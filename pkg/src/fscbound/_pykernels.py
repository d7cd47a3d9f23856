"""Pure numpy implementations of the hot loops. Same signatures as the
compiled module ``_kernels``."""

import numpy as np

INIT_GOOD, INIT_BAD, INIT_STATIONARY = 0, 1, 2


def accumulate_scores(log_w_good, log_w_bad, shifts, size):
    out = np.full(size, -np.inf)
    nb = len(log_w_bad)
    for i, lw in enumerate(log_w_good):
        if lw == -np.inf:
            continue
        s = shifts[i]
        out[s : s + nb] = np.logaddexp(out[s : s + nb], lw + log_w_bad)
    return out


def sample_chains(u_init, u_trans, alpha, beta, pi_g, init_mode):
    """State paths s_0..s_N (0 = good) for a batch of trials.

    u_init has shape (T,), u_trans shape (T, N); s_{k+1} is drawn from s_k
    with u_trans[:, k].
    """
    t, n = u_trans.shape
    states = np.empty((t, n + 1), dtype=np.int8)
    if init_mode == INIT_GOOD:
        states[:, 0] = 0
    elif init_mode == INIT_BAD:
        states[:, 0] = 1
    else:
        states[:, 0] = np.where(u_init < pi_g, 0, 1)
    for k in range(n):
        cur = states[:, k]
        leave = np.where(cur == 0, u_trans[:, k] < alpha, u_trans[:, k] < beta)
        states[:, k + 1] = np.where(leave, 1 - cur, cur)
    return states


def decode_batch(codebooks, u_noise, states, eps_g, eps_b, good_score, ties_random, u_tie):
    """Decode one batch; codeword 0 is sent. Returns a bool array of failures.

    codebooks: uint8 (T, M, N); u_noise: (T, N); states: int8 (T, N + 1);
    good_score[e] is the score charged for e good-slot disagreements.
    """
    slot = states[:, :-1]
    good = slot == 0
    flips = u_noise < np.where(good, eps_g, eps_b)
    received = codebooks[:, 0, :] ^ flips.astype(np.uint8)
    diff = codebooks ^ received[:, None, :]
    e_good = (diff & good[:, None, :]).sum(axis=2)
    e_bad = diff.sum(axis=2) - e_good
    scores = good_score[e_good] + e_bad
    sent = scores[:, :1]
    rivals = scores[:, 1:]
    if not ties_random:
        return (rivals <= sent[:, 0, None]).any(axis=1)
    beaten = (rivals < sent).any(axis=1)
    tied = (rivals == sent).sum(axis=1)
    # uniform pick among the 1 + tied minimizers; the sent word wins with prob 1/(1+tied)
    lost_tie = np.floor(u_tie * (tied + 1)) != 0
    return beaten | lost_tie

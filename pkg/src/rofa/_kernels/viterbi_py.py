"""Pure-numpy Viterbi add-compare-select kernel.

Fallback used when the compiled extension is not available. Must stay
bit-exact with ``_viterbi.pyx``: branch metrics are formed as
``metric[pred] + (llr0 if c0 else 0.0) + (llr1 if c1 else 0.0)`` with the
same operation order, and exact metric ties are resolved in favour of the
survivor whose decoded prefix is lexicographically smaller.
"""

import numpy as np

_NEG = -1e30


def _prefix(tb, t, state):
    """Decoded bits 0..t-1 of the survivor ending in `state` after t steps."""
    bits = np.empty(t, dtype=np.uint8)
    s = state
    for k in range(t - 1, -1, -1):
        bits[k] = s >> 5
        s = ((s & 31) << 1) | tb[k, s]
    return bits


def acs_traceback(llrs, n_msg, c0, c1):
    """Soft Viterbi over the 64-state rate-1/2 trellis, zero-tail terminated.

    llrs: per-coded-bit soft values, positive favouring bit 1 (length 2T).
    c0/c1: (64, 2) uint8 tables of the two output bits per (state, input).
    Returns the first n_msg decoded bits.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    n_steps = llrs.shape[0] // 2

    states = np.arange(64)
    b = (states >> 5).astype(np.intp)          # input bit consumed entering state
    p0 = ((states & 31) << 1).astype(np.intp)  # predecessor with LSB 0
    p1 = p0 + 1
    # output bits of the transitions (p0 -> s) and (p1 -> s)
    c0a = c0[p0, b].astype(np.float64)
    c1a = c1[p0, b].astype(np.float64)
    c0b = c0[p1, b].astype(np.float64)
    c1b = c1[p1, b].astype(np.float64)

    metric = np.full(64, _NEG)
    metric[0] = 0.0
    tb = np.empty((n_steps, 64), dtype=np.uint8)

    for t in range(n_steps):
        l0 = llrs[2 * t]
        l1 = llrs[2 * t + 1]
        cand0 = metric[p0] + (l0 * c0a + l1 * c1a)
        cand1 = metric[p1] + (l0 * c0b + l1 * c1b)
        take1 = cand1 > cand0
        ties = cand1 == cand0
        if ties.any():
            for s in np.flatnonzero(ties):
                pa = _prefix(tb, t, p0[s])
                pb = _prefix(tb, t, p1[s])
                cmp = np.nonzero(pa != pb)[0]
                if cmp.size and pb[cmp[0]] < pa[cmp[0]]:
                    take1[s] = True
        metric = np.where(take1, cand1, cand0)
        tb[t] = take1

    bits = np.empty(n_steps, dtype=np.uint8)
    s = 0
    for t in range(n_steps - 1, -1, -1):
        bits[t] = s >> 5
        s = ((s & 31) << 1) | tb[t, s]
    return bits[:n_msg]

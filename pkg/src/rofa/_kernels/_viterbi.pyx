# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Viterbi add-compare-select kernel (64-state rate-1/2 trellis).

Bit-exact twin of viterbi_py.acs_traceback: identical branch-metric
arithmetic and the same lexicographic tie rule.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double _NEG = -1e30


cdef void _walk_prefix(unsigned char[:, ::1] tb, Py_ssize_t t, int state,
                       unsigned char* out) noexcept nogil:
    cdef Py_ssize_t k
    cdef int s = state
    for k in range(t - 1, -1, -1):
        out[k] = <unsigned char> (s >> 5)
        s = ((s & 31) << 1) | tb[k, s]


def acs_traceback(double[::1] llrs, Py_ssize_t n_msg,
                  unsigned char[:, ::1] c0, unsigned char[:, ::1] c1):
    """See viterbi_py.acs_traceback."""
    cdef Py_ssize_t n_steps = llrs.shape[0] // 2
    cdef Py_ssize_t t, k
    cdef int s, b, pa, pb, sp
    cdef double l0, l1, m0, m1, bm
    cdef int prefer_b

    cdef cnp.ndarray metric_arr = np.full(64, _NEG)
    cdef cnp.ndarray newm_arr = np.empty(64)
    cdef double[::1] metric = metric_arr
    cdef double[::1] newm = newm_arr
    cdef cnp.ndarray tb_arr = np.empty((max(n_steps, 1), 64), dtype=np.uint8)
    cdef unsigned char[:, ::1] tb = tb_arr
    cdef cnp.ndarray buf_a_arr = np.empty(max(n_steps, 1), dtype=np.uint8)
    cdef cnp.ndarray buf_b_arr = np.empty(max(n_steps, 1), dtype=np.uint8)
    cdef unsigned char[::1] buf_a = buf_a_arr
    cdef unsigned char[::1] buf_b = buf_b_arr
    cdef cnp.ndarray bits_arr = np.empty(max(n_steps, 1), dtype=np.uint8)
    cdef unsigned char[::1] bits = bits_arr

    metric[0] = 0.0
    for t in range(n_steps):
        l0 = llrs[2 * t]
        l1 = llrs[2 * t + 1]
        for s in range(64):
            b = s >> 5
            pa = (s & 31) << 1
            pb = pa | 1
            bm = (l0 * c0[pa, b]) + (l1 * c1[pa, b])
            m0 = metric[pa] + bm
            bm = (l0 * c0[pb, b]) + (l1 * c1[pb, b])
            m1 = metric[pb] + bm
            if m1 > m0:
                newm[s] = m1
                tb[t, s] = 1
            elif m1 < m0:
                newm[s] = m0
                tb[t, s] = 0
            else:
                # exact tie: keep the lexicographically smaller prefix
                prefer_b = 0
                if t > 0:
                    _walk_prefix(tb, t, pa, &buf_a[0])
                    _walk_prefix(tb, t, pb, &buf_b[0])
                    for k in range(t):
                        if buf_a[k] != buf_b[k]:
                            prefer_b = buf_b[k] < buf_a[k]
                            break
                newm[s] = m0
                tb[t, s] = <unsigned char> prefer_b
        metric[:] = newm

    sp = 0
    for t in range(n_steps - 1, -1, -1):
        bits[t] = <unsigned char> (sp >> 5)
        sp = ((sp & 31) << 1) | tb[t, sp]
    return np.asarray(bits_arr[:n_msg])

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SPOG decoder kernels; mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef Py_ssize_t _greedy(Py_ssize_t i, const cnp.int64_t[::1] ptr, const cnp.int64_t[::1] mem,
                        const cnp.int64_t[::1] itests, Py_ssize_t lo, Py_ssize_t hi,
                        const cnp.uint8_t[::1] elig, cnp.int64_t[::1] mark,
                        cnp.int64_t[::1] kept) noexcept nogil:
    cdef Py_ssize_t k, a, q, j, nk = 0
    cdef bint ok
    for k in range(lo, hi):
        a = itests[k]
        if not elig[a]:
            continue
        ok = True
        for q in range(ptr[a], ptr[a + 1]):
            j = mem[q]
            if j != i and mark[j] == i:
                ok = False
                break
        if not ok:
            continue
        for q in range(ptr[a], ptr[a + 1]):
            j = mem[q]
            if j != i:
                mark[j] = i
        kept[nk] = a
        nk += 1
    return nk


def distinctive_sets(Py_ssize_t n, const cnp.int64_t[::1] pool_ptr, const cnp.int64_t[::1] members,
                     const cnp.int64_t[::1] ind_ptr, const cnp.int64_t[::1] ind_tests,
                     const cnp.uint8_t[::1] eligible):
    cdef cnp.int64_t[::1] mark = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] kept = np.empty(max(ind_tests.shape[0], 1), dtype=np.int64)
    d_ptr_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] d_ptr = d_ptr_arr
    cdef Py_ssize_t i, total = 0, nk
    with nogil:
        for i in range(n):
            # kept is written in place at offset `total`; distinctive sets only shrink
            nk = _greedy(i, pool_ptr, members, ind_tests, ind_ptr[i], ind_ptr[i + 1],
                         eligible, mark, kept[total:])
            total += nk
            d_ptr[i + 1] = total
    return d_ptr_arr, np.asarray(kept[:total]).copy()


def spog_classify(Py_ssize_t n, const cnp.int64_t[::1] pool_ptr, const cnp.int64_t[::1] members,
                  const cnp.int64_t[::1] ind_ptr, const cnp.int64_t[::1] ind_tests,
                  const cnp.uint8_t[::1] eligible, const cnp.uint8_t[::1] observed,
                  const cnp.uint8_t[::1] pseudo, double c):
    cdef cnp.int64_t[::1] mark = np.full(n, -1, dtype=np.int64)
    cdef Py_ssize_t maxdeg = 1, i, k, a, q, j, nk, p, pos
    for i in range(n):
        if ind_ptr[i + 1] - ind_ptr[i] > maxdeg:
            maxdeg = ind_ptr[i + 1] - ind_ptr[i]
    cdef cnp.int64_t[::1] kept = np.empty(maxdeg, dtype=np.int64)
    est_arr = np.zeros(n, dtype=np.uint8)
    d_arr = np.zeros(n, dtype=np.int64)
    p_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.uint8_t[::1] est = est_arr
    cdef cnp.int64_t[::1] d_size = d_arr
    cdef cnp.int64_t[::1] p_size = p_arr
    cdef bint good
    with nogil:
        for i in range(n):
            nk = _greedy(i, pool_ptr, members, ind_tests, ind_ptr[i], ind_ptr[i + 1],
                         eligible, mark, kept)
            p = 0
            pos = 0
            for k in range(nk):
                a = kept[k]
                good = True
                for q in range(pool_ptr[a], pool_ptr[a + 1]):
                    j = members[q]
                    if j != i and pseudo[j] != 0:
                        good = False
                        break
                if good:
                    p += 1
                    pos += observed[a]
            d_size[i] = nk
            p_size[i] = p
            if p == 0:
                est[i] = pseudo[i]
            else:
                est[i] = 1 if pos >= c * p else 0
    return est_arr, d_arr, p_arr

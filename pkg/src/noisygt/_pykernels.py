"""Pure-Python reference kernels for the SPOG decoder.

Behaviour is identical to the compiled ``_ckernels`` module; this one is
used when the extension is not built or ``NOISYGT_PURE_PYTHON=1``.
"""

import numpy as np


def _greedy_distinctive(i, ptr, members, tests, eligible, mark):
    kept = []
    for a in tests:
        if not eligible[a]:
            continue
        pool = members[ptr[a]:ptr[a + 1]]
        if any(j != i and mark[j] == i for j in pool):
            continue
        for j in pool:
            if j != i:
                mark[j] = i
        kept.append(a)
    return kept


def distinctive_sets(n, pool_ptr, members, ind_ptr, ind_tests, eligible):
    """CSR ``(d_ptr, d_tests)`` of greedy distinctive sets over eligible tests."""
    ptr, mem = pool_ptr.tolist(), members.tolist()
    iptr, itests, elig = ind_ptr.tolist(), ind_tests.tolist(), eligible.tolist()
    mark = [-1] * n
    d_ptr = np.zeros(n + 1, dtype=np.int64)
    out = []
    for i in range(n):
        out.extend(_greedy_distinctive(i, ptr, mem, itests[iptr[i]:iptr[i + 1]], elig, mark))
        d_ptr[i + 1] = len(out)
    return d_ptr, np.asarray(out, dtype=np.int64)


def spog_classify(n, pool_ptr, members, ind_ptr, ind_tests, eligible, observed, pseudo, c):
    """Final SPOG stage. Returns ``(estimate, |D_i|, |P_i|)`` arrays."""
    ptr, mem = pool_ptr.tolist(), members.tolist()
    iptr, itests, elig = ind_ptr.tolist(), ind_tests.tolist(), eligible.tolist()
    obs, pg = observed.tolist(), pseudo.tolist()
    mark = [-1] * n
    est = np.zeros(n, dtype=np.uint8)
    d_size = np.zeros(n, dtype=np.int64)
    p_size = np.zeros(n, dtype=np.int64)
    for i in range(n):
        kept = _greedy_distinctive(i, ptr, mem, itests[iptr[i]:iptr[i + 1]], elig, mark)
        p = pos = 0
        for a in kept:
            if all(j == i or pg[j] == 0 for j in mem[ptr[a]:ptr[a + 1]]):
                p += 1
                pos += obs[a]
        d_size[i] = len(kept)
        p_size[i] = p
        est[i] = pg[i] if p == 0 else (1 if pos >= c * p else 0)
    return est, d_size, p_size

"""Compiled inner loops for cell-permutation systems.

Arrays are indexed by tower level ``l``; ``T^k f`` has level values
``F[l - k mod h]``.  Both kernels add ``prod_p F_p[l - (p+1) i]`` into
``acc[l]`` for every ``i`` in ``[i0, i1]``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def accumulate_dense(F, h, i0, i1, acc):
    m = F.shape[0]
    offs = np.empty(m, dtype=np.int64)
    for i in range(i0, i1 + 1):
        for p in range(m):
            offs[p] = (-(p + 1) * i) % h
        o0 = offs[0]
        for l in range(h):
            j = l + o0
            if j >= h:
                j -= h
            prod = F[0, j]
            if prod == 0:
                continue
            for p in range(1, m):
                j = l + offs[p]
                if j >= h:
                    j -= h
                prod *= F[p, j]
                if prod == 0:
                    break
            acc[l] += prod


@njit(cache=True)
def accumulate_sparse(nzpos, nzval, q, F, h, i0, i1, acc):
    # driver factor q: level l = s + (q+1) i for s in its support
    m = F.shape[0]
    offs = np.empty(m, dtype=np.int64)
    n = nzpos.size
    for i in range(i0, i1 + 1):
        for p in range(m):
            offs[p] = ((q - p) * i) % h
        shift = ((q + 1) * i) % h
        for t in range(n):
            s = nzpos[t]
            prod = nzval[t]
            for p in range(m):
                if p == q:
                    continue
                j = s + offs[p]
                if j >= h:
                    j -= h
                prod *= F[p, j]
                if prod == 0:
                    break
            if prod != 0:
                l = s + shift
                if l >= h:
                    l -= h
                acc[l] += prod

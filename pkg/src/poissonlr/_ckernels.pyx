# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of ``_kernels_py``; identical semantics."""

cdef int FIELD = 16
cdef object MASK = (1 << FIELD) - 1


def poly_add(dict a, dict b):
    cdef dict out
    cdef object k, c, s
    if len(a) < len(b):
        a, b = b, a
    out = dict(a)
    for k, c in b.items():
        s = out.get(k)
        if s is None:
            out[k] = c
        else:
            s = s + c
            if s:
                out[k] = s
            else:
                del out[k]
    return out


def poly_sub(dict a, dict b):
    cdef dict out = dict(a)
    cdef object k, c, s
    for k, c in b.items():
        s = out.get(k)
        if s is None:
            out[k] = -c
        else:
            s = s - c
            if s:
                out[k] = s
            else:
                del out[k]
    return out


def poly_scale(dict a, object c):
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


def poly_mul(dict a, dict b):
    cdef dict out = {}
    cdef list items_b = list(b.items())
    cdef Py_ssize_t nb = len(items_b)
    cdef Py_ssize_t j
    cdef object ka, ca, kb, cb, k, c, s
    for ka, ca in a.items():
        for j in range(nb):
            kb, cb = items_b[j]
            k = ka + kb
            c = ca * cb
            if (k & MASK) >= 2:
                k = k - 2
                c = -c
            s = out.get(k)
            if s is None:
                out[k] = c
            else:
                out[k] = s + c
    return {k: c for k, c in out.items() if c}


def poly_diff(dict a, int shift):
    cdef dict out = {}
    cdef object step = (<object>1) << shift
    cdef object k, c, nk
    cdef long e
    for k, c in a.items():
        e = (k >> shift) & MASK
        if e:
            nk = k - step
            out[nk] = out.get(nk, 0) + c * e
    return {k: c for k, c in out.items() if c}


def weyl_pairs(long beta, long gamma):
    cdef list out = []
    cdef long top = beta if beta < gamma else gamma
    cdef long j
    cdef object c = 1
    for j in range(top + 1):
        out.append((j, c))
        c = c * (beta - j) * (gamma - j) // (j + 1)
    return out


def binomial_row(long n):
    cdef list row = [1]
    cdef object last = 1
    cdef long j
    for j in range(n):
        last = last * (n - j) // (j + 1)
        row.append(last)
    return row

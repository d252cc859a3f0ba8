"""Pure-Python kernels for sparse polynomial arithmetic.

Polynomials are dicts mapping a packed exponent key to a rational
coefficient.  Each variable owns a 16 bit field of the key; field 0 holds
the exponent of the imaginary unit and is reduced with ``i**2 == -1``.

The compiled twin in ``_ckernels.pyx`` exposes the same functions.
"""

FIELD = 16
MASK = (1 << FIELD) - 1


def poly_add(a, b):
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


def poly_sub(a, b):
    out = dict(a)
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


def poly_scale(a, c):
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


def poly_mul(a, b):
    out = {}
    get = out.get
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = ka + kb
            c = ca * cb
            if k & MASK >= 2:
                k -= 2
                c = -c
            s = get(k)
            if s is None:
                out[k] = c
            else:
                out[k] = s + c
    return {k: c for k, c in out.items() if c}


def poly_diff(a, shift):
    """Partial derivative in the variable stored at bit offset ``shift``."""
    out = {}
    step = 1 << shift
    for k, c in a.items():
        e = (k >> shift) & MASK
        if e:
            nk = k - step
            out[nk] = out.get(nk, 0) + c * e
    return {k: c for k, c in out.items() if c}


def weyl_pairs(beta, gamma):
    """Integer reordering coefficients for ``p**beta * q**gamma``.

    Returns ``[(j, C(beta, j) * gamma!/(gamma-j)!) for j in 0..min]``; the
    caller attaches the sign and the central factor.
    """
    out = []
    top = beta if beta < gamma else gamma
    c = 1
    for j in range(top + 1):
        out.append((j, c))
        # C(b, j+1) * g!/(g-j-1)! from C(b, j) * g!/(g-j)!
        c = c * (beta - j) * (gamma - j) // (j + 1)
    return out


def binomial_row(n):
    row = [1]
    for j in range(n):
        row.append(row[-1] * (n - j) // (j + 1))
    return row

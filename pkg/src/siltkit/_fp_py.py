"""Pure numpy kernels for Gaussian elimination over a prime field.

These are the reference implementations; ``_fp_fast`` provides compiled
versions with the same signatures.
"""

import numpy as np


def rref_inplace(a, p):
    """Reduce ``a`` (2-D int64, entries in [0, p)) to reduced row echelon form.

    Works in place and returns the list of pivot columns.
    """
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        if inv != 1:
            a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % p
        pivots.append(c)
        r += 1
    return pivots

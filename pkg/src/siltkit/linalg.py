"""Dense linear algebra over a prime field F_p.

Matrices are ``numpy.int64`` arrays with entries in ``[0, p)``.  The row
reduction kernel comes from the compiled ``_fp_fast`` extension when it is
importable and from the numpy fallback otherwise.  Setting the environment
variable ``SILTKIT_PURE=1`` forces the fallback.
"""

import os

import numpy as np

from . import _fp_py

BACKEND = "python"
_rref_inplace = _fp_py.rref_inplace
if os.environ.get("SILTKIT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _fp_fast

        _rref_inplace = _fp_fast.rref_inplace
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        pass


def as_fp(a, p):
    """Return a contiguous int64 copy of ``a`` reduced mod p."""
    return np.ascontiguousarray(np.asarray(a, dtype=np.int64) % p)


def rref(a, p):
    """Reduced row echelon form of ``a`` and its pivot columns."""
    m = as_fp(a, p)
    if m.ndim != 2:
        raise ValueError("rref expects a 2-D matrix")
    if m.size == 0:
        return m, []
    piv = _rref_inplace(m, p)
    return m, list(piv)


def rank(a, p):
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(rref(a, p)[1])


def nullspace(a, p):
    """Basis of ``{x : a @ x = 0}`` as the rows of a (k, n) array.

    The basis is the canonical one read off the reduced echelon form, so it
    is deterministic.
    """
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[1]
    if a.shape[0] == 0 or a.size == 0:
        return np.eye(n, dtype=np.int64)
    r, piv = rref(a, p)
    free = [j for j in range(n) if j not in set(piv)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for t, j in enumerate(free):
        basis[t, j] = 1
        for i, c in enumerate(piv):
            basis[t, c] = (-r[i, j]) % p
    return basis


def row_basis(a, p):
    """Nonzero rows of the reduced echelon form (a basis of the row space)."""
    a = np.asarray(a, dtype=np.int64)
    if a.size == 0:
        return np.zeros((0, a.shape[1] if a.ndim == 2 else 0), dtype=np.int64)
    r, piv = rref(a, p)
    return r[: len(piv)]


def solve(a, b, p):
    """Solve ``a @ x = b`` (b a vector or matrix); return None if inconsistent."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    m, n = a.shape
    k = b.shape[1]
    if n == 0:
        if np.any(b % p):
            return None
        x = np.zeros((0, k), dtype=np.int64)
        return x[:, 0] if vec else x
    aug = np.concatenate([a.reshape(m, n), b], axis=1)
    r, piv = rref(aug, p)
    if any(c >= n for c in piv):
        return None
    x = np.zeros((n, k), dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = r[i, n:]
    return x[:, 0] if vec else x


def inverse(a, p):
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    r, piv = rref(np.concatenate([a, np.eye(n, dtype=np.int64)], axis=1), p)
    if piv[:n] != list(range(n)):
        raise np.linalg.LinAlgError("matrix is singular mod p")
    return r[:, n:].copy()


def is_invertible(a, p):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return rank(a, p) == a.shape[0]


def complement_columns(a, p):
    """Indices of standard basis vectors completing the column space of ``a``.

    Returns the indices j such that the columns of ``a`` together with the
    unit vectors ``e_j`` form a basis of the ambient space.
    """
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[0]
    k = a.shape[1] if a.ndim == 2 else 0
    full = np.concatenate([a.reshape(n, k), np.eye(n, dtype=np.int64)], axis=1)
    _, piv = rref(full, p)
    return [c - k for c in piv if c >= k]


def column_basis(a, p):
    """Columns of ``a`` at the pivot positions (a basis of the column space)."""
    a = np.asarray(a, dtype=np.int64)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=np.int64)
    _, piv = rref(a, p)
    return a[:, piv] % p


def matpow(a, e, p):
    """``a ** e`` mod p for a square matrix by repeated squaring."""
    n = a.shape[0]
    out = np.eye(n, dtype=np.int64)
    base = a % p
    while e:
        if e & 1:
            out = (out @ base) % p
        base = (base @ base) % p
        e >>= 1
    return out


class QuotientSpace:
    """A subquotient ``Z / B`` of ``F_p^n`` with a fixed basis.

    ``cycles`` and ``boundaries`` are given as row vectors.  The basis of
    the quotient is chosen among the cycle rows greedily, so it is
    deterministic.  ``coords`` expresses a cycle in that basis.
    """

    def __init__(self, cycles, boundaries, p, n):
        self.p = p
        self.n = n
        z = _rows(cycles, n) % p
        b = row_basis(_rows(boundaries, n), p) if n else np.zeros((0, 0), dtype=np.int64)
        self.boundaries = b
        rb = b.shape[0]
        if z.shape[0] and n:
            _, piv = rref(np.vstack([b, z]).T, p)
            chosen = [c - rb for c in piv if c >= rb]
        else:
            chosen = []
        self.basis = z[chosen].reshape(len(chosen), n)
        self._stack = np.vstack([self.basis, self.boundaries]).T if n else np.zeros((0, 0), dtype=np.int64)

    @property
    def dim(self):
        return self.basis.shape[0]

    def coords(self, v):
        """Coordinates of the class of ``v`` (must lie in Z)."""
        if self.dim == 0:
            return np.zeros(0, dtype=np.int64)
        x = solve(self._stack, np.asarray(v, dtype=np.int64) % self.p, self.p)
        if x is None:
            raise ValueError("vector does not lie in the cycle space")
        return x[: self.dim]

    def combine(self, c):
        c = np.asarray(c, dtype=np.int64)
        if self.dim == 0:
            return np.zeros(self.n, dtype=np.int64)
        return (c @ self.basis) % self.p

    def elements(self):
        """All coefficient vectors of the quotient (p ** dim of them)."""
        return all_vectors(self.dim, self.p)


def _rows(a, n):
    a = np.asarray(a, dtype=np.int64)
    if a.size == 0:
        return np.zeros((0, n), dtype=np.int64)
    return a.reshape(-1, n)


def all_vectors(d, p):
    """Every vector of F_p^d as rows of an array, in lexicographic order."""
    if d == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((p,) * d).reshape(d, -1).T
    return np.ascontiguousarray(grids.astype(np.int64))


def as_columns(a, n):
    """View ``a`` as a matrix with n rows (handles empty arrays)."""
    a = np.asarray(a, dtype=np.int64)
    if a.size == 0:
        return np.zeros((n, 0), dtype=np.int64)
    return a.reshape(n, -1)

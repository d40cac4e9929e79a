"""Bounded complexes of projective modules and the homotopy category K^b(proj).

A map ``⊕_c P(v_c) -> ⊕_r P(w_r)`` is stored as a *path matrix*: an int64
array of shape ``(rows, cols, npaths)`` whose entry ``[r, c, q]`` is the
coefficient of path q (running from w_r to v_c).  The generator of P(v_c)
is sent to the corresponding combination of paths, so composition of maps is
matrix multiplication with concatenation of paths, in matrix order.

Differentials raise the degree by one.  ``shift(X, n)`` puts degree i+n of X
in degree i and multiplies the differentials by (-1)^n.  The cone of
``f: X -> Y`` has terms ``X^{i+1} ⊕ Y^i`` and differential
``[[-d_X, 0], [-f, d_Y]]``.
"""

import numpy as np

from . import linalg as la
from .algebra import free_module, zero_module
from .errors import InfiniteProjDim, ResolutionCapExceeded
from .modules import ModuleMorphism, _Memo, indecomposable_summands, kernel, quotient, resolve

RANDOM_TRIALS = 64
EXHAUSTIVE_LIMIT = 1024
_hom_cache = _Memo()

# -- path matrices -----------------------------------------------------------------


def pm_zero(alg, rows, cols):
    return np.zeros((rows, cols, alg.dim), dtype=np.int64)


def pm_mul(alg, A, B):
    """Product of path matrices (A after B in map order, concatenation order A*B)."""
    r, m, n = A.shape
    c = B.shape[1]
    if r == 0 or c == 0 or m == 0:
        return np.zeros((r, c, n), dtype=np.int64)
    prod = np.einsum("ija,jkb->ikab", A, B).reshape(r * c, n * n)
    return ((prod % alg.p) @ alg.structure).reshape(r, c, n) % alg.p


def pm_identity(alg, verts):
    k = len(verts)
    out = pm_zero(alg, k, k)
    for j, v in enumerate(verts):
        out[j, j, alg.trivial[v]] = 1
    return out


def pm_scalar(alg, mat, row_verts, col_verts):
    """Embed a scalar matrix between equal-vertex summands as trivial paths."""
    out = pm_zero(alg, len(row_verts), len(col_verts))
    for r, c in zip(*np.nonzero(mat % alg.p)):
        if row_verts[r] != col_verts[c]:
            raise ValueError("scalar entry between different vertices")
        out[r, c, alg.trivial[col_verts[c]]] = mat[r, c] % alg.p
    return out


def pm_top(alg, A, col_verts):
    """Scalar part of a path matrix: coefficients of trivial paths."""
    if A.shape[0] == 0 or A.shape[1] == 0:
        return np.zeros(A.shape[:2], dtype=np.int64)
    triv = np.asarray(alg.trivial, dtype=np.int64)[list(col_verts)]
    return A[:, np.arange(A.shape[1]), triv].copy() if A.shape[0] == 1 else \
        np.take_along_axis(A, np.broadcast_to(triv[None, :, None], (A.shape[0], A.shape[1], 1)), axis=2)[:, :, 0]


def pm_inverse(alg, A, row_verts, col_verts):
    """Inverse of a path matrix whose scalar part is invertible (geometric series)."""
    p = alg.p
    T = pm_top(alg, A, col_verts)
    Tinv = pm_scalar(alg, la.inverse(T, p), col_verts, row_verts)
    N = (A - pm_scalar(alg, T, row_verts, col_verts)) % p
    step = (-pm_mul(alg, Tinv, N)) % p
    total = pm_identity(alg, col_verts)
    term = total
    for _ in range(alg.max_length + 1):
        term = pm_mul(alg, term, step)
        if not term.any():
            break
        total = (total + term) % p
    return pm_mul(alg, total, Tinv)


def support(alg, row_verts, col_verts):
    """Boolean mask of the admissible entries of a map ⊕P(col) -> ⊕P(row)."""
    starts = np.array([q.start for q in alg.paths])
    ends = np.array([q.end for q in alg.paths])
    rv = np.asarray(row_verts, dtype=np.int64).reshape(-1, 1, 1)
    cv = np.asarray(col_verts, dtype=np.int64).reshape(1, -1, 1)
    return (starts[None, None, :] == rv) & (ends[None, None, :] == cv)


def _left_matrix(alg, A, ncols):
    """Matrix of F -> A F on flattened path matrices with ``ncols`` columns."""
    n = alg.dim
    r, m, _ = A.shape
    T3 = alg.structure.reshape(n, n, n)
    L = np.einsum("ija,abc->icjb", A, T3)
    M = np.einsum("icjb,kl->ikcjlb", L, np.eye(ncols, dtype=np.int64))
    return M.reshape(r * ncols * n, m * ncols * n)


def _right_matrix(alg, D, nrows):
    """Matrix of F -> F D on flattened path matrices with ``nrows`` rows."""
    n = alg.dim
    m, c, _ = D.shape
    T3 = alg.structure.reshape(n, n, n)
    L = np.einsum("jkb,abc->kcja", D, T3)
    M = np.einsum("il,kcja->ikclja", np.eye(nrows, dtype=np.int64), L)
    return M.reshape(nrows * c * n, nrows * m * n)


# -- complexes ----------------------------------------------------------------------


class ProjComplex:
    """A bounded complex of projectives; ``terms[j]`` sits in degree ``lo + j``."""

    __slots__ = ("alg", "lo", "terms", "diffs", "_key")

    def __init__(self, alg, lo, terms, diffs):
        self.alg = alg
        terms = [tuple(int(v) for v in t) for t in terms]
        diffs = [np.asarray(d, dtype=np.int64) % alg.p for d in diffs]
        while terms and not terms[0]:
            terms.pop(0)
            if diffs:
                diffs.pop(0)
            lo += 1
        while terms and not terms[-1]:
            terms.pop()
            if diffs:
                diffs.pop()
        if not terms:
            lo = 0
        self.lo = lo
        self.terms = tuple(terms)
        n = alg.dim
        self.diffs = tuple(d.reshape(len(terms[j + 1]), len(terms[j]), n) for j, d in enumerate(diffs))
        self._key = None

    @property
    def hi(self):
        return self.lo + len(self.terms) - 1

    @property
    def degrees(self):
        return range(self.lo, self.hi + 1)

    def term(self, i):
        j = i - self.lo
        return self.terms[j] if 0 <= j < len(self.terms) else ()

    def diff(self, i):
        """d^i : X^i -> X^{i+1} as a path matrix (zero if outside the range)."""
        j = i - self.lo
        if 0 <= j < len(self.diffs):
            return self.diffs[j]
        return pm_zero(self.alg, len(self.term(i + 1)), len(self.term(i)))

    def is_zero(self):
        return not self.terms

    @property
    def size(self):
        return sum(len(t) for t in self.terms)

    def is_complex(self):
        for i in self.degrees:
            if pm_mul(self.alg, self.diff(i + 1), self.diff(i)).any():
                return False
        return True

    def is_minimal(self):
        return all(not pm_top(self.alg, self.diff(i), self.term(i)).any() for i in self.degrees)

    def key(self):
        if self._key is None:
            self._key = (self.alg.signature, self.lo, self.terms, tuple(d.tobytes() for d in self.diffs))
        return self._key

    def __eq__(self, other):
        return isinstance(other, ProjComplex) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        names = self.alg.quiver.vertices
        parts = [f"{i}:" + "+".join(f"P{names[v]}" for v in self.term(i)) for i in self.degrees]
        return "ProjComplex(" + ", ".join(parts) + ")"


def zero_complex(alg):
    return ProjComplex(alg, 0, [], [])


def stalk(alg, verts, degree=0):
    """The complex with ⊕P(v) in a single degree."""
    return ProjComplex(alg, degree, [tuple(verts)], [])


def shift(X, n):
    """Σ^n X: degree i holds X^{i+n}; differentials pick up (-1)^n."""
    if X.is_zero():
        return X
    sign = -1 if n % 2 else 1
    return ProjComplex(X.alg, X.lo - n, X.terms, [sign * d for d in X.diffs])


def direct_sum_complexes(parts, alg=None):
    parts = [X for X in parts if not X.is_zero()]
    if not parts:
        return zero_complex(alg)
    alg = parts[0].alg
    lo = min(X.lo for X in parts)
    hi = max(X.hi for X in parts)
    terms = [sum((X.term(i) for X in parts), ()) for i in range(lo, hi + 1)]
    diffs = []
    for i in range(lo, hi):
        d = pm_zero(alg, len(terms[i + 1 - lo]), len(terms[i - lo]))
        r0 = c0 = 0
        for X in parts:
            dx = X.diff(i)
            d[r0:r0 + dx.shape[0], c0:c0 + dx.shape[1]] = dx
            r0 += dx.shape[0]
            c0 += dx.shape[1]
        diffs.append(d)
    return ProjComplex(alg, lo, terms, diffs)


# -- chain maps ----------------------------------------------------------------------


class ChainMap:
    """A chain map given by its components ``comps[i]: X^i -> Y^i``."""

    __slots__ = ("source", "target", "comps")

    def __init__(self, source, target, comps=None):
        self.source = source
        self.target = target
        alg = source.alg
        out = {}
        for i in _common_degrees(source, target):
            c = None if comps is None else comps.get(i)
            shape = (len(target.term(i)), len(source.term(i)), alg.dim)
            out[i] = pm_zero(alg, *shape[:2]) if c is None else np.asarray(c, dtype=np.int64).reshape(shape) % alg.p
        self.comps = out

    @property
    def alg(self):
        return self.source.alg

    def comp(self, i):
        c = self.comps.get(i)
        if c is None:
            return pm_zero(self.alg, len(self.target.term(i)), len(self.source.term(i)))
        return c

    def is_chain_map(self):
        alg = self.alg
        X, Y = self.source, self.target
        lo = min(X.lo, Y.lo) - 1
        hi = max(X.hi, Y.hi) + 1
        for i in range(lo, hi + 1):
            lhs = pm_mul(alg, Y.diff(i), self.comp(i))
            rhs = pm_mul(alg, self.comp(i + 1), X.diff(i))
            if ((lhs - rhs) % alg.p).any():
                return False
        return True

    def is_zero(self):
        return not any(c.any() for c in self.comps.values())

    def top(self):
        """Block diagonal scalar matrix of the components (degree by degree)."""
        X = self.source
        blocks = [pm_top(self.alg, self.comp(i), X.term(i)) for i in X.degrees]
        size_r = sum(b.shape[0] for b in blocks)
        size_c = sum(b.shape[1] for b in blocks)
        out = np.zeros((size_r, size_c), dtype=np.int64)
        r = c = 0
        for b in blocks:
            out[r:r + b.shape[0], c:c + b.shape[1]] = b
            r += b.shape[0]
            c += b.shape[1]
        return out

    def __add__(self, other):
        return ChainMap(self.source, self.target, {i: self.comp(i) + other.comp(i) for i in self.comps})

    def __sub__(self, other):
        return ChainMap(self.source, self.target, {i: self.comp(i) - other.comp(i) for i in self.comps})

    def scale(self, c):
        return ChainMap(self.source, self.target, {i: c * m for i, m in self.comps.items()})

    def __repr__(self):
        return f"ChainMap({self.source!r} -> {self.target!r})"


def _common_degrees(X, Y):
    return [i for i in X.degrees if X.term(i) and Y.term(i)]


def compose_chain(g, f):
    """g ∘ f."""
    alg = f.alg
    return ChainMap(f.source, g.target, {i: pm_mul(alg, g.comp(i), f.comp(i)) for i in f.source.degrees})


def identity_chain(X):
    return ChainMap(X, X, {i: pm_identity(X.alg, X.term(i)) for i in X.degrees})


def zero_chain(X, Y):
    return ChainMap(X, Y)


def shift_chain(f, n):
    return ChainMap(shift(f.source, n), shift(f.target, n), {i - n: c for i, c in f.comps.items()})


def block_chain(srcs, tgts, blocks, alg=None):
    """Chain map between direct sums from a dict ``(row, col) -> ChainMap``."""
    X = direct_sum_complexes(srcs, alg)
    Y = direct_sum_complexes(tgts, alg)
    alg = X.alg if not X.is_zero() else (Y.alg if not Y.is_zero() else alg)
    comps = {}
    for i in _common_degrees(X, Y):
        m = pm_zero(alg, len(Y.term(i)), len(X.term(i)))
        for (r, c), f in blocks.items():
            r0 = sum(len(T.term(i)) for T in tgts[:r])
            c0 = sum(len(S.term(i)) for S in srcs[:c])
            comp = f.comp(i)
            m[r0:r0 + comp.shape[0], c0:c0 + comp.shape[1]] += comp
        comps[i] = m
    return ChainMap(X, Y, comps)


def chain_power(f, e):
    out = identity_chain(f.source)
    base = f
    while e:
        if e & 1:
            out = compose_chain(out, base)
        base = compose_chain(base, base)
        e >>= 1
    return out


# -- Hom in the homotopy category -------------------------------------------------------


class HomK:
    """Chain maps X -> Y modulo null-homotopic maps, with a fixed basis."""

    def __init__(self, X, Y):
        self.source, self.target = X, Y
        alg = X.alg
        p = alg.p
        self.degrees = _common_degrees(X, Y)
        self.index = {}
        off = 0
        for i in self.degrees:
            mask = support(alg, Y.term(i), X.term(i)).ravel()
            idx = np.flatnonzero(mask)
            self.index[i] = (off, idx)
            off += idx.size
        self.nvars = off
        eqs = []
        lo = min(X.lo, Y.lo) - 1
        hi = max(X.hi, Y.hi)
        for i in range(lo, hi + 1):
            nx, ny1 = len(X.term(i)), len(Y.term(i + 1))
            if nx == 0 or ny1 == 0:
                continue
            rows = ny1 * nx * alg.dim
            eq = np.zeros((rows, self.nvars), dtype=np.int64)
            if i in self.index:
                o, idx = self.index[i]
                eq[:, o:o + idx.size] += _left_matrix(alg, Y.diff(i), nx)[:, idx]
            if i + 1 in self.index:
                o, idx = self.index[i + 1]
                eq[:, o:o + idx.size] -= _right_matrix(alg, X.diff(i), ny1)[:, idx]
            eqs.append(eq % p)
        if self.nvars == 0:
            cycles = np.zeros((0, 0), dtype=np.int64)
        elif eqs:
            cycles = la.nullspace(np.vstack(eqs), p)
        else:
            cycles = np.eye(self.nvars, dtype=np.int64)
        bounds = []
        for i in X.degrees:
            nx, ny = len(X.term(i)), len(Y.term(i - 1))
            if nx == 0 or ny == 0:
                continue
            hidx = np.flatnonzero(support(alg, Y.term(i - 1), X.term(i)).ravel())
            if hidx.size == 0:
                continue
            col = np.zeros((self.nvars, hidx.size), dtype=np.int64)
            if i in self.index:       # f^i = d_Y^{i-1} h^i
                o, idx = self.index[i]
                col[o:o + idx.size] += _left_matrix(alg, Y.diff(i - 1), nx)[idx][:, hidx]
            if i - 1 in self.index:   # f^{i-1} = h^i d_X^{i-1}
                o, idx = self.index[i - 1]
                col[o:o + idx.size] += _right_matrix(alg, X.diff(i - 1), ny)[idx][:, hidx]
            bounds.append(col % p)
        b = np.concatenate(bounds, axis=1).T if bounds else np.zeros((0, self.nvars), dtype=np.int64)
        self.space = la.QuotientSpace(cycles, b, p, self.nvars)

    @property
    def dim(self):
        return self.space.dim

    def vector(self, f):
        out = np.zeros(self.nvars, dtype=np.int64)
        for i, (o, idx) in self.index.items():
            out[o:o + idx.size] = f.comp(i).ravel()[idx]
        return out

    def chain_map(self, vec):
        alg = self.source.alg
        comps = {}
        for i, (o, idx) in self.index.items():
            full = np.zeros(len(self.target.term(i)) * len(self.source.term(i)) * alg.dim, dtype=np.int64)
            full[idx] = vec[o:o + idx.size]
            comps[i] = full
        return ChainMap(self.source, self.target, comps)

    @property
    def basis(self):
        return [self.chain_map(r) for r in self.space.basis]

    def combine(self, c):
        return self.chain_map(self.space.combine(c))

    def coords(self, f):
        return self.space.coords(self.vector(f))

    def is_null_homotopic(self, f):
        return not self.coords(f).any()


def hom_space_complexes(X, Y):
    key = (X.key(), Y.key())
    hit = _hom_cache.get(key)
    if hit is None:
        hit = _hom_cache.put(key, HomK(X, Y))
    return hit


def hom_complexes(X, Y):
    """Basis of Hom_K(X, Y) as chain maps (deterministic)."""
    return hom_space_complexes(X, Y).basis


# -- cones and minimisation ------------------------------------------------------------


def mapping_cone(f, minimal=True):
    X, Y = f.source, f.target
    alg = X.alg
    lo = min(X.lo - 1 if not X.is_zero() else Y.lo, Y.lo if not Y.is_zero() else X.lo - 1)
    hi = max(X.hi - 1 if not X.is_zero() else Y.hi, Y.hi if not Y.is_zero() else X.hi - 1)
    if X.is_zero() and Y.is_zero():
        return zero_complex(alg)
    terms = [X.term(i + 1) + Y.term(i) for i in range(lo, hi + 1)]
    diffs = []
    for i in range(lo, hi):
        nx1, ny = len(X.term(i + 1)), len(Y.term(i))
        nx2, ny1 = len(X.term(i + 2)), len(Y.term(i + 1))
        d = pm_zero(alg, nx2 + ny1, nx1 + ny)
        d[:nx2, :nx1] = -X.diff(i + 1)
        d[nx2:, :nx1] = -f.comp(i + 1)
        d[nx2:, nx1:] = Y.diff(i)
        diffs.append(d)
    C = ProjComplex(alg, lo, terms, diffs)
    return minimize(C) if minimal else C


def cocone(f, minimal=True):
    """Σ^{-1} of the cone: the first term of the triangle ending in f."""
    return shift(mapping_cone(f, minimal), -1)


def unit_inverse(alg, u, v):
    """Inverse of a unit of e_v Λ e_v given as a coefficient vector."""
    p = alg.p
    lam = int(u[alg.trivial[v]]) % p
    a = pow(lam, p - 2, p)
    nu = u.copy().reshape(1, 1, -1)
    nu[0, 0, alg.trivial[v]] = 0
    step = (-a * nu) % p
    total = pm_identity(alg, [v])
    term = total
    for _ in range(alg.max_length + 1):
        term = pm_mul(alg, term, step)
        if not term.any():
            break
        total = (total + term) % p
    return (a * total) % p


def minimize(X):
    """Homotopy equivalent complex with radical differentials (Gaussian elimination)."""
    alg = X.alg
    p = alg.p
    terms = [list(t) for t in X.terms]
    diffs = [d.copy() for d in X.diffs]
    while True:
        hit = None
        for k, d in enumerate(diffs):
            if d.size == 0:
                continue
            top = pm_top(alg, d, terms[k])
            nz = np.argwhere(top % p)
            if nz.size:
                hit = (k, int(nz[0, 0]), int(nz[0, 1]))
                break
        if hit is None:
            break
        k, r, c = hit
        d = diffs[k]
        v = terms[k][c]
        uinv = unit_inverse(alg, d[r, c], v)
        rows = [i for i in range(d.shape[0]) if i != r]
        cols = [j for j in range(d.shape[1]) if j != c]
        left = d[rows][:, [c]]
        right = d[[r]][:, cols]
        new = d[rows][:, cols] - pm_mul(alg, pm_mul(alg, left, uinv), right)
        diffs[k] = new % p
        if k > 0:
            diffs[k - 1] = np.delete(diffs[k - 1], c, axis=0)
        if k + 1 < len(diffs):
            diffs[k + 1] = np.delete(diffs[k + 1], r, axis=1)
        terms[k].pop(c)
        terms[k + 1].pop(r)
    return ProjComplex(alg, X.lo, terms, diffs)


# -- from modules -----------------------------------------------------------------------


def module_map_to_pm(alg, f, src_gens, tgt_gens):
    """Path matrix of a morphism between free modules on the given generators."""
    _, tbasis = free_module(alg, tgt_gens)
    out = pm_zero(alg, len(tgt_gens), len(src_gens))
    _, sbasis = free_module(alg, src_gens)
    for c, v in enumerate(src_gens):
        col = sbasis[v].index((c, alg.trivial[v]))
        vec = f.mats[v][:, col]
        for j, (r, path) in enumerate(tbasis[v]):
            if vec[j]:
                out[r, c, path] = vec[j]
    return out


def resolve_to_complex(M):
    """Minimal projective resolution of M placed in degrees ≤ 0."""
    alg = M.alg
    if M.dim == 0:
        return zero_complex(alg)
    res = resolve(M)
    if res.status == "cycle":
        raise InfiniteProjDim("module has infinite projective dimension")
    if res.status == "cap":
        raise ResolutionCapExceeded("resolution did not terminate within the cap")
    n = len(res.terms)
    terms = [tuple(res.gens[n - 1 - j]) for j in range(n)]
    diffs = []
    for j in range(n - 1):
        k = n - 1 - j  # d_k : P_k -> P_{k-1}
        diffs.append(module_map_to_pm(alg, res.maps[k - 1], res.gens[k], res.gens[k - 1]))
    return ProjComplex(alg, -(n - 1), terms, diffs)


def pm_to_module_map(alg, D, src_gens, tgt_gens):
    """The module morphism ⊕P(src) -> ⊕P(tgt) of a path matrix."""
    S, sbasis = free_module(alg, src_gens)
    T, tbasis = free_module(alg, tgt_gens)
    pos = [{b: j for j, b in enumerate(col)} for col in tbasis]
    mats = []
    for w in range(alg.n_vertices):
        m = np.zeros((T.dims[w], S.dims[w]), dtype=np.int64)
        for j, (c, x) in enumerate(sbasis[w]):
            for r, q in zip(*np.nonzero(D[:, c, :])):
                k = alg.mult[q, x]
                if k >= 0:
                    m[pos[w][(r, int(k))], j] += D[r, c, q]
        mats.append(m)
    return ModuleMorphism(S, T, mats)


def homology(X, i):
    """H^i(X) as a representation."""
    alg = X.alg
    if not X.term(i):
        return zero_module(alg)
    d_out = pm_to_module_map(alg, X.diff(i), X.term(i), X.term(i + 1))
    K, inc = kernel(d_out)
    if not X.term(i - 1):
        return K
    d_in = pm_to_module_map(alg, X.diff(i - 1), X.term(i - 1), X.term(i))
    p = alg.p
    sub = []
    for v in range(alg.n_vertices):
        img = la.as_columns(la.column_basis(d_in.mats[v], p), d_in.target.dims[v])
        if K.dims[v] == 0:
            sub.append(np.zeros((0, 0), dtype=np.int64))
            continue
        x = la.solve(inc.mats[v], img, p) if img.shape[1] else np.zeros((K.dims[v], 0), np.int64)
        sub.append(x)
    H, _, _ = quotient(K, sub)
    return H


def homology_profile(X):
    """``{degree: H^degree}`` over the nonzero homology."""
    out = {}
    for i in X.degrees:
        H = homology(X, i)
        if H.dim:
            out[i] = H
    return out


# -- decomposition ------------------------------------------------------------------------


def _candidates(space, rng, p):
    d = space.dim
    for i in range(d):
        c = np.zeros(d, dtype=np.int64)
        c[i] = 1
        yield c
    for i in range(d):
        for j in range(i + 1, d):
            c = np.zeros(d, dtype=np.int64)
            c[i] = c[j] = 1
            yield c
    for _ in range(RANDOM_TRIALS):
        yield rng.integers(0, p, size=d)
    if p ** d <= EXHAUSTIVE_LIMIT:
        yield from la.all_vectors(d, p)


def _top_kind(T, p):
    """'zero' if nilpotent, 'unit' if invertible, else 'split'."""
    n = T.shape[0]
    if n == 0:
        return "zero"
    if la.rank(T, p) == n:
        return "unit"
    if not la.matpow(T, n, p).any():
        return "zero"
    return "split"


def _idempotent_exponent(T, p, limit=1 << 16):
    n = T.shape[0]
    base = la.matpow(T, n, p)
    cur = base
    for k in range(1, limit):
        if np.array_equal((cur @ cur) % p, cur):
            return n * k
        cur = (cur @ base) % p
    raise RuntimeError("no idempotent power found")


def lift_idempotent(g):
    """A genuine idempotent chain map with the same scalar part as a power of g."""
    p = g.alg.p
    e = chain_power(g, _idempotent_exponent(g.top(), p))
    for _ in range(64):
        e2 = compose_chain(e, e)
        if all(np.array_equal(e2.comp(i), e.comp(i)) for i in e.comps):
            return e
        e3 = compose_chain(e2, e)
        e = e2.scale(3) - e3.scale(2)
    raise RuntimeError("idempotent lifting did not converge")


def image_summand(e):
    """The direct summand of X cut out by an idempotent chain map e."""
    X = e.source
    alg = X.alg
    p = alg.p
    iotas, pis, terms = {}, {}, {}
    for i in X.degrees:
        verts = X.term(i)
        E = pm_top(alg, e.comp(i), verts)
        S = [int(c) for c in la.rref(E, p)[1]] if E.size else []
        R = [int(r) for r in la.rref(E[:, S].T, p)[1]] if S else []
        sv = [verts[j] for j in S]
        sel = pm_zero(alg, len(verts), len(S))
        for k, j in enumerate(S):
            sel[j, k, alg.trivial[verts[j]]] = 1
        tsel = pm_zero(alg, len(R), len(verts))
        for k, r in enumerate(R):
            tsel[k, r, alg.trivial[verts[r]]] = 1
        iota = pm_mul(alg, e.comp(i), sel)
        te = pm_mul(alg, tsel, e.comp(i))
        tes = pm_mul(alg, te, sel)
        rv = [verts[r] for r in R]
        pi = pm_mul(alg, pm_inverse(alg, tes, rv, sv), te) if S else pm_zero(alg, 0, len(verts))
        iotas[i], pis[i], terms[i] = iota, pi, tuple(sv)
    lo = X.lo
    diffs = [pm_mul(alg, pm_mul(alg, pis[i + 1], X.diff(i)), iotas[i]) for i in range(lo, X.hi)]
    Z = ProjComplex(alg, lo, [terms[i] for i in X.degrees], diffs)
    return Z


def _split_complex(X, rng):
    if X.size <= 1:
        return None
    H = hom_space_complexes(X, X)
    if H.dim <= 1:
        return None
    p = X.alg.p
    for c in _candidates(H, rng, p):
        g = H.combine(c)
        if _top_kind(g.top(), p) != "split":
            continue
        e = lift_idempotent(g)
        one = identity_chain(X)
        return image_summand(e), image_summand(one - e)
    return None


def indecomposable_complex_summands(X, seed=0):
    rng = np.random.default_rng(seed)
    out, stack = [], [minimize(X)]
    while stack:
        Y = stack.pop()
        if Y.is_zero():
            continue
        parts = _split_complex(Y, rng)
        if parts is None:
            out.append(Y)
        else:
            stack.extend(minimize(Z) for Z in reversed(parts))
    return out


def _term_profile(X):
    return tuple((i, tuple(sorted(X.term(i)))) for i in X.degrees)


def iso_indecomposable_complexes(X, Y):
    """Isomorphism test for indecomposable minimal complexes (local ring criterion)."""
    if _term_profile(X) != _term_profile(Y):
        return False
    if X.key() == Y.key():
        return True
    F = hom_space_complexes(X, Y)
    G = hom_space_complexes(Y, X)
    p = X.alg.p
    for f in F.basis:
        for g in G.basis:
            if _top_kind(compose_chain(g, f).top(), p) == "unit":
                return True
    return False


def decompose_complex(X):
    """Group the indecomposable summands of X into (summand, multiplicity)."""
    groups = []
    for Z in indecomposable_complex_summands(X):
        for grp in groups:
            if iso_indecomposable_complexes(grp[0], Z):
                grp[1] += 1
                break
        else:
            groups.append([Z, 1])
    groups.sort(key=lambda g: (g[0].lo, g[0].size, _term_profile(g[0])))
    return [(Z, m) for Z, m in groups]


def is_isomorphic_complexes(X, Y):
    a = [Z for Z, m in decompose_complex(X) for _ in range(m)]
    b = [Z for Z, m in decompose_complex(Y) for _ in range(m)]
    if len(a) != len(b):
        return False
    used = [False] * len(b)
    for Z in a:
        for j, W in enumerate(b):
            if not used[j] and iso_indecomposable_complexes(Z, W):
                used[j] = True
                break
        else:
            return False
    return True


def stalk_summands(X, registry):
    """Identify X as a sum of shifted modules through its homology.

    Valid when every indecomposable summand of X has homology in a single
    degree (always the case over a hereditary algebra, where complexes are
    formal).  Returns a list of ``(registry handle or None, shift)``; the
    handle is None for a homology summand unknown to the registry.
    """
    out = []
    for i, H in homology_profile(X).items():
        for Z in indecomposable_summands(H):
            out.append((registry.identify(Z), -i, Z))
    return out

"""The module category mod Λ: morphisms, Ext via resolutions, decomposition.

Everything here is exact linear algebra over F_p on top of
:mod:`siltkit.linalg`.  Hom spaces, resolutions and Ext spaces are memoised
on the exact matrices of their arguments.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import linalg as la
from .algebra import Representation, free_module, zero_module, canonical_module
from .errors import (AlgebraMismatch, CapTooSmall, DegreeNotOne, ResolutionCapExceeded)

RESOLUTION_CAP = 32
RANDOM_TRIALS = 64
EXHAUSTIVE_LIMIT = 4096
_CACHE_LIMIT = 200000


class _Memo(dict):
    """A dict that forgets everything once it grows past a limit."""

    def put(self, key, value):
        if len(self) > _CACHE_LIMIT:
            self.clear()
        self[key] = value
        return value


_hom_cache = _Memo()
_res_cache = _Memo()
_ext_cache = _Memo()


# -- morphisms -----------------------------------------------------------------


class ModuleMorphism:
    """A morphism of representations given by one matrix per vertex."""

    __slots__ = ("source", "target", "mats")

    def __init__(self, source, target, mats):
        self.source = source
        self.target = target
        p = source.alg.p
        self.mats = tuple(np.asarray(m, dtype=np.int64).reshape(target.dims[v], source.dims[v]) % p
                          for v, m in enumerate(mats))

    @property
    def alg(self):
        return self.source.alg

    def vector(self):
        return np.concatenate([m.ravel() for m in self.mats]) if self.mats else np.zeros(0, np.int64)

    def is_commuting(self):
        q = self.alg.quiver
        p = self.alg.p
        for a in range(q.n_arrows):
            s, t = q.src[a], q.tgt[a]
            lhs = self.target.maps[a] @ self.mats[s]
            rhs = self.mats[t] @ self.source.maps[a]
            if np.any((lhs - rhs) % p):
                return False
        return True

    def is_zero(self):
        return not any(np.any(m) for m in self.mats)

    def is_iso(self):
        p = self.alg.p
        return all(m.shape[0] == m.shape[1] and la.rank(m, p) == m.shape[0] for m in self.mats)

    def __add__(self, other):
        return ModuleMorphism(self.source, self.target, [a + b for a, b in zip(self.mats, other.mats)])

    def __sub__(self, other):
        return ModuleMorphism(self.source, self.target, [a - b for a, b in zip(self.mats, other.mats)])

    def scale(self, c):
        return ModuleMorphism(self.source, self.target, [c * m for m in self.mats])

    def __repr__(self):
        return f"ModuleMorphism({self.source.dims} -> {self.target.dims})"


def compose(g, f):
    """g ∘ f."""
    p = f.alg.p
    return ModuleMorphism(f.source, g.target, [(b @ a) % p for a, b in zip(f.mats, g.mats)])


def identity(M):
    return ModuleMorphism(M, M, [np.eye(d, dtype=np.int64) for d in M.dims])


def zero_morphism(M, N):
    return ModuleMorphism(M, N, [np.zeros((N.dims[v], M.dims[v]), dtype=np.int64) for v in range(len(M.dims))])


def morphism_from_vector(M, N, vec):
    mats = []
    off = 0
    for v in range(len(M.dims)):
        k = N.dims[v] * M.dims[v]
        mats.append(np.asarray(vec[off:off + k]).reshape(N.dims[v], M.dims[v]))
        off += k
    return ModuleMorphism(M, N, mats)


def fpow(f, e):
    p = f.alg.p
    return ModuleMorphism(f.source, f.target, [la.matpow(m, e, p) for m in f.mats])


# -- Hom -------------------------------------------------------------------------


class HomSpace:
    """A basis of Hom(M, N) with coordinate extraction."""

    def __init__(self, M, N, basis_rows):
        self.source = M
        self.target = N
        self.space = la.QuotientSpace(basis_rows, np.zeros((0, basis_rows.shape[1]), np.int64),
                                      M.alg.p, basis_rows.shape[1])

    @property
    def dim(self):
        return self.space.dim

    @property
    def basis(self):
        return [morphism_from_vector(self.source, self.target, r) for r in self.space.basis]

    def coords(self, f):
        return self.space.coords(f.vector())

    def combine(self, c):
        return morphism_from_vector(self.source, self.target, self.space.combine(c))


def _check_same(M, N):
    if M.alg is not N.alg and M.alg.signature != N.alg.signature:
        raise AlgebraMismatch("modules over different algebras")


def hom_space(M, N):
    _check_same(M, N)
    key = (M.key(), N.key())
    hit = _hom_cache.get(key)
    if hit is not None:
        return hit
    alg = M.alg
    q = alg.quiver
    p = alg.p
    nv = q.n_vertices
    sizes = [N.dims[v] * M.dims[v] for v in range(nv)]
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    nvars = int(offs[-1])
    blocks = []
    for a in range(q.n_arrows):
        s, t = q.src[a], q.tgt[a]
        nrow = N.dims[t] * M.dims[s]
        if nrow == 0:
            continue
        eq = np.zeros((nrow, nvars), dtype=np.int64)
        if sizes[s]:
            eq[:, offs[s]:offs[s + 1]] += np.kron(N.maps[a], np.eye(M.dims[s], dtype=np.int64))
        if sizes[t]:
            eq[:, offs[t]:offs[t + 1]] -= np.kron(np.eye(N.dims[t], dtype=np.int64), M.maps[a].T)
        blocks.append(eq)
    if nvars == 0:
        rows = np.zeros((0, 0), dtype=np.int64)
    elif blocks:
        rows = la.nullspace(np.vstack(blocks) % p, p)
    else:
        rows = np.eye(nvars, dtype=np.int64)
    return _hom_cache.put(key, HomSpace(M, N, rows))


def hom_modules(M, N):
    """Basis of Hom(M, N) as a list of morphisms (deterministic order)."""
    return hom_space(M, N).basis


# -- kernels, cokernels, sums -----------------------------------------------------


def restrict(M, cols):
    """Subrepresentation spanned by the given column bases (one per vertex).

    The columns must span a subrepresentation; the arrow matrices are
    expressed in the new bases.
    """
    alg = M.alg
    q = alg.quiver
    p = alg.p
    maps = []
    for a in range(q.n_arrows):
        s, t = q.src[a], q.tgt[a]
        img = (M.maps[a] @ cols[s]) % p
        if cols[t].shape[1] == 0 or cols[s].shape[1] == 0:
            maps.append(np.zeros((cols[t].shape[1], cols[s].shape[1]), dtype=np.int64))
            continue
        x = la.solve(cols[t], img, p)
        if x is None:
            raise ValueError("columns do not span a subrepresentation")
        maps.append(x)
    dims = [c.shape[1] for c in cols]
    return Representation(alg, dims, maps, check=False)


def kernel(f):
    p = f.alg.p
    cols = [la.nullspace(m, p).T if m.shape[1] else np.zeros((0, 0), np.int64) for m in f.mats]
    cols = [la.as_columns(c, f.source.dims[v]) for v, c in enumerate(cols)]
    K = restrict(f.source, cols)
    return K, ModuleMorphism(K, f.source, cols)


def image(f):
    p = f.alg.p
    cols = [la.as_columns(la.column_basis(m, p), f.target.dims[v]) for v, m in enumerate(f.mats)]
    I = restrict(f.target, cols)
    return I, ModuleMorphism(I, f.target, cols)


def quotient(N, sub_cols):
    """N modulo the subrepresentation spanned by ``sub_cols``.

    Returns ``(Q, proj, section)`` where ``section[v]`` are the columns of N
    chosen as representatives of the basis of Q.
    """
    alg = N.alg
    q = alg.quiver
    p = alg.p
    nv = q.n_vertices
    proj_mats, sections = [], []
    for v in range(nv):
        n = N.dims[v]
        sub = la.as_columns(sub_cols[v], n)
        sub = la.column_basis(sub, p) if sub.size else sub.reshape(n, 0)
        comp = la.complement_columns(sub, p)
        e = np.eye(n, dtype=np.int64)[:, comp]
        full = np.concatenate([sub, e], axis=1)
        inv = la.inverse(full, p) if n else np.zeros((0, 0), np.int64)
        proj_mats.append(inv[sub.shape[1]:, :])
        sections.append(e)
    maps = []
    for a in range(q.n_arrows):
        s, t = q.src[a], q.tgt[a]
        maps.append((proj_mats[t] @ N.maps[a] @ sections[s]) % p)
    Q = Representation(alg, [s.shape[1] for s in sections], maps, check=False)
    return Q, ModuleMorphism(N, Q, proj_mats), sections


def cokernel(f):
    p = f.alg.p
    Q, proj, _ = quotient(f.target, [la.column_basis(m, p) if m.size else m for m in f.mats])
    return Q, proj


def morphism_tools(f):
    """Kernel, cokernel and image of f together with mono/epi flags."""
    p = f.alg.p
    ranks = [la.rank(m, p) if m.size else 0 for m in f.mats]
    K, k = kernel(f)
    Q, c = cokernel(f)
    I, i = image(f)
    return {
        "kernel": K, "kernel_map": k,
        "cokernel": Q, "cokernel_map": c,
        "image": I, "image_map": i,
        "is_mono": all(r == d for r, d in zip(ranks, f.source.dims)),
        "is_epi": all(r == d for r, d in zip(ranks, f.target.dims)),
    }


def is_mono(f):
    p = f.alg.p
    return all((la.rank(m, p) if m.size else 0) == d for m, d in zip(f.mats, f.source.dims))


def is_epi(f):
    p = f.alg.p
    return all((la.rank(m, p) if m.size else 0) == d for m, d in zip(f.mats, f.target.dims))


def direct_sum(mods, alg=None):
    """Direct sum with its inclusion and projection morphisms."""
    if not mods:
        Z = zero_module(alg)
        return Z, [], []
    alg = mods[0].alg
    q = alg.quiver
    nv = q.n_vertices
    dims = [sum(M.dims[v] for M in mods) for v in range(nv)]
    maps = []
    for a in range(q.n_arrows):
        s, t = q.src[a], q.tgt[a]
        m = np.zeros((dims[t], dims[s]), dtype=np.int64)
        rs = cs = 0
        for M in mods:
            m[rs:rs + M.dims[t], cs:cs + M.dims[s]] = M.maps[a]
            rs += M.dims[t]
            cs += M.dims[s]
        maps.append(m)
    S = Representation(alg, dims, maps, check=False)
    incl, proj = [], []
    offs = [0] * nv
    for M in mods:
        im, pm = [], []
        for v in range(nv):
            e = np.zeros((dims[v], M.dims[v]), dtype=np.int64)
            e[offs[v]:offs[v] + M.dims[v], :] = np.eye(M.dims[v], dtype=np.int64)
            im.append(e)
            pm.append(e.T.copy())
            offs[v] += M.dims[v]
        incl.append(ModuleMorphism(M, S, im))
        proj.append(ModuleMorphism(S, M, pm))
    return S, incl, proj


def block_morphism(src_mods, tgt_mods, blocks):
    """Morphism between direct sums from a dict ``(row, col) -> morphism``."""
    S, _, _ = direct_sum(src_mods, src_mods[0].alg if src_mods else tgt_mods[0].alg)
    T, _, _ = direct_sum(tgt_mods, src_mods[0].alg if src_mods else tgt_mods[0].alg)
    nv = len(S.dims)
    mats = [np.zeros((T.dims[v], S.dims[v]), dtype=np.int64) for v in range(nv)]
    for (r, c), f in blocks.items():
        for v in range(nv):
            r0 = sum(M.dims[v] for M in tgt_mods[:r])
            c0 = sum(M.dims[v] for M in src_mods[:c])
            mats[v][r0:r0 + f.target.dims[v], c0:c0 + f.source.dims[v]] += f.mats[v]
    return ModuleMorphism(S, T, mats)


# -- projective resolutions ---------------------------------------------------------


def radical_columns(M):
    """Column bases of rad M (sum of the images of all arrows) per vertex."""
    q = M.alg.quiver
    p = M.alg.p
    out = []
    for v in range(q.n_vertices):
        imgs = [M.maps[a] for a in range(q.n_arrows) if q.tgt[a] == v and M.maps[a].size]
        if imgs:
            out.append(la.as_columns(la.column_basis(np.concatenate(imgs, axis=1), p), M.dims[v]))
        else:
            out.append(np.zeros((M.dims[v], 0), dtype=np.int64))
    return out


def top_dims(M):
    return tuple(M.dims[v] - c.shape[1] for v, c in enumerate(radical_columns(M)))


def projective_cover(M):
    """Minimal projective cover ``eps: P -> M``.

    Returns ``(gens, P, eps)`` where ``gens`` are the generator vertices of
    ``P = free_module(gens)``.
    """
    alg = M.alg
    q = alg.quiver
    p = alg.p
    rad = radical_columns(M)
    gens, lifts = [], []
    for v in range(q.n_vertices):
        for j in la.complement_columns(rad[v], p):
            gens.append(v)
            e = np.zeros(M.dims[v], dtype=np.int64)
            e[j] = 1
            lifts.append(e)
    P, basis = free_module(alg, gens)
    mats = []
    for w in range(q.n_vertices):
        m = np.zeros((M.dims[w], P.dims[w]), dtype=np.int64)
        for j, (k, i) in enumerate(basis[w]):
            m[:, j] = M.path_matrix(i) @ lifts[k] % p
        mats.append(m)
    return tuple(gens), P, ModuleMorphism(P, M, mats)


@dataclass
class Resolution:
    """Minimal projective resolution ``... -> P_1 -> P_0 -> M``."""

    module: Representation
    gens: list
    terms: list
    maps: list               # maps[k-1] = d_k : P_k -> P_{k-1}, k >= 1
    augmentation: object     # P_0 -> M
    syzygies: list           # syzygies[k] = Omega^k M with its inclusion into P_{k-1}
    status: str = "terminated"
    length: int = 0
    cycle: tuple = field(default=())

    @property
    def projdim(self):
        return self.length if self.status == "terminated" else None


def _generator_column(alg, gens, k):
    """Index inside free_module(gens) at vertex gens[k] of the k-th generator."""
    _, basis = free_module(alg, gens)
    v = gens[k]
    return basis[v].index((k, alg.trivial[v]))


def resolve(M, cap=RESOLUTION_CAP):
    """Minimal projective resolution of M (memoised)."""
    key = (M.key(), cap)
    hit = _res_cache.get(key)
    if hit is not None:
        return hit
    gens0, P0, eps = projective_cover(M)
    gens, terms, maps, syz = [gens0], [P0], [], [(M, None)]
    K, inc = kernel(eps)
    seen = [M]
    status, cycle = "terminated", ()
    while K.dim > 0:
        if len(terms) > cap:
            status = "cap"
            break
        rep = next((i for i, S in enumerate(seen) if S.dims == K.dims and is_isomorphic(S, K)), None)
        if rep is not None:
            status, cycle = "cycle", (rep, len(seen))
            syz.append((K, inc))
            break
        seen.append(K)
        syz.append((K, inc))
        g, P, e = projective_cover(K)
        d = compose(inc, e)
        gens.append(g)
        terms.append(P)
        maps.append(d)
        K, inc = kernel(e)
    if status == "terminated":
        syz.append((K, inc))
    res = Resolution(M, gens, terms, maps, eps, syz, status, len(terms) - 1 if status == "terminated" else len(terms), cycle)
    return _res_cache.put(key, res)


def projdim(M, cap=RESOLUTION_CAP):
    """Projective dimension of M, or None when it is infinite (syzygy cycle)."""
    r = resolve(M, cap)
    if r.status == "cap":
        raise ResolutionCapExceeded(f"projective dimension undecided within {cap} steps")
    if M.dim == 0:
        return -1
    return r.projdim


def global_dimension(alg, indecomposables):
    pds = [projdim(M) for M in indecomposables]
    return None if any(d is None for d in pds) else max(pds, default=0)


# -- Ext -------------------------------------------------------------------------------


def _cochain_offsets(N, gens):
    sizes = [N.dims[v] for v in gens]
    return np.concatenate([[0], np.cumsum(sizes)]).astype(int)


def _coboundary(res, k, N):
    """Matrix of Hom(P_k, N) -> Hom(P_{k+1}, N), precomposition with d_{k+1}."""
    alg = N.alg
    p = alg.p
    gk = res.gens[k]
    src_off = _cochain_offsets(N, gk)
    if k + 1 >= len(res.terms):
        return np.zeros((0, int(src_off[-1])), dtype=np.int64)
    gk1 = res.gens[k + 1]
    dst_off = _cochain_offsets(N, gk1)
    out = np.zeros((int(dst_off[-1]), int(src_off[-1])), dtype=np.int64)
    d = res.maps[k]                   # P_{k+1} -> P_k
    _, basis_k = free_module(alg, gk)
    _, basis_k1 = free_module(alg, gk1)
    for h, vh in enumerate(gk1):
        col = basis_k1[vh].index((h, alg.trivial[vh]))
        image_vec = d.mats[vh][:, col]
        for j, (g, path) in enumerate(basis_k[vh]):
            c = image_vec[j]
            if c:
                blk = N.path_matrix(path)
                out[dst_off[h]:dst_off[h + 1], src_off[g]:src_off[g + 1]] += c * blk
    return out % p


class ExtSpace:
    """Ext^k(M, N) as cocycles modulo coboundaries in Hom(P_k, N)."""

    def __init__(self, k, M, N):
        self.k, self.source, self.target = k, M, N
        self.p = M.alg.p
        self.res = resolve(M)
        self.shifted = None
        if self.res.status == "cap" and k + 1 >= len(self.res.terms):
            raise ResolutionCapExceeded("resolution does not reach the requested degree")
        if self.res.status == "cycle" and k >= 2 and k + 1 >= len(self.res.terms):
            # dimension shift along the periodic syzygies: Ext^k(M,N) = Ext^1(Ω^{k-1}M, N)
            rep, m = self.res.cycle
            j = k - 1
            if j >= m:
                j = rep + (j - rep) % (m - rep)
            self.shifted = ext_space(1, self.res.syzygies[j][0], N)
            self.space = self.shifted.space
            self.n = self.shifted.n
            return
        if k >= len(self.res.terms):
            n = 0
            self.space = la.QuotientSpace(np.zeros((0, 0)), np.zeros((0, 0)), self.p, 0)
            self.n = n
            return
        n = int(_cochain_offsets(N, self.res.gens[k])[-1])
        self.n = n
        up = _coboundary(self.res, k, N)
        cycles = la.nullspace(up, self.p) if up.shape[0] else np.eye(n, dtype=np.int64)
        down = _coboundary(self.res, k - 1, N) if k >= 1 else np.zeros((n, 0), np.int64)
        self.space = la.QuotientSpace(cycles, down.T, self.p, n)

    @property
    def dim(self):
        return self.space.dim

    def cocycle(self, coords):
        return self.space.combine(coords)

    def cocycle_morphism(self, coords):
        """The map P_k -> N representing the class with the given coordinates."""
        return cochain_to_morphism(self.res, self.k, self.target, self.cocycle(coords))

    def coords_of_morphism(self, f):
        """Class of a cocycle given as a morphism P_k -> N."""
        alg = f.alg
        gens = self.res.gens[self.k]
        _, basis = free_module(alg, gens)
        vec = []
        for g, v in enumerate(gens):
            col = basis[v].index((g, alg.trivial[v]))
            vec.append(f.mats[v][:, col])
        return self.space.coords(np.concatenate(vec) if vec else np.zeros(0, np.int64))


def cochain_to_morphism(res, k, N, vec):
    alg = N.alg
    p = alg.p
    gens = res.gens[k]
    off = _cochain_offsets(N, gens)
    P, basis = free_module(alg, gens)
    mats = []
    for w in range(alg.n_vertices):
        m = np.zeros((N.dims[w], P.dims[w]), dtype=np.int64)
        for j, (g, path) in enumerate(basis[w]):
            y = vec[off[g]:off[g + 1]]
            m[:, j] = N.path_matrix(path) @ y % p
        mats.append(m)
    return ModuleMorphism(P, N, mats)


def ext_space(k, M, N):
    _check_same(M, N)
    key = (k, M.key(), N.key())
    hit = _ext_cache.get(key)
    if hit is not None:
        return hit
    return _ext_cache.put(key, ExtSpace(k, M, N))


@dataclass
class ExtCocycle:
    degree: int
    source: Representation     # C
    target: Representation     # A
    coords: np.ndarray
    space: ExtSpace = None

    @property
    def chain_map(self):
        return self.space.cocycle_morphism(self.coords)


def ext_modules(k, M, N):
    """Basis of Ext^k(M, N) as cocycles; ``len`` of the list is the dimension."""
    sp = ext_space(k, M, N)
    out = []
    for i in range(sp.dim):
        c = np.zeros(sp.dim, dtype=np.int64)
        c[i] = 1
        out.append(ExtCocycle(k, M, N, c, sp))
    return out


def ext_dim(k, M, N):
    return ext_space(k, M, N).dim


# -- realisation -----------------------------------------------------------------------


@dataclass
class ModuleConflation:
    A: Representation
    B: Representation
    C: Representation
    f: ModuleMorphism
    g: ModuleMorphism

    def is_exact(self):
        p = self.A.alg.p
        if not (is_mono(self.f) and is_epi(self.g)):
            return False
        if not compose(self.g, self.f).is_zero():
            return False
        for v in range(len(self.B.dims)):
            r1 = la.rank(self.f.mats[v], p) if self.f.mats[v].size else 0
            r2 = la.rank(self.g.mats[v], p) if self.g.mats[v].size else 0
            if r1 + r2 != self.B.dims[v]:
                return False
        return True


def realize_blocks(Cs, As, blocks):
    """Realise a class of Ext^1(⊕Cs, ⊕As) given blockwise.

    ``blocks[(i, j)]`` holds coordinates of a class in Ext^1(Cs[i], As[j]).
    The middle term is the pushout of the projective presentation of ⊕Cs
    along the assembled cocycle.
    """
    alg = (Cs or As)[0].alg
    p = alg.p
    C, _, _ = direct_sum(Cs, alg)
    A, _, _ = direct_sum(As, alg)
    ress = [resolve(X) for X in Cs]
    P0s = [r.terms[0] for r in ress]
    P1s = [r.terms[1] if len(r.terms) > 1 else zero_module(alg) for r in ress]
    d1 = block_morphism(P1s, P0s, {(i, i): (r.maps[0] if r.maps else zero_morphism(P1s[i], P0s[i]))
                                   for i, r in enumerate(ress)}) if Cs else None
    eps = block_morphism(P0s, Cs, {(i, i): r.augmentation for i, r in enumerate(ress)}) if Cs else None
    phi_blocks = {}
    for (i, j), c in blocks.items():
        c = np.asarray(c, dtype=np.int64)
        if not np.any(c % p):
            continue
        sp = ext_space(1, Cs[i], As[j])
        phi_blocks[(j, i)] = sp.cocycle_morphism(c)
    if not Cs:
        return ModuleConflation(A, A, C, identity(A), zero_morphism(A, C))
    phi = block_morphism(P1s, As, phi_blocks) if As else None
    P1, P0 = d1.source, d1.target
    AP, incl, projs = direct_sum([A, P0], alg)
    nv = alg.n_vertices
    sub = []
    for v in range(nv):
        top = phi.mats[v] if phi is not None else np.zeros((0, P1.dims[v]), np.int64)
        sub.append(np.concatenate([top, (-d1.mats[v]) % p], axis=0))
    B, qmap, section = quotient(AP, sub)
    f = compose(qmap, incl[0])
    zero_eps = block_morphism([A, P0], [C], {(0, 1): eps})
    gm = [(zero_eps.mats[v] @ section[v]) % p for v in range(nv)]
    g = ModuleMorphism(B, C, gm)
    return ModuleConflation(A, B, C, f, g)


def realize_ext(delta):
    """Short exact sequence A -> B -> C with class ``delta`` in Ext^1(C, A)."""
    if delta.degree != 1:
        raise DegreeNotOne("only degree one classes are realised")
    return realize_blocks([delta.source], [delta.target], {(0, 0): delta.coords})


# -- decomposition --------------------------------------------------------------------


def _candidates(space, rng):
    d = space.dim
    p = space.source.alg.p
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
        for c in la.all_vectors(d, p):
            yield c


def _split(M, rng):
    """Return (X, Y) with M ≅ X ⊕ Y both nonzero, or None when M is indecomposable."""
    if M.dim <= 1:
        return None
    H = hom_space(M, M)
    if H.dim == 1:
        return None
    p = M.alg.p
    n = M.dim
    for c in _candidates(H, rng):
        f = H.combine(c)
        g = fpow(f, n)
        if g.is_zero() or g.is_iso():
            continue
        im = [la.as_columns(la.column_basis(m, p), M.dims[v]) for v, m in enumerate(g.mats)]
        ker = [la.as_columns(la.nullspace(m, p).T, M.dims[v]) if M.dims[v] else np.zeros((0, 0), np.int64)
               for v, m in enumerate(g.mats)]
        return restrict(M, im), restrict(M, ker)
    return None


def indecomposable_summands(M, seed=0):
    """Indecomposable summands of M (with repetition), Fitting splitting."""
    rng = np.random.default_rng(seed)
    out, stack = [], [M]
    while stack:
        X = stack.pop()
        if X.dim == 0:
            continue
        parts = _split(X, rng)
        if parts is None:
            out.append(X)
        else:
            stack.extend(reversed(parts))
    return out


def is_indecomposable(M):
    return M.dim > 0 and _split(M, np.random.default_rng(0)) is None


def _iso_indecomposable(M, N):
    if M.dims != N.dims:
        return False
    if M.key() == N.key():
        return True
    F = hom_space(M, N)
    G = hom_space(N, M)
    if F.dim == 0 or G.dim == 0:
        return False
    for f in F.basis:
        for g in G.basis:
            if compose(g, f).is_iso():
                return True
    return False


def is_isomorphic(M, N):
    """Isomorphism test via decomposition into indecomposables."""
    if M.dims != N.dims:
        return False
    if M.key() == N.key():
        return True
    a = indecomposable_summands(M)
    b = indecomposable_summands(N)
    if len(a) != len(b):
        return False
    used = [False] * len(b)
    for X in a:
        for j, Y in enumerate(b):
            if not used[j] and _iso_indecomposable(X, Y):
                used[j] = True
                break
        else:
            return False
    return True


def decompose(M):
    """Group the indecomposable summands of M into (summand, multiplicity)."""
    groups = []
    for X in indecomposable_summands(M):
        for g in groups:
            if _iso_indecomposable(g[0], X):
                g[1] += 1
                break
        else:
            groups.append([X, 1])
    groups.sort(key=lambda g: (g[0].dim, g[0].dims))
    return [(X, m) for X, m in groups]


class IsoRegistry:
    """Canonical iso-class ids for indecomposable modules."""

    def __init__(self):
        self.items = []
        self._by_dims = {}
        self._by_key = {}

    def __len__(self):
        return len(self.items)

    def identify(self, X):
        """Handle of the class of indecomposable X, or None if unknown."""
        hit = self._by_key.get(X.key())
        if hit is not None:
            return hit
        for h in self._by_dims.get(X.dims, ()):
            if _iso_indecomposable(self.items[h], X):
                self._by_key[X.key()] = h
                return h
        return None

    def add(self, X):
        h = self.identify(X)
        if h is not None:
            return h, False
        h = len(self.items)
        self.items.append(X)
        self._by_dims.setdefault(X.dims, []).append(h)
        self._by_key[X.key()] = h
        return h, True


@dataclass
class Enumeration:
    modules: list
    saturated: bool
    sweeps: int


def enumerate_indecomposables(alg, dim_cap, strict=True):
    """All indecomposables of total dimension ≤ dim_cap reachable from simples.

    Extensions between known indecomposables are realised for every class
    over F_p; new summands are added until a sweep finds nothing new.
    """
    reg = IsoRegistry()
    for v in range(alg.n_vertices):
        reg.add(canonical_module(alg, "simple", v))
    done = set()
    overflow = False
    sweeps = 0
    changed = True
    while changed:
        changed = False
        sweeps += 1
        n = len(reg)
        for i, j in product(range(n), range(n)):
            if (i, j) in done:
                continue
            done.add((i, j))
            C, A = reg.items[i], reg.items[j]
            sp = ext_space(1, C, A)
            if sp.dim == 0:
                continue
            for c in la.all_vectors(sp.dim, alg.p)[1:]:
                B = realize_blocks([C], [A], {(0, 0): c}).B
                for X in indecomposable_summands(B):
                    if reg.identify(X) is not None:
                        continue
                    if X.dim > dim_cap:
                        overflow = True
                        continue
                    reg.add(X)
                    changed = True
    order = sorted(range(len(reg)), key=lambda h: (reg.items[h].dim, reg.items[h].dims, h))
    mods = [reg.items[h] for h in order]
    if overflow and strict:
        raise CapTooSmall(f"indecomposables of dimension above {dim_cap} keep appearing")
    return Enumeration(mods, not overflow, sweeps)

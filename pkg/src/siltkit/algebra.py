"""Bound quiver algebras with monomial relations over a prime field.

A path is stored as ``(start, end, arrows)`` with ``arrows`` a tuple of arrow
indices read left to right, so ``a*b`` means "first a, then b".  Modules are
covariant representations: a vertex carries a vector space and an arrow
``a: v -> w`` carries a matrix of shape ``(dims[w], dims[v])``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import BadRelation, InfiniteDimensional, UnknownVertex, ValidationError

MAX_BASIS = 5000


def _is_prime(p):
    return p >= 2 and all(p % d for d in range(2, int(p ** 0.5) + 1))


class Quiver:
    """Finite quiver with string vertex and arrow ids."""

    def __init__(self, vertices, arrows):
        self.vertices = tuple(str(v) for v in vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValidationError("duplicate vertex id")
        self.vindex = {v: i for i, v in enumerate(self.vertices)}
        arr = []
        for a in arrows:
            if len(a) != 3:
                raise ValidationError(f"arrow must be (id, source, target): {a!r}")
            name, s, t = (str(x) for x in a)
            for x in (s, t):
                if x not in self.vindex:
                    raise UnknownVertex(f"arrow {name!r} names unknown vertex {x!r}")
            arr.append((name, s, t))
        self.arrows = tuple(arr)
        names = [a[0] for a in self.arrows]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate arrow id")
        self.aindex = {a[0]: i for i, a in enumerate(self.arrows)}
        self.src = tuple(self.vindex[a[1]] for a in self.arrows)
        self.tgt = tuple(self.vindex[a[2]] for a in self.arrows)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_arrows(self):
        return len(self.arrows)

    def vertex(self, v):
        """Index of vertex ``v`` (accepts an id string or an index)."""
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            if 0 <= v < self.n_vertices:
                return int(v)
        key = str(v)
        if key not in self.vindex:
            raise UnknownVertex(f"unknown vertex {v!r}")
        return self.vindex[key]

    def __repr__(self):
        return f"Quiver(vertices={list(self.vertices)}, arrows={list(self.arrows)})"


@dataclass(frozen=True)
class Path:
    start: int
    end: int
    arrows: tuple

    @property
    def length(self):
        return len(self.arrows)


class BoundQuiverAlgebra:
    """Path algebra of a quiver modulo monomial relations, over F_p."""

    def __init__(self, quiver, relations=(), p=2):
        if not _is_prime(int(p)):
            raise ValidationError(f"field characteristic {p} is not prime")
        self.quiver = quiver
        self.p = int(p)
        rels = []
        for r in relations:
            word = _parse_word(r)
            if len(word) < 2:
                raise BadRelation(f"relation {r!r} has length < 2")
            idx = []
            for name in word:
                if name not in quiver.aindex:
                    raise BadRelation(f"relation {r!r} names unknown arrow {name!r}")
                idx.append(quiver.aindex[name])
            for x, y in zip(idx, idx[1:]):
                if quiver.tgt[x] != quiver.src[y]:
                    raise BadRelation(f"relation {r!r} is not a path")
            rels.append(tuple(idx))
        self.relations = tuple(rels)
        self.paths = self._enumerate_paths()
        self.index = {(q.start, q.arrows): i for i, q in enumerate(self.paths)}
        self.trivial = tuple(self.index[(v, ())] for v in range(quiver.n_vertices))
        self.signature = (
            tuple(quiver.vertices),
            quiver.arrows,
            tuple(sorted(self.relations)),
            self.p,
        )

    # -- path basis -------------------------------------------------------

    def _forbidden_suffix(self, arrows):
        for r in self.relations:
            k = len(r)
            if len(arrows) >= k and arrows[-k:] == r:
                return True
        return False

    def _enumerate_paths(self):
        q = self.quiver
        longest = max((len(r) for r in self.relations), default=1)
        states = q.n_vertices * sum(q.n_arrows ** i for i in range(longest)) + 1
        found = [Path(v, v, ()) for v in range(q.n_vertices)]
        layer = list(found)
        length = 0
        while layer:
            length += 1
            nxt = []
            for path in layer:
                for ai in range(q.n_arrows):
                    if q.src[ai] != path.end:
                        continue
                    arrows = path.arrows + (ai,)
                    if self._forbidden_suffix(arrows):
                        continue
                    nxt.append(Path(path.start, q.tgt[ai], arrows))
            if nxt and (length > states or len(found) + len(nxt) > MAX_BASIS):
                raise InfiniteDimensional("a cycle survives the relations")
            found.extend(nxt)
            layer = nxt
        names = [a[0] for a in q.arrows]

        def key(path):
            return (path.length, tuple(names[a] for a in path.arrows), path.start)

        return tuple(sorted(found, key=key))

    @property
    def dim(self):
        return len(self.paths)

    @property
    def n_vertices(self):
        return self.quiver.n_vertices

    def path_label(self, i):
        path = self.paths[i]
        if not path.arrows:
            return f"e{self.quiver.vertices[path.start]}"
        return "*".join(self.quiver.arrows[a][0] for a in path.arrows)

    def concat(self, i, j):
        """Index of path i followed by path j, or -1 when the product is zero."""
        return int(self.mult[i, j])

    @cached_property
    def mult(self):
        n = self.dim
        table = np.full((n, n), -1, dtype=np.int64)
        for i, a in enumerate(self.paths):
            for j, b in enumerate(self.paths):
                if a.end != b.start:
                    continue
                key = (a.start, a.arrows + b.arrows)
                k = self.index.get(key)
                if k is not None:
                    table[i, j] = k
        return table

    @cached_property
    def structure(self):
        """Structure constants as an (n*n, n) 0/1 matrix: row i*n+j is e_{ij}."""
        n = self.dim
        t = np.zeros((n * n, n), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                k = self.mult[i, j]
                if k >= 0:
                    t[i * n + j, k] = 1
        return t

    @cached_property
    def paths_from(self):
        out = [[] for _ in range(self.n_vertices)]
        for i, q in enumerate(self.paths):
            out[q.start].append(i)
        return tuple(tuple(x) for x in out)

    @cached_property
    def paths_between(self):
        """``paths_between[u][v]``: indices of paths from u to v."""
        nv = self.n_vertices
        out = [[[] for _ in range(nv)] for _ in range(nv)]
        for i, q in enumerate(self.paths):
            out[q.start][q.end].append(i)
        return tuple(tuple(tuple(c) for c in row) for row in out)

    @cached_property
    def max_length(self):
        return max(q.length for q in self.paths)

    @cached_property
    def is_hereditary(self):
        return not self.relations

    def euler_matrix(self):
        """Matrix of the Euler form of the quiver: I minus the arrow counts."""
        nv = self.n_vertices
        c = np.eye(nv, dtype=np.int64)
        for s, t in zip(self.quiver.src, self.quiver.tgt):
            c[s, t] -= 1
        return c

    def __repr__(self):
        rels = ["*".join(self.quiver.arrows[a][0] for a in r) for r in self.relations]
        return f"BoundQuiverAlgebra({list(self.quiver.vertices)}, relations={rels}, p={self.p})"


def _parse_word(rel):
    if isinstance(rel, str):
        parts = [s.strip() for s in rel.replace(".", "*").split("*")]
        return [s for s in parts if s]
    return [str(x) for x in rel]


def build_algebra(quiver, relations=(), p=2):
    """Build the bound quiver algebra; raises if the path basis is infinite."""
    return BoundQuiverAlgebra(quiver, relations, p)


def linear_quiver(n):
    """The linearly oriented A_n quiver 1 -> 2 -> ... -> n."""
    verts = [str(i) for i in range(1, n + 1)]
    arrows = [(f"a{i}", str(i), str(i + 1)) for i in range(1, n)]
    return Quiver(verts, arrows)


# -- representations ----------------------------------------------------------


class Representation:
    """A finite dimensional representation of a bound quiver."""

    __slots__ = ("alg", "dims", "maps", "_hash")

    def __init__(self, alg, dims, maps, check=True):
        self.alg = alg
        q = alg.quiver
        self.dims = tuple(int(d) for d in dims)
        if len(self.dims) != q.n_vertices or any(d < 0 for d in self.dims):
            raise ValidationError("dimension vector does not match the quiver")
        p = alg.p
        mats = []
        for ai, m in enumerate(maps):
            m = np.asarray(m, dtype=np.int64).reshape(self.dims[q.tgt[ai]], self.dims[q.src[ai]]) % p
            mats.append(m)
        if len(mats) != q.n_arrows:
            raise ValidationError("one matrix per arrow is required")
        self.maps = tuple(mats)
        self._hash = None
        if check:
            for r in alg.relations:
                if np.any(self.word_matrix(r)):
                    raise ValidationError("representation violates a relation")

    @property
    def dim(self):
        return sum(self.dims)

    @property
    def p(self):
        return self.alg.p

    def word_matrix(self, arrows, start=None):
        if not arrows:
            return np.eye(self.dims[start], dtype=np.int64)
        m = self.maps[arrows[0]]
        for a in arrows[1:]:
            m = (self.maps[a] @ m) % self.alg.p
        return m

    def path_matrix(self, i):
        path = self.alg.paths[i]
        return self.word_matrix(path.arrows, path.start)

    def is_zero(self):
        return self.dim == 0

    def key(self):
        """Exact (basis dependent) fingerprint, used for caching."""
        if self._hash is None:
            self._hash = (self.alg.signature, self.dims, tuple(m.tobytes() for m in self.maps))
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Representation) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Representation(dims={self.dims})"


def zero_module(alg):
    q = alg.quiver
    return Representation(alg, [0] * q.n_vertices,
                          [np.zeros((0, 0), dtype=np.int64)] * q.n_arrows, check=False)


def free_module(alg, gens):
    """Direct sum of projectives P(v) for v in ``gens`` (vertex indices).

    Returns ``(module, basis)`` where ``basis[w]`` lists ``(k, path index)``
    for the basis of the space at vertex w: the path from ``gens[k]`` to w
    acting on the k-th generator.
    """
    q = alg.quiver
    basis = [[] for _ in range(q.n_vertices)]
    for k, v in enumerate(gens):
        for i in alg.paths_from[v]:
            basis[alg.paths[i].end].append((k, i))
    pos = [{b: j for j, b in enumerate(col)} for col in basis]
    dims = [len(col) for col in basis]
    maps = []
    for ai in range(q.n_arrows):
        s, t = q.src[ai], q.tgt[ai]
        m = np.zeros((dims[t], dims[s]), dtype=np.int64)
        arrow_path = alg.index[(s, (ai,))]
        for j, (k, i) in enumerate(basis[s]):
            prod = alg.mult[i, arrow_path]
            if prod >= 0:
                m[pos[t][(k, int(prod))], j] = 1
        maps.append(m)
    return Representation(alg, dims, maps, check=False), tuple(tuple(c) for c in basis)


def canonical_module(alg, kind, v):
    """P(v), I(v) or S(v) for vertex ``v``."""
    q = alg.quiver
    v = q.vertex(v)
    if kind == "proj":
        return free_module(alg, [v])[0]
    if kind == "simple":
        dims = [1 if w == v else 0 for w in range(q.n_vertices)]
        maps = [np.zeros((dims[q.tgt[a]], dims[q.src[a]]), dtype=np.int64) for a in range(q.n_arrows)]
        return Representation(alg, dims, maps, check=False)
    if kind == "inj":
        basis = [[] for _ in range(q.n_vertices)]
        for i, path in enumerate(alg.paths):
            if path.end == v:
                basis[path.start].append(i)
        pos = [{b: j for j, b in enumerate(col)} for col in basis]
        dims = [len(c) for c in basis]
        maps = []
        for ai in range(q.n_arrows):
            s, t = q.src[ai], q.tgt[ai]
            m = np.zeros((dims[t], dims[s]), dtype=np.int64)
            for j, i in enumerate(basis[s]):
                path = alg.paths[i]
                if path.arrows and path.arrows[0] == ai:
                    rest = alg.index[(t, path.arrows[1:])]
                    m[pos[t][rest], j] = 1
            maps.append(m)
        return Representation(alg, dims, maps, check=False)
    raise ValidationError(f"unknown module kind {kind!r}")


def interval_module(alg, a, b):
    """Thin module supported on the vertices between a and b of a line quiver.

    Vertices are taken in the order listed in the quiver; every arrow between
    two supported vertices acts by the identity.
    """
    q = alg.quiver
    ia, ib = q.vertex(a), q.vertex(b)
    lo, hi = min(ia, ib), max(ia, ib)
    dims = [1 if lo <= w <= hi else 0 for w in range(q.n_vertices)]
    maps = []
    for ai in range(q.n_arrows):
        s, t = q.src[ai], q.tgt[ai]
        maps.append(np.ones((dims[t], dims[s]), dtype=np.int64))
    return Representation(alg, dims, maps)

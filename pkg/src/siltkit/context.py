"""Extriangulated contexts over finite universes of indecomposables.

A context fixes an ambient category (finite dimensional modules or bounded
complexes of projectives), a finite ordered universe of indecomposables in
it, and everything needed to compute with additive subcategories: Hom and
E^k dimensions, realisation of extension classes, inflation and deflation
tests, closure operators, perpendicular categories and approximations.

Objects of a context are ``ObjectExpr`` values: sorted tuples of universe
indices, one entry per indecomposable summand (so multiplicities show up as
repetitions).  Subcategories are represented by sorted tuples of distinct
indices and stand for the additive closure of those indecomposables.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from . import linalg as la
from .algebra import canonical_module
from .complexes import (
    ChainMap,
    block_chain,
    cocone as chain_cocone,
    compose_chain,
    decompose_complex,
    direct_sum_complexes,
    hom_space_complexes,
    homology_profile,
    identity_chain,
    mapping_cone,
    pm_zero,
    resolve_to_complex,
    shift,
    stalk_summands,
)
from .errors import (
    ApproximationFailure,
    BudgetExceeded,
    CapTooSmall,
    InfiniteProjDim,
    MembershipViolation,
    NoFiniteBound,
    NoProjectives,
    NotSubcat,
    ResolutionCapExceeded,
    ValidationError,
    WindowExhausted,
)
from .modules import (
    IsoRegistry,
    block_morphism,
    cokernel,
    compose,
    direct_sum,
    enumerate_indecomposables,
    ext_dim,
    ext_space,
    global_dimension,
    hom_space,
    identity,
    indecomposable_summands,
    is_epi,
    is_mono,
    kernel,
    realize_blocks,
    resolve,
)

KINDS = ("module", "derived", "ftheta", "pinfty")
DEFAULT_BOUND = 2
DEFAULT_CLASS_LIMIT = 1 << 12
DEFAULT_MORPHISM_LIMIT = 1 << 18


def expr(handles):
    """Normalise an iterable of handles into an ObjectExpr."""
    return tuple(sorted(handles))


def subcat(handles):
    """Normalise an iterable of handles into a Subcat (distinct, sorted)."""
    return tuple(sorted(set(handles)))


def module_label(M):
    alg = M.alg
    names = alg.quiver.vertices
    for kind, tag in (("proj", "P"), ("simple", "S"), ("inj", "I")):
        for v in range(alg.n_vertices):
            N = canonical_module(alg, kind, v)
            if N.dims == M.dims and (M.key() == N.key() or _same_class(M, N)):
                return f"{tag}{names[v]}"
    return "M[" + ",".join(str(d) for d in M.dims) + "]"


def _same_class(M, N):
    from .modules import is_isomorphic

    return is_isomorphic(M, N)


# -- ambients --------------------------------------------------------------------------


@dataclass
class Realization:
    """A realised conflation A -> B -> C in an ambient category."""

    A: object
    B: object
    C: object
    f: object
    g: object


class ModuleAmbient:
    """Finite dimensional modules over a bound quiver algebra."""

    kind = "module"

    def __init__(self, alg, dim_cap=8):
        self.alg = alg
        self.dim_cap = dim_cap
        enum = enumerate_indecomposables(alg, dim_cap)
        self.registry = IsoRegistry()
        for M in enum.modules:
            self.registry.add(M)
        self.objects = list(self.registry.items)
        self.labels = [module_label(M) for M in self.objects]
        self._summands = {}

    def sum(self, objs):
        return direct_sum(list(objs), self.alg)[0]

    def hom(self, X, Y):
        return hom_space(X, Y)

    def compose(self, g, f):
        return compose(g, f)

    def identity(self, X):
        return identity(X)

    def block(self, srcs, tgts, blocks):
        return block_morphism(list(srcs), list(tgts), blocks)

    def is_iso(self, f):
        return f.is_iso()

    def cone(self, f):
        return cokernel(f)[0] if is_mono(f) else None

    def cocone(self, g):
        return kernel(g)[0] if is_epi(g) else None

    def summands(self, X):
        """Registry handles of the indecomposable summands (None when unknown)."""
        if X.dim == 0:
            return []
        key = X.key()
        hit = self._summands.get(key)
        if hit is None:
            hit = self._summands[key] = [self.registry.identify(Z) for Z in indecomposable_summands(X)]
        return hit

    def ext_dim(self, k, X, Y):
        return ext_dim(k, X, Y)

    def ext_basis(self, k, X, Y):
        return [row for row in ext_space(k, X, Y).space.basis]

    def realize(self, Cs, As, blocks):
        c = realize_blocks(list(Cs), list(As), blocks)
        return Realization(c.A, c.B, c.C, c.f, c.g)


class DerivedAmbient:
    """Bounded complexes of projectives, with shifted modules in a window."""

    kind = "derived"

    def __init__(self, modamb, window):
        lo, hi = int(window[0]), int(window[1])
        if lo > hi:
            raise ValidationError(f"empty shift window [{lo}, {hi}]")
        alg = modamb.alg
        gl = global_dimension(alg, modamb.objects)
        if gl is None:
            raise InfiniteProjDim("the derived context needs finite global dimension")
        self.alg = alg
        self.mod = modamb
        self.window = (lo, hi)
        self.gldim = gl
        self.hereditary = alg.is_hereditary
        self.handles = [(m, s) for s in range(lo, hi + 1) for m in range(len(modamb.objects))]
        self.index = {hs: i for i, hs in enumerate(self.handles)}
        base = [resolve_to_complex(M) for M in modamb.objects]
        self.objects = [shift(base[m], s) for m, s in self.handles]
        self.labels = [_shift_label(modamb.labels[m], s) for m, s in self.handles]
        self._summands = {}

    def sum(self, objs):
        return direct_sum_complexes(list(objs), self.alg)

    def hom(self, X, Y):
        return hom_space_complexes(X, Y)

    def compose(self, g, f):
        return compose_chain(g, f)

    def identity(self, X):
        return identity_chain(X)

    def block(self, srcs, tgts, blocks):
        return block_chain(list(srcs), list(tgts), blocks, self.alg)

    def is_iso(self, f):
        t = f.top()
        return t.shape[0] == t.shape[1] and la.is_invertible(t, self.alg.p)

    def cone(self, f):
        return mapping_cone(f)

    def cocone(self, g):
        return chain_cocone(g)

    def shifted_modules(self, X):
        """``(module handle or None, shift)`` for each summand of X."""
        if X.is_zero():
            return []
        if self.hereditary:
            return [(h, s) for h, s, _ in stalk_summands(X, self.mod.registry)]
        out = []
        for Z, mult in decompose_complex(X):
            prof = homology_profile(Z)
            if len(prof) != 1:
                out.extend([(None, None)] * mult)
                continue
            (i, H), = prof.items()
            parts = indecomposable_summands(H)
            h = self.mod.registry.identify(parts[0]) if len(parts) == 1 else None
            out.extend([(h, -i)] * mult)
        return out

    def summands(self, X):
        key = X.key()
        hit = self._summands.get(key)
        if hit is None:
            hit = [None if h is None else self.index.get((h, s)) for h, s in self.shifted_modules(X)]
            self._summands[key] = hit
        return hit

    def ext_dim(self, k, X, Y):
        return hom_space_complexes(X, shift(Y, k)).dim

    def ext_basis(self, k, X, Y):
        return list(hom_space_complexes(X, shift(Y, k)).space.basis)

    def realize(self, Cs, As, blocks):
        alg = self.alg
        Cs, As = list(Cs), list(As)
        sA = [shift(A, 1) for A in As]
        bl = {}
        for (i, j), c in blocks.items():
            c = np.asarray(c, dtype=np.int64)
            if np.any(c % alg.p):
                bl[(j, i)] = hom_space_complexes(Cs[i], sA[j]).combine(c)
        delta = block_chain(Cs, sA, bl, alg)
        C, A = delta.source, self.sum(As)
        B = chain_cocone(delta, minimal=False)
        f = ChainMap(A, B, {i: _stack_rows(alg, pm_zero(alg, len(C.term(i)), len(A.term(i))),
                                           _pm_eye(alg, A.term(i))) for i in B.degrees})
        g = ChainMap(B, C, {i: _stack_cols(alg, _pm_eye(alg, C.term(i)),
                                           pm_zero(alg, len(C.term(i)), len(A.term(i)))) for i in B.degrees})
        return Realization(A, B, C, f, g)


def _pm_eye(alg, verts):
    from .complexes import pm_identity

    return pm_identity(alg, verts)


def _stack_rows(alg, top, bottom):
    return np.concatenate([top, bottom], axis=0)


def _stack_cols(alg, left, right):
    return np.concatenate([left, right], axis=1)


def _shift_label(label, s):
    if s == 0:
        return label
    return f"Σ{label}" if s == 1 else f"Σ^{s}{label}"


# -- contexts ----------------------------------------------------------------------------


@dataclass
class Conflation:
    """A realised conflation A -> B -> C of a context, with its class."""

    A: tuple
    B: tuple
    C: tuple
    classes: dict
    realization: object = None


@dataclass
class ExtInfo:
    """Dimension of E^k(X, Y) with a basis of classes (rows per summand pair)."""

    k: int
    dim: int
    blocks: dict = field(default_factory=dict)


@dataclass
class Approximation:
    side: str
    source: tuple
    target: tuple
    morphism: object
    components: list
    good: bool
    corner: tuple = None


class ExtContext:
    """An extriangulated category with a finite universe of indecomposables.

    Contexts are built by ``make_context`` and never change afterwards apart
    from their oracle caches.  ``universe`` lists ambient handles; the
    context addresses them by position.
    """

    def __init__(self, kind, ambient, universe, *, parent=None, projectives=None,
                 bound=DEFAULT_BOUND, class_limit=DEFAULT_CLASS_LIMIT,
                 morphism_limit=DEFAULT_MORPHISM_LIMIT, threads=1, labels=None):
        if kind not in KINDS:
            raise ValidationError(f"unknown context kind {kind!r}")
        self.kind = kind
        self.amb = ambient
        self.alg = ambient.alg
        self.p = ambient.alg.p
        self.universe = tuple(universe)
        self.n = len(self.universe)
        self.local = {a: i for i, a in enumerate(self.universe)}
        self.labels = list(labels) if labels is not None else [ambient.labels[a] for a in self.universe]
        self.parent = parent
        self.projectives = None if projectives is None else subcat(projectives)
        self.injectives = None
        self.bound = bound
        self.class_limit = class_limit
        self.morphism_limit = morphism_limit
        self.threads = max(1, int(threads))
        self.theta = None
        self._sum = {}
        self._ext = {}
        self._conf = {}
        self._morph = {}
        self._omega = {}
        self._hom = {}
        self._minimal_cache = {}

    # -- objects --------------------------------------------------------------

    @property
    def all(self):
        return tuple(range(self.n))

    def obj(self, h):
        return self.amb.objects[self.universe[h]]

    def parts(self, e):
        return [self.obj(h) for h in e]

    def materialize(self, e):
        e = expr(e)
        hit = self._sum.get(e)
        if hit is None:
            hit = self._sum[e] = self.obj(e[0]) if len(e) == 1 else self.amb.sum(self.parts(e))
        return hit

    def label(self, e):
        e = expr(e)
        if not e:
            return "0"
        out = []
        for h in sorted(set(e)):
            m = e.count(h)
            out.append(self.labels[h] + (f"^{m}" if m > 1 else ""))
        return "⊕".join(out)

    def check_subcat(self, S):
        S = subcat(S)
        if any(not 0 <= h < self.n for h in S):
            raise NotSubcat(f"handles {S} are not all in the universe of size {self.n}")
        return S

    def identify(self, X, soft=False):
        """ObjectExpr of an ambient object whose summands lie in the universe.

        Summands outside the universe raise the kind's error, or make the
        call return None when ``soft`` is set.
        """
        hs = self.amb.summands(X)
        out = []
        for a in hs:
            h = None if a is None else self.local.get(a)
            if h is None:
                if soft:
                    return None
                self._outside(a)
            out.append(h)
        return expr(out)

    def _outside(self, a):
        if self.kind == "derived":
            raise WindowExhausted("an object leaves the shift window of the context")
        if self.kind == "module":
            raise CapTooSmall("an indecomposable above the dimension cap appeared")
        if self.kind == "ftheta" and a is None:
            raise WindowExhausted("an object leaves the shift window of the parent")
        raise MembershipViolation("an object outside the subcategory appeared")

    # -- Hom and E ------------------------------------------------------------

    def hom(self, X, Y):
        key = (expr(X), expr(Y))
        hit = self._hom.get(key)
        if hit is None:
            hit = self._hom[key] = self.amb.hom(self.materialize(key[0]), self.materialize(key[1]))
        return hit

    def hom_dim(self, X, Y):
        return sum(self.hom((x,), (y,)).dim for x in X for y in Y)

    def ext1(self, x, y):
        return self.ext(1, x, y)

    def ext(self, k, x, y):
        """dim E^k(x, y) for universe members x, y."""
        key = (k, x, y)
        hit = self._ext.get(key)
        if hit is not None:
            return hit
        if k == 1 or self.kind != "ftheta":
            try:
                val = self.amb.ext_dim(k, self.obj(x), self.obj(y))
            except ResolutionCapExceeded as exc:
                raise NoFiniteBound(str(exc)) from exc
        else:
            val = sum(self.ext(1, w, y) for w in self.syzygy(x, k - 1))
        self._ext[key] = val
        return val

    def ext_dim(self, k, X, Y):
        return sum(self.ext(k, x, y) for x in X for y in Y)

    def ext_info(self, k, X, Y):
        """``ctx_ext``: dimension and a basis of E^k(X, Y) by summand pairs."""
        X, Y = expr(X), expr(Y)
        blocks = {}
        for i, x in enumerate(X):
            for j, y in enumerate(Y):
                if k == 1 or self.kind != "ftheta":
                    rows = self.amb.ext_basis(k, self.obj(x), self.obj(y))
                else:
                    rows = [(w, r) for w in self.syzygy(x, k - 1)
                            for r in self.amb.ext_basis(1, self.obj(w), self.obj(y))]
                if rows:
                    blocks[(i, j)] = rows
        return ExtInfo(k, sum(len(r) for r in blocks.values()), blocks)

    # -- vanishing bounds ------------------------------------------------------

    def k_bound(self, x, y):
        """Largest k for which E^k(x, y) can be nonzero; with its justification."""
        if self.kind in ("module", "pinfty"):
            res = resolve(self.obj(x))
            if res.status == "terminated":
                return res.length, "projective dimension"
            if res.status == "cycle":
                return len(res.syzygies) + 1, "syzygy cycle"
            raise NoFiniteBound("the projective resolution hit its length cap")
        if self.kind == "derived":
            a = self.amb.handles[self.universe[x]][1]
            b = self.amb.handles[self.universe[y]][1]
            return max(0, a - b + self.amb.gldim), "shift difference plus global dimension"
        chain = self.syzygy_chain(x)
        return len(chain), "syzygy chain in the subcategory"

    def vanishes(self, x, y, n=0):
        """E^k(x, y) = 0 for every k >= n + 1."""
        top, _ = self.k_bound(x, y)
        return all(self.ext(k, x, y) == 0 for k in range(n + 1, top + 1))

    # -- syzygies in subcategory contexts ----------------------------------------

    def require_projectives(self):
        if self.projectives is None:
            raise NoProjectives("this context has no projective generator")
        return self.projectives

    def omega(self, x):
        """Cocone of the minimal right projective approximation of x."""
        hit = self._omega.get(x)
        if hit is not None:
            return hit
        P = self.require_projectives()
        if x in P:
            out = ()
        else:
            a = approx(self, "right", P, (x,), minimal=True)
            if not a.good:
                raise ApproximationFailure(f"projective cover of {self.labels[x]} is not a deflation")
            out = a.corner
        self._omega[x] = out
        return out

    def syzygy(self, x, j):
        """Ω^j of x as an ObjectExpr."""
        cur = (x,)
        for _ in range(j):
            cur = expr(w for y in cur for w in self.omega(y))
            if not cur:
                break
        return cur

    def syzygy_chain(self, x):
        """Distinct syzygies Ω^0 x, Ω^1 x, ... up to zero or the first repeat."""
        seen = []
        cur = (x,)
        while cur and cur not in seen:
            seen.append(cur)
            cur = expr(w for y in cur for w in self.omega(y))
        return seen

    def projdim(self, X):
        """Projective dimension of X, or None when infinite."""
        X = expr(X)
        if self.kind == "derived":
            raise NoProjectives("derived contexts have no projective objects")
        if not X:
            return -1
        if self.kind in ("module", "pinfty"):
            out = -1
            for x in X:
                res = resolve(self.obj(x))
                if res.status == "cap":
                    raise ResolutionCapExceeded("resolution cap reached")
                if res.status == "cycle":
                    return None
                out = max(out, res.length)
            return out
        out = -1
        for x in X:
            chain = self.syzygy_chain(x)
            nxt = expr(w for y in chain[-1] for w in self.omega(y))
            if nxt:
                return None
            out = max(out, len(chain) - 1)
        return out

    # -- realisation -----------------------------------------------------------

    def _class_blocks(self, C, A, vec):
        blocks = {}
        off = 0
        for i, c in enumerate(C):
            for j, a in enumerate(A):
                d = self.ext1(c, a)
                if d:
                    blocks[(i, j)] = vec[off:off + d]
                    off += d
        return blocks

    def realize(self, C, A, vec):
        """Realise the class with coordinates ``vec`` in E(C, A)."""
        C, A = expr(C), expr(A)
        vec = np.asarray(vec, dtype=np.int64) % self.p
        blocks = self._class_blocks(C, A, vec)
        if not any(np.any(b) for b in blocks.values()):
            return Conflation(A, expr(A + C), C, blocks)
        r = self.amb.realize(self.parts(C), self.parts(A), blocks)
        B = self.identify(self._minimal(r.B))
        return Conflation(A, B, C, blocks, r)

    def _minimal(self, X):
        if self.amb.kind == "derived":
            from .complexes import minimize

            return minimize(X)
        return X

    def conflations(self, C, A):
        """Middle terms of every class in E(C, A) as ``[(vec, B)]``."""
        key = (expr(C), expr(A))
        hit = self._conf.get(key)
        if hit is not None:
            return hit
        C, A = key
        d = self.ext_dim(1, C, A)
        if d == 0:
            out = [(np.zeros(0, np.int64), expr(A + C))]
        else:
            if self.p ** d > self.class_limit:
                raise BudgetExceeded(f"{self.p}^{d} extension classes exceed the class limit")
            out = [(v, self.realize(C, A, v).B) for v in la.all_vectors(d, self.p)]
        self._conf[key] = out
        return out

    def middles(self, C, A):
        return [B for _, B in self.conflations(C, A)]

    # -- inflations --------------------------------------------------------------

    def cone_of(self, f, soft=False):
        """ObjectExpr of the cone if f is an inflation, else None."""
        Z = self.amb.cone(f)
        if Z is None:
            return None
        return self.identify(self._minimal(Z), soft=soft or self.kind in ("pinfty", "ftheta"))

    def cocone_of(self, g, soft=False):
        Z = self.amb.cocone(g)
        if Z is None:
            return None
        return self.identify(self._minimal(Z), soft=soft or self.kind in ("pinfty", "ftheta"))

    def morphisms(self, X, Y):
        space = self.hom(X, Y)
        if self.p ** space.dim > self.morphism_limit:
            raise BudgetExceeded(f"{self.p}^{space.dim} morphisms exceed the morphism limit")
        return [space.combine(c) for c in la.all_vectors(space.dim, self.p)]

    def morphism_corners(self, X, Y):
        """Summands of cones of inflations and cocones of deflations X -> Y."""
        key = (expr(X), expr(Y))
        hit = self._morph.get(key)
        if hit is not None:
            return hit
        cones, cocones = set(), set()
        for f in self.morphisms(*key):
            c = self.cone_of(f, soft=True)
            if c is not None:
                cones.update(c)
            c = self.cocone_of(f, soft=True)
            if c is not None:
                cocones.update(c)
        hit = self._morph[key] = (frozenset(cones), frozenset(cocones))
        return hit

    def fan_out(self, fn, items):
        """Map ``fn`` over items, in parallel when threads > 1, in order."""
        if self.threads > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.threads) as ex:
                return list(ex.map(fn, items))
        return [fn(x) for x in items]


def is_inflation(ctx, f):
    """``(True, cone)`` if f is an inflation of the context, else ``(False, None)``."""
    c = ctx.cone_of(f)
    return (c is not None), c


def is_deflation(ctx, g):
    c = ctx.cocone_of(g)
    return (c is not None), c


# -- constructors ---------------------------------------------------------------------------


def make_context(kind, *, alg=None, dim_cap=8, window=(-1, 1), parent=None, theta=None,
                 threads=1, bound=DEFAULT_BOUND):
    """Build a context of the given kind.

    ``module``: needs ``alg`` and ``dim_cap``.  ``pinfty``: a module parent
    (or ``alg``).  ``derived``: ``alg`` (or a module parent) and a shift
    window.  ``ftheta``: a derived parent and a list of universe handles of
    the parent forming a standardizable set.
    """
    if kind == "module":
        if alg is None:
            raise ValidationError("a module context needs an algebra")
        amb = ModuleAmbient(alg, dim_cap)
        projs = _projective_handles(amb)
        return ExtContext("module", amb, range(len(amb.objects)), projectives=projs,
                          threads=threads, bound=bound)
    if kind == "pinfty":
        if parent is None:
            parent = make_context("module", alg=alg, dim_cap=dim_cap, threads=threads, bound=bound)
        amb = parent.amb
        keep = []
        for a, M in enumerate(amb.objects):
            res = resolve(M)
            if res.status == "cap":
                raise ResolutionCapExceeded("cannot decide finite projective dimension")
            if res.status == "terminated":
                keep.append(a)
        local = {a: i for i, a in enumerate(keep)}
        projs = [local[a] for a in _projective_handles(amb)]
        ctx = ExtContext("pinfty", amb, keep, parent=parent, projectives=projs,
                         threads=threads, bound=bound)
        return ctx
    if kind == "derived":
        if parent is not None and parent.kind == "module":
            modamb = parent.amb
        elif alg is not None:
            modamb = ModuleAmbient(alg, dim_cap)
        else:
            raise ValidationError("a derived context needs an algebra")
        amb = DerivedAmbient(modamb, window)
        return ExtContext("derived", amb, range(len(amb.objects)), threads=threads, bound=bound)
    if kind == "ftheta":
        from .standardization import check_standardizable, f_theta, projective_generator

        if parent is None or parent.kind != "derived" or theta is None:
            raise ValidationError("an ftheta context needs a derived parent and a theta list")
        ts = check_standardizable(parent, theta)
        if not ts.ok:
            raise ValidationError(f"theta is not standardizable: {ts.failures}")
        ctx = f_theta(parent, ts)
        projective_generator(ctx)
        return ctx
    raise ValidationError(f"unknown context kind {kind!r}")


def _projective_handles(amb):
    out = []
    for v in range(amb.alg.n_vertices):
        P = canonical_module(amb.alg, "proj", v)
        if P.dim:
            out.append(amb.registry.identify(P))
    return subcat(out)


# -- closure operators ---------------------------------------------------------------------


def objects_upto(S, B):
    """Every ObjectExpr with 1..B summands taken from S."""
    S = subcat(S)
    out = []
    for r in range(1, B + 1):
        out.extend(combinations_with_replacement(S, r))
    return out


def _with_zero(S, B):
    return [()] + objects_upto(S, B)


def star(ctx, X, Y):
    """Summands of middle terms of conflations with ends in add X and add Y."""
    out = set()
    for A in _with_zero(X, ctx.bound):
        for C in _with_zero(Y, ctx.bound):
            if not A and not C:
                continue
            for B in ctx.middles(C, A):
                out.update(B)
    return subcat(out)


def cone(ctx, X, Y):
    """Summands of C over conflations A -> B -> C with A in add X, B in add Y."""
    Yset = set(Y)
    out = set(Y)
    As = objects_upto(X, ctx.bound)
    for C in objects_upto(ctx.all, ctx.bound):
        if set(C) <= out:
            continue
        for A in As:
            if any(set(B) <= Yset for B in ctx.middles(C, A)):
                out.update(C)
                break
    return subcat(out)


def cocone(ctx, X, Y):
    """Summands of A over conflations A -> B -> C with B in add X, C in add Y."""
    Xset = set(X)
    out = set(X)
    Cs = objects_upto(Y, ctx.bound)
    for A in objects_upto(ctx.all, ctx.bound):
        if set(A) <= out:
            continue
        for C in Cs:
            if any(set(B) <= Xset for B in ctx.middles(C, A)):
                out.update(A)
                break
    return subcat(out)


def wedge(ctx, M, n):
    """M^∧_n: cone(M^∧_{n-1}, M) with M^∧_0 = add M."""
    M = ctx.check_subcat(M)
    cur = M
    for _ in range(n):
        cur = cone(ctx, cur, M)
    return cur


def vee(ctx, M, n):
    M = ctx.check_subcat(M)
    cur = M
    for _ in range(n):
        cur = cocone(ctx, M, cur)
    return cur


def wedge_inf(ctx, M):
    M = ctx.check_subcat(M)
    cur = M
    while True:
        nxt = cone(ctx, cur, M)
        if nxt == cur:
            return cur
        cur = nxt


def vee_inf(ctx, M):
    M = ctx.check_subcat(M)
    cur = M
    while True:
        nxt = cocone(ctx, M, cur)
        if nxt == cur:
            return cur
        cur = nxt


def closure(ctx, op, *args, n=0):
    """Dispatch for the closure operators by name."""
    table = {
        "star": lambda: star(ctx, args[0], args[1]),
        "cone": lambda: cone(ctx, args[0], args[1]),
        "cocone": lambda: cocone(ctx, args[0], args[1]),
        "wedge_n": lambda: wedge(ctx, args[0], n),
        "vee_n": lambda: vee(ctx, args[0], n),
        "wedge_inf": lambda: wedge_inf(ctx, args[0]),
        "vee_inf": lambda: vee_inf(ctx, args[0]),
    }
    if op not in table:
        raise ValidationError(f"unknown closure operator {op!r}")
    return table[op]()


def perp(ctx, side, X, n=0):
    """``X^{⊥>n}`` (side "right") or ``^{⊥>n}X`` (side "left") in the universe."""
    X = ctx.check_subcat(X)
    if side == "right":
        keep = [y for y in ctx.all if all(ctx.vanishes(x, y, n) for x in X)]
    elif side == "left":
        keep = [y for y in ctx.all if all(ctx.vanishes(y, x, n) for x in X)]
    else:
        raise ValidationError(f"unknown side {side!r}")
    return subcat(keep)


def thick_closure(ctx, X):
    """Smallest thick subcategory of the universe containing X.

    Extensions, cones and cocones come from the conflation table; cones of
    inflations and cocones of deflations between objects of at most
    ``ctx.bound`` summands are found by enumerating all morphisms.  In a
    derived context corners leaving the window are skipped, so a result
    short of the universe is reported as WindowExhausted.
    """
    cur = set(ctx.check_subcat(X))
    while True:
        S = subcat(cur)
        new = set(cur)
        new.update(star(ctx, S, S))
        new.update(cone(ctx, S, S))
        new.update(cocone(ctx, S, S))
        if new == cur and len(cur) < ctx.n:
            objs = objects_upto(S, ctx.bound)
            pairs = [(A, B) for A in objs for B in objs]
            for cs, ccs in ctx.fan_out(lambda ab: ctx.morphism_corners(*ab), pairs):
                new.update(cs)
                new.update(ccs)
        if new == cur or len(new) == ctx.n:
            cur = new
            break
        cur = new
    out = subcat(cur)
    if ctx.kind == "derived" and len(out) < ctx.n:
        raise WindowExhausted("the thick closure could not be certified inside the window")
    return out


def is_resolving(ctx, X):
    """``(flag, certificate)`` for X being a resolving subcategory."""
    X = ctx.check_subcat(X)
    P = ctx.require_projectives()
    missing = [h for h in P if h not in X]
    if missing:
        return False, {"reason": "projectives", "witness": missing}
    ext = [h for h in star(ctx, X, X) if h not in X]
    if ext:
        return False, {"reason": "extensions", "witness": ext}
    coc = [h for h in cocone(ctx, X, X) if h not in X]
    if coc:
        return False, {"reason": "cocones", "witness": coc}
    return True, {"reason": "closed"}


def projdim(ctx, X):
    return ctx.projdim(X)


# -- approximations -----------------------------------------------------------------------------


def _radical_basis(ctx, d):
    """Basis of the radical of End(d) as morphisms: f - λ·id for each basis f."""
    key = ("rad", d)
    hit = ctx._minimal_cache.get(key)
    if hit is not None:
        return hit
    H = ctx.hom((d,), (d,))
    ident = ctx.amb.identity(ctx.obj(d))
    out = []
    for f in H.basis:
        for lam in range(ctx.p):
            g = f - ident.scale(lam) if lam else f
            if not ctx.amb.is_iso(g):
                out.append(g)
                break
        else:
            raise ApproximationFailure("endomorphism ring with a residue field larger than F_p")
    ctx._minimal_cache[key] = out
    return out


def _radical_maps(ctx, a, b):
    """Spanning set of rad(a, b) between universe members."""
    if a == b:
        return _radical_basis(ctx, a)
    return ctx.hom((a,), (b,)).basis


def _chosen(ctx, space, sub_rows):
    """Basis elements of ``space`` completing the span of ``sub_rows``."""
    if not sub_rows:
        return list(range(space.dim))
    mat = np.array(sub_rows, dtype=np.int64).reshape(len(sub_rows), space.dim).T
    return la.complement_columns(mat, ctx.p)


def approx(ctx, side, D, X, minimal=False):
    """Left or right add(D)-approximation of X.

    The canonical approximation uses a Hom basis for each member of D; the
    minimal one keeps only basis maps outside the radical part, which is
    spanned by maps factoring through radical maps between members of D.
    """
    D = ctx.check_subcat(D)
    X = expr(X)
    Xo = ctx.materialize(X) if X else None
    comps = []
    for d in D:
        if side == "left":
            space = ctx.hom(X, (d,)) if X else None
        elif side == "right":
            space = ctx.hom((d,), X) if X else None
        else:
            raise ValidationError(f"unknown side {side!r}")
        if space is None or space.dim == 0:
            continue
        basis = space.basis
        if minimal:
            sub = []
            for e in D:
                for r in _radical_maps(ctx, *((e, d) if side == "left" else (d, e))):
                    other = ctx.hom(X, (e,)) if side == "left" else ctx.hom((e,), X)
                    for h in other.basis:
                        comp = ctx.amb.compose(r, h) if side == "left" else ctx.amb.compose(h, r)
                        sub.append(space.coords(comp))
            keep = _chosen(ctx, space, sub)
        else:
            keep = range(space.dim)
        comps.extend((d, basis[i]) for i in keep)
    target = expr(d for d, _ in comps)
    if not comps:
        corner = _zero_corner(ctx, side, X)
        return Approximation(side, X, (), None, [], corner is not None, corner)
    objs = [ctx.obj(d) for d, _ in comps]
    if side == "left":
        morph = ctx.amb.block([Xo], objs, {(i, 0): f for i, (_, f) in enumerate(comps)})
        corner = ctx.cone_of(morph)
    else:
        morph = ctx.amb.block(objs, [Xo], {(0, i): f for i, (_, f) in enumerate(comps)})
        corner = ctx.cocone_of(morph)
    return Approximation(side, X, target, morph, comps, corner is not None, corner)


def _zero_corner(ctx, side, X):
    """Cone of X -> 0 (left) or cocone of 0 -> X (right), None if not defined."""
    if not X:
        return ()
    if ctx.amb.kind == "module":
        return None
    soft = ctx.kind == "ftheta"
    Xo = ctx.materialize(X)
    Z = shift(Xo, 1 if side == "left" else -1)
    return ctx.identify(Z, soft=soft)

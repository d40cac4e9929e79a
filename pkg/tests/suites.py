"""Shared context builders and the property suites run on every test context."""

from functools import lru_cache
from itertools import combinations

import numpy as np

from siltkit.algebra import build_algebra, canonical_module, linear_quiver
from siltkit.context import make_context, perp, subcat, wedge, wedge_inf
from siltkit.errors import NotGood, WindowExhausted
from siltkit.modules import (
    block_morphism,
    decompose,
    direct_sum,
    enumerate_indecomposables,
    ext_dim,
    hom_modules,
    is_isomorphic,
    morphism_tools,
    projdim,
)
from siltkit.silting import (
    bongartz_complete,
    cotorsion_F,
    cotorsion_G,
    gamma,
    geq,
    hereditary_cotorsion_pairs,
    is_presilting,
    is_silting,
    left_mutation,
    right_mutation,
    silting_quiver,
)


def linear(n, p=2, radical_square=False):
    rels = [f"a{i}*a{i + 1}" for i in range(1, n - 1)] if radical_square else []
    return build_algebra(linear_quiver(n), rels, p)


@lru_cache(maxsize=None)
def module_ctx(n, cap=8):
    return make_context("module", alg=linear(n), dim_cap=cap)


@lru_cache(maxsize=None)
def derived_ctx(n, lo, hi):
    return make_context("derived", alg=linear(n), window=(lo, hi))


@lru_cache(maxsize=None)
def pinfty_rad2():
    return make_context("pinfty", alg=linear(3, radical_square=True))


@lru_cache(maxsize=None)
def pinfty_linear(n):
    return make_context("pinfty", alg=linear(n))


def shifted(ctx, dims, s=0):
    """Universe handle of the shifted module with the given dimension vector."""
    amb = ctx.amb
    for h, a in enumerate(ctx.universe):
        if amb.kind == "module":
            M, sh = amb.objects[a], 0
        else:
            m, sh = amb.handles[a]
            M = amb.mod.objects[m]
        if tuple(M.dims) == tuple(dims) and sh == s:
            return h
    raise KeyError((dims, s))


GOLDEN_THETA = [((1, 1, 1, 0), 1), ((1, 0, 0, 0), 0), ((0, 1, 1, 0), 0), ((0, 0, 0, 1), 0)]


@lru_cache(maxsize=None)
def golden_parent():
    return derived_ctx(4, -1, 2)


@lru_cache(maxsize=None)
def golden_ctx():
    D = golden_parent()
    theta = [shifted(D, d, s) for d, s in GOLDEN_THETA]
    return make_context("ftheta", parent=D, theta=theta)


def golden_handles():
    """Handles of P(2), P(3), P(4), Θ(1..4), ΣΘ(3) and Σ^{-1}Θ(1) in the golden context."""
    F = golden_ctx()
    return {
        "P2": shifted(F, (1, 1, 1, 1)),
        "P3": shifted(F, (0, 1, 1, 1)),
        "P4": shifted(F, (0, 0, 0, 1)),
        "T1": shifted(F, (1, 1, 1, 0), 1),
        "T2": shifted(F, (1, 0, 0, 0)),
        "T3": shifted(F, (0, 1, 1, 0)),
        "T4": shifted(F, (0, 0, 0, 1)),
        "sT3": shifted(F, (0, 1, 1, 0), 1),
        "dT1": shifted(F, (1, 1, 1, 0)),
    }


def lambda_seed(ctx):
    """add Λ: the projectives, or the unshifted projective stalks."""
    if ctx.projectives is not None:
        return ctx.projectives
    alg = ctx.alg
    return subcat(shifted(ctx, canonical_module(alg, "proj", v).dims) for v in range(alg.n_vertices))


@lru_cache(maxsize=None)
def siltings(ctx):
    return tuple(silting_quiver(ctx, lambda_seed(ctx)).vertices)


@lru_cache(maxsize=None)
def presiltings(ctx):
    return tuple(S for r in range(1, ctx.n + 1) for S in combinations(ctx.all, r) if is_presilting(ctx, S))


# -- independent tilting oracle (modules only) ---


def _coresolves(Lam, T, depth):
    """Λ has a finite coresolution by add T, found by iterated left approximations."""
    X = Lam
    for _ in range(depth):
        if X.dim == 0:
            return True
        if all(any(is_isomorphic(Y, t) for t in T) for Y, _ in decompose(X)):
            return True
        targets, blocks = [], {}
        for t in T:
            for f in hom_modules(X, t):
                blocks[(len(targets), 0)] = f
                targets.append(t)
        if not targets:
            return False
        a = block_morphism([X], targets, blocks)
        tools = morphism_tools(a)
        if not tools["is_mono"]:
            return False
        X = tools["cokernel"]
    return False


def oracle_tilting(alg, cap):
    """Basic tilting modules by exhaustive search over indecomposables."""
    mods = enumerate_indecomposables(alg, cap).modules
    fin = [M for M in mods if projdim(M) is not None]
    gl = max(projdim(M) for M in fin)
    n = alg.n_vertices
    Lam, _, _ = direct_sum([canonical_module(alg, "proj", v) for v in range(n)])
    out = set()
    for T in combinations(fin, n):
        if any(ext_dim(k, a, b) for a in T for b in T for k in range(1, gl + 1)):
            continue
        if _coresolves(Lam, T, gl + 2):
            out.add(frozenset(M.dims for M in T))
    return out


# -- suites -----------------------------------------------------------------------------------


def mutation_suite(ctx):
    """Soundness and involution on every cut of every enumerated silting."""
    checked = blocked = 0
    for M in siltings(ctx):
        for r in range(len(M) + 1):
            for D in combinations(M, r):
                try:
                    step = left_mutation(ctx, M, D)
                except NotGood:
                    continue
                except WindowExhausted:
                    blocked += 1
                    continue
                R = step.result
                assert is_presilting(ctx, R)
                assert is_silting(ctx, R)[0]
                assert geq(ctx, M, R)
                assert (R == M) == (subcat(D) == M)
                try:
                    back = right_mutation(ctx, R, D)
                except WindowExhausted:
                    blocked += 1
                    continue
                assert back.result == M, (M, D, R, back.result)
                checked += 1
    return checked, blocked


def random_conflations(ctx, count, seed=0):
    """Realised conflations A -> B -> C with nonzero class, drawn at random."""
    from siltkit.context import objects_upto

    rng = np.random.default_rng(seed)
    objs = objects_upto(ctx.all, 2)
    pool = [(C, A) for C in objs for A in objs if ctx.ext_dim(1, C, A)]
    out = []
    for _ in range(count):
        C, A = pool[rng.integers(len(pool))]
        confs = ctx.conflations(C, A)
        vec, B = confs[rng.integers(1, len(confs))]
        out.append((A, B, C))
    return out


def gamma_suite(ctx, count=100, seed=0):
    S = siltings(ctx)
    rng = np.random.default_rng(seed)
    checked = blocked = 0
    for A, B, C in random_conflations(ctx, count, seed):
        M = S[rng.integers(len(S))]
        try:
            ga, gb, gc = (np.array(gamma(ctx, M, X).coords) for X in (A, B, C))
        except WindowExhausted:
            blocked += 1
            continue
        assert not (ga - gb + gc).any(), (M, A, B, C)
        checked += 1
    return checked, blocked


def cotorsion_suite(ctx):
    S = siltings(ctx)
    for M in S:
        cp = cotorsion_F(ctx, M)
        assert cp.report["ok"] and cp.bounded, (M, cp)
        assert cotorsion_G(ctx, (cp.X, cp.Y)) == M
    pairs = hereditary_cotorsion_pairs(ctx)
    for cp in pairs:
        G = cotorsion_G(ctx, (cp.X, cp.Y))
        back = cotorsion_F(ctx, G)
        assert (back.X, back.Y) == (cp.X, cp.Y), (cp, back)
    return len(S), len(pairs)


def wedge_perp_suite(ctx):
    count = 0
    for M in presiltings(ctx):
        W = set(wedge_inf(ctx, M))
        for n in (0, 1, 2):
            assert set(wedge(ctx, M, n)) == W & set(perp(ctx, "left", M, n)), (M, n)
        count += 1
    return count


def bongartz_suite(ctx):
    lam = lambda_seed(ctx)
    W1 = set(wedge(ctx, lam, 1))
    count = 0
    for N in presiltings(ctx):
        if not set(N) <= W1:
            continue
        rec = bongartz_complete(ctx, lam, N)
        assert set(N) <= set(rec.subcat)
        assert is_silting(ctx, rec.subcat)[0]
        count += 1
    return count


def module_checks(ctx, count=50, seed=0):
    """Euler form (hereditary algebras) and long exact sequence dimension checks."""
    from siltkit.modules import ext_dim, hom_space

    alg = ctx.alg
    mods = [ctx.obj(h) for h in ctx.all]
    if alg.is_hereditary:
        E = np.array(alg.euler_matrix())
        for M in mods:
            for N in mods:
                lhs = hom_space(M, N).dim - ext_dim(1, M, N)
                assert lhs == int(np.array(M.dims) @ E @ np.array(N.dims))
    rng = np.random.default_rng(seed)
    checked = 0
    for A, B, C in random_conflations(ctx, count, seed):
        X = mods[rng.integers(len(mods))]
        top = 1 + max(ctx.k_bound(h, y)[0] for h in ctx.all for y in ctx.all)
        alt = 0
        sign = 1
        for k in range(0, top + 1):
            for Y in (A, B, C):
                Yo = ctx.materialize(Y)
                dim = hom_space(X, Yo).dim if k == 0 else ext_dim(k, X, Yo)
                alt += sign * dim
                sign = -sign
        assert alt == 0, (A, B, C)
        checked += 1
    return checked

"""Standardizable sets, their filtered categories and projective generators.

A standardizable set is an ordered list Θ(1), ..., Θ(n) of indecomposables
of a derived context with Hom(Θ(i), Θ(j)) = 0 for i > j and
E(Θ(i), Θ(j)) = 0 for i >= j.  The objects filtered by Θ form an extension
closed subcategory F(Θ); it has a projective generator built from Θ(i) by
repeatedly gluing on universal extensions by Θ(j), j > i.
"""

from dataclasses import dataclass, field

import numpy as np

from .context import ExtContext, expr, objects_upto, subcat
from .errors import NonTermination, ValidationError


@dataclass
class ThetaSet:
    parent: ExtContext
    objects: tuple
    s1: bool
    s2: bool
    s3: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return self.s1 and self.s2 and self.s3


@dataclass
class StdResolutionRecord:
    """The tower of gluing steps that produces P(i) (or I(i)) from Θ(i)."""

    index: int
    result: tuple
    steps: list


def _single(e):
    if isinstance(e, (int, np.integer)):
        return int(e)
    e = tuple(e)
    return e[0] if len(e) == 1 else None


def check_standardizable(parent, theta):
    """Evaluate the three standardizability conditions with failure witnesses."""
    objs = [_single(t) for t in theta]
    failures = []
    s1 = all(h is not None and 0 <= h < parent.n for h in objs)
    if not s1:
        failures.append(("S1", [i for i, h in enumerate(objs) if h is None]))
        return ThetaSet(parent, tuple(objs), False, False, False, failures)
    s2 = s3 = True
    n = len(objs)
    for i in range(n):
        for j in range(n):
            if i > j and parent.hom_dim((objs[i],), (objs[j],)):
                s2 = False
                failures.append(("S2", (i + 1, j + 1)))
            if i >= j and parent.ext(1, objs[i], objs[j]):
                s3 = False
                failures.append(("S3", (i + 1, j + 1)))
    return ThetaSet(parent, tuple(objs), s1, s2, s3, failures)


def extension_closure(parent, seeds):
    """Smallest set of parent handles containing seeds and closed under extensions."""
    cur = set(seeds)
    while True:
        new = set(cur)
        objs = objects_upto(subcat(cur), parent.bound)
        for C in objs:
            for A in objs:
                for B in parent.middles(C, A):
                    new.update(B)
        if new == cur:
            return subcat(cur)
        cur = new


def f_theta(parent, ts):
    """The context F(Θ) inside a derived parent."""
    if not ts.ok:
        raise ValidationError(f"theta is not standardizable: {ts.failures}")
    members = extension_closure(parent, ts.objects)
    ctx = ExtContext("ftheta", parent.amb, [parent.universe[h] for h in members], parent=parent,
                     bound=parent.bound, class_limit=parent.class_limit,
                     morphism_limit=parent.morphism_limit, threads=parent.threads)
    ctx.theta = tuple(ctx.local[parent.universe[h]] for h in ts.objects)
    ctx.theta_set = ts
    return ctx


def glue_extension(ctx, X, y):
    """Conflation y^d -> F -> X whose class collects a basis of E(X, y)."""
    X = expr(X)
    segs = [ctx.ext1(x, y) for x in X]
    d = sum(segs)
    if d == 0:
        return None, 0
    A = (y,) * d
    eye = np.eye(d, dtype=np.int64)
    parts = []
    off = 0
    for s in segs:
        for t in range(d):
            parts.append(eye[t, off:off + s])
        off += s
    conf = ctx.realize(X, A, np.concatenate(parts))
    return conf, d


def glue_coextension(ctx, X, y):
    """Conflation X -> F -> y^d whose class collects a basis of E(y, X)."""
    X = expr(X)
    d = sum(ctx.ext1(y, x) for x in X)
    if d == 0:
        return None, 0
    C = (y,) * d
    conf = ctx.realize(C, X, np.eye(d, dtype=np.int64).ravel())
    return conf, d


def projective_generator(ctx):
    """Build P(1..n), install P_Θ as the projectives of ctx and verify it."""
    theta = ctx.theta
    n = len(theta)
    records = []
    for i in range(n - 1, -1, -1):
        X = (theta[i],)
        steps = []
        for j in range(i + 1, n):
            conf, d = glue_extension(ctx, X, theta[j])
            if d == 0:
                continue
            if ctx.ext_dim(1, conf.B, (theta[j],)):
                raise NonTermination(f"gluing Θ({j + 1}) onto P({i + 1}) did not kill the extensions")
            steps.append((j, d, X, conf.B))
            X = conf.B
        records.append(StdResolutionRecord(i, X, steps))
    records.reverse()
    P = subcat(h for r in records for h in r.result)
    ctx.projectives = P
    ctx.generator_records = records
    bad = [(q, x) for q in P for x in ctx.all if ctx.ext(1, q, x)]
    if bad:
        raise NonTermination(f"P_Θ is not projective in F(Θ): {bad}")
    return P, records


def injective_cogenerator(ctx):
    """Build I(1..n) by gluing coextensions with Θ(j), j < i, descending."""
    theta = ctx.theta
    n = len(theta)
    records = []
    for i in range(n):
        X = (theta[i],)
        steps = []
        for j in range(i - 1, -1, -1):
            conf, d = glue_coextension(ctx, X, theta[j])
            if d == 0:
                continue
            if ctx.ext_dim(1, (theta[j],), conf.B):
                raise NonTermination(f"gluing Θ({j + 1}) onto I({i + 1}) did not kill the extensions")
            steps.append((j, d, X, conf.B))
            X = conf.B
        records.append(StdResolutionRecord(i, X, steps))
    I = subcat(h for r in records for h in r.result)
    ctx.injectives = I
    ctx.cogenerator_records = records
    bad = [(x, q) for q in I for x in ctx.all if ctx.ext(1, x, q)]
    if bad:
        raise NonTermination(f"I_Θ is not injective in F(Θ): {bad}")
    return I, records


def generation_check(ctx):
    """Members X admitting a deflation from add P_Θ with cocone in the universe.

    For a projective generator this is the whole universe.
    """
    from .context import cone

    return cone(ctx, ctx.all, ctx.require_projectives())


def std_silting(ctx, siltings=None):
    """Greatest and least silting subcategories (P_Θ and I_Θ) with checks."""
    from .silting import geq, is_silting

    P = ctx.projectives if ctx.projectives is not None else projective_generator(ctx)[0]
    I = ctx.injectives if ctx.injectives is not None else injective_cogenerator(ctx)[0]
    okP, recP = is_silting(ctx, P)
    okI, recI = is_silting(ctx, I)
    if not (okP and okI):
        raise NonTermination("P_Θ or I_Θ failed the silting check")
    for S in siltings or ():
        if not (geq(ctx, P, S) and geq(ctx, S, I)):
            raise NonTermination(f"{S} is not between I_Θ and P_Θ")
    return recP, recI


def filtration(ctx, x):
    """A Θ-filtration witness of universe member x.

    Returns a list of ``(sub, theta index, quotient-free part)`` steps: each
    step is a conflation ``K -> current -> Θ(i)^m`` peeled off with the
    smallest i such that Hom(current, Θ(i)) is nonzero.
    """
    theta = ctx.theta
    cur = (x,)
    steps = []
    guard = 0
    while cur:
        guard += 1
        if guard > 64:
            raise NonTermination("filtration search did not terminate")
        for i, t in enumerate(theta):
            if not ctx.hom_dim(cur, (t,)):
                continue
            # prefer a single Θ(i) quotient and the smallest subobject
            found = None
            for m in (1, 2):
                for A in [()] + objects_upto(ctx.all, ctx.bound):
                    if any(B == cur for B in ctx.middles((t,) * m, A)):
                        found = (A, m)
                        break
                if found:
                    break
            if found:
                steps.append((cur, i, found[1]))
                cur = found[0]
                break
        else:
            raise NonTermination(f"no Θ quotient found for {ctx.label(cur)}")
    return steps

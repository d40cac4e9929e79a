import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siltkit.algebra import (
    Quiver,
    Representation,
    build_algebra,
    canonical_module,
    interval_module,
    linear_quiver,
)
from siltkit.errors import BadRelation, InfiniteDimensional, UnknownVertex, ValidationError


def brute_paths(quiver, relations):
    """Paths of an acyclic quiver avoiding the monomial relations, by word enumeration."""
    arrows = list(range(quiver.n_arrows))
    rels = {tuple(quiver.aindex[a] for a in r.split("*")) for r in relations}
    out = [(v, ()) for v in range(quiver.n_vertices)]
    for length in range(1, quiver.n_vertices):
        for word in itertools.product(arrows, repeat=length):
            if any(quiver.tgt[a] != quiver.src[b] for a, b in zip(word, word[1:])):
                continue
            if any(word[i:i + len(r)] == r for r in rels for i in range(len(word) - len(r) + 1)):
                continue
            out.append((quiver.src[word[0]], word))
    return out


def test_linear_a2_path_basis():
    alg = build_algebra(linear_quiver(2))
    assert alg.dim == 3
    assert [alg.path_label(i) for i in range(3)] == ["e1", "e2", "a1"]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_linear_dimension_is_triangular(n):
    assert build_algebra(linear_quiver(n)).dim == n * (n + 1) // 2


def test_radical_square_zero_a3():
    alg = build_algebra(linear_quiver(3), ["a1*a2"])
    assert alg.dim == 5
    assert canonical_module(alg, "proj", "1").dims == (1, 1, 0)
    assert canonical_module(alg, "inj", "3").dims == (0, 1, 1)


def test_canonical_modules_a2():
    alg = build_algebra(linear_quiver(2))
    assert canonical_module(alg, "proj", "1").dims == (1, 1)
    P2 = canonical_module(alg, "proj", "2")
    assert P2.dims == (0, 1)
    assert P2.key()[1:] == canonical_module(alg, "simple", "2").key()[1:]
    assert canonical_module(alg, "inj", "1").dims == (1, 0)


def test_unknown_vertex_is_named():
    with pytest.raises(UnknownVertex, match="'9'"):
        Quiver(["1", "2"], [("a", "1", "9")])


def test_bad_relations_rejected():
    q = linear_quiver(3)
    with pytest.raises(BadRelation):
        build_algebra(q, ["a1"])
    with pytest.raises(BadRelation):
        build_algebra(q, ["a2*a1"])
    with pytest.raises(BadRelation):
        build_algebra(q, ["a1*zz"])


def test_cycle_without_relations_is_infinite():
    q = Quiver(["1", "2"], [("a", "1", "2"), ("b", "2", "1")])
    with pytest.raises(InfiniteDimensional):
        build_algebra(q)
    alg = build_algebra(q, ["a*b", "b*a"])
    assert alg.dim == 4


def test_non_prime_field_rejected():
    with pytest.raises(ValidationError):
        build_algebra(linear_quiver(2), p=4)


def test_representation_relations_are_checked():
    alg = build_algebra(linear_quiver(3), ["a1*a2"])
    with pytest.raises(ValidationError):
        Representation(alg, (1, 1, 1), [np.ones((1, 1)), np.ones((1, 1))])
    assert interval_module(build_algebra(linear_quiver(3)), "1", "3").dims == (1, 1, 1)


@st.composite
def acyclic_bound_quivers(draw):
    n = draw(st.integers(2, 5))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=6))
    arrows = [(f"x{k}", str(i), str(j)) for k, (i, j) in enumerate(chosen)]
    q = Quiver([str(i) for i in range(n)], arrows)
    words = [(a, b) for a in range(q.n_arrows) for b in range(q.n_arrows) if q.tgt[a] == q.src[b]]
    rels = draw(st.lists(st.sampled_from(words), max_size=3, unique=True)) if words else []
    return q, [f"{q.arrows[a][0]}*{q.arrows[b][0]}" for a, b in rels]


@settings(max_examples=60, deadline=None)
@given(acyclic_bound_quivers(), st.sampled_from([2, 3]))
def test_path_basis_and_regular_module(qr, p):
    q, rels = qr
    alg = build_algebra(q, rels, p)
    want = brute_paths(q, rels)
    assert sorted((x.start, x.arrows) for x in alg.paths) == sorted(want)
    keys = [(x.length, tuple(q.arrows[a][0] for a in x.arrows)) for x in alg.paths]
    assert keys == sorted(keys)
    profile = np.zeros(q.n_vertices, dtype=int)
    for x in alg.paths:
        profile[x.end] += 1
    total = sum(np.array(canonical_module(alg, "proj", v).dims) for v in range(q.n_vertices))
    assert np.array_equal(total, profile)
    for v in range(q.n_vertices):
        P = canonical_module(alg, "proj", v)
        for r in alg.relations:
            assert not P.word_matrix(r).any()

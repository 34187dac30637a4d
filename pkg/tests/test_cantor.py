import pytest

from forge import cantor as ca
from forge import cgraph as cg
from forge import collapse as col
from forge import forest as fo
from forge.errors import PreconditionError

from conftest import random_pair_spec, random_starred_spec
from oracles import BIG, clopen_size_truncated, path_counts, star_condition_oracle

FULL = ca.PairSpec((0, 1), frozenset({(0, 0), (0, 1), (1, 0), (1, 1)}), 0)
FULL_K0 = ca.PairSpec((0, 1), frozenset({(0, 0), (0, 1), (1, 0), (1, 1)}), 0,
                      frozenset({0, 1}),
                      frozenset({(0, 0), (0, 1), (1, 0), (1, 1)}))
RAY = ca.PairSpec((0,), frozenset({(0, 0)}), 0)


def test_validate_pair_spec():
    assert ca.validate_pair_spec(FULL) == []
    dead = ca.PairSpec((0, 1), frozenset({(0, 0)}), 0)
    assert any("no outgoing" in m or "unreachable" in m
               for m in ca.validate_pair_spec(dead))
    bad_k0 = ca.PairSpec((0,), frozenset({(0, 0)}), 0, frozenset({0}), frozenset())
    assert any("k0" in m for m in ca.validate_pair_spec(bad_k0))


def test_clopen_algebra_basics():
    w = ca.whole_space(FULL)
    a = ca.ClopenSet(FULL, ((0, 0),))
    assert ca.intersect(a, a) == a
    assert ca.union(a, ca.subtract(w, a)) == w
    assert ca.subtract(a, w).is_empty()
    assert ca.intersect(a, ca.subtract(w, a)).is_empty()
    with pytest.raises(PreconditionError):
        ca.intersect(a, ca.whole_space(RAY))


def test_singleton_on_deterministic_cycle():
    two_cycle = ca.PairSpec((0, 1), frozenset({(0, 1), (1, 0)}), 0)
    assert ca.is_singleton(ca.whole_space(two_cycle))
    assert not ca.is_singleton(ca.whole_space(FULL))


def test_counts_against_truncated_oracle(rng):
    for _ in range(200):
        spec = random_pair_spec(rng, 6)
        w = ca.whole_space(spec)
        exact = ca.size(w)
        depth12 = clopen_size_truncated(w, 12)
        depth24 = clopen_size_truncated(w, 24)
        if exact == ca.INF:
            assert depth24 > depth12 or depth24 >= BIG
        else:
            assert depth12 == exact and depth24 == exact


def test_condition_star_examples():
    assert ca.condition_star(FULL)          # perfect space, no isolated points
    assert not ca.condition_star(RAY)       # the unique point is isolated
    ray_k0 = ca.PairSpec((0,), frozenset({(0, 0)}), 0, frozenset({0}),
                         frozenset({(0, 0)}))
    assert ca.condition_star(ray_k0)
    assert ca.condition_star(FULL_K0)


def test_condition_star_against_oracle(rng):
    for _ in range(400):
        spec = random_pair_spec(rng, 6)
        assert ca.condition_star(spec) == star_condition_oracle(spec, 12)


def test_split_infinite_and_three():
    a, b = ca.split_infinite(ca.whole_space(FULL))
    assert not ca.is_finite(a) and not ca.is_finite(b)
    assert ca.union(a, b) == ca.whole_space(FULL)
    p1, p2, p3 = ca.split_three(ca.whole_space(FULL))
    assert all(not ca.is_finite(x) for x in (p1, p2, p3))
    assert ca.union_all(FULL, [p1, p2, p3]) == ca.whole_space(FULL)


def test_split3_ladder():
    levels = ca.split3(ca.whole_space(FULL), 3)
    assert [len(l) for l in levels] == [1, 3, 9, 27]
    for l in levels:
        assert ca.union_all(FULL, l) == ca.whole_space(FULL)
        assert all(not ca.is_finite(x) for x in l)
    with pytest.raises(PreconditionError):
        ca.split3(ca.whole_space(RAY), 1)


def test_split3_matches_lexicographic_grouping():
    p1, p2, p3 = ca.split_three(ca.whole_space(FULL))
    assert p1.cyls == ((0, 0, 0),)
    assert p2.cyls == ((0, 0, 1),)
    assert p3.cyls == ((0, 1),)


def test_split_into_singletons():
    # two isolated points: start branches to two deterministic rays
    spec = ca.PairSpec((0, 1, 2), frozenset({(0, 1), (0, 2), (1, 1), (2, 2)}), 0,
                       frozenset({0, 1, 2}),
                       frozenset({(0, 1), (0, 2), (1, 1), (2, 2)}))
    parts = ca.split_into_singletons(ca.whole_space(spec))
    assert len(parts) == 2
    assert all(ca.is_singleton(p) for p in parts)


def test_partition_lemma_trivial_case():
    w = ca.whole_space(FULL)
    chain = ca.partition_lemma([w], [w], FULL)
    assert len(chain) == 1 and chain[0] == [w]


def test_partition_lemma_repeat_floor_structure():
    # one block meeting the subspace, refined by three pieces: the block is
    # held for a repeat floor before splitting
    w = ca.whole_space(FULL_K0)
    mu = [ca.ClopenSet(FULL_K0, ((0, 0, 0),)), ca.ClopenSet(FULL_K0, ((0, 0, 1),)),
          ca.ClopenSet(FULL_K0, ((0, 1),))]
    chain = ca.partition_lemma([w], mu, FULL_K0)
    assert chain[0] == [w] and chain[1] == [w]
    assert len(chain[2]) == 3
    assert ca.audit_partition_lemma(chain, [w], mu, FULL_K0) == []


def test_partition_lemma_random_audit(rng):
    for _ in range(40):
        spec = random_starred_spec(rng, 5)
        w = ca.whole_space(spec)
        if ca.meets_k0(w):
            xi = [w]
        else:
            a, b = ca.split_infinite(w)
            xi = sorted([a, b], key=lambda s: s.cyls)
        mu = ca.prefix_partition(spec, rng.randint(1, 2))
        chain = ca.partition_lemma(xi, mu, spec)
        assert ca.audit_partition_lemma(chain, xi, mu, spec) == []


def test_adapted_sequence_perfect_no_repeats():
    seq = ca.adapted_sequence(FULL, 2)
    assert ca.audit_adapted(seq, FULL) == []
    for lo, hi in zip(seq.floors[1:], seq.floors[2:]):
        assert not (set(lo) & set(hi))  # no repeats without a subspace


def test_adapted_sequence_full_subspace_has_repeats():
    seq = ca.adapted_sequence(FULL_K0, 2)
    assert ca.audit_adapted(seq, FULL_K0) == []
    repeats = sum(1 for lo, hi in zip(seq.floors, seq.floors[1:])
                  if set(lo) & set(hi))
    assert repeats > 0


def test_adapted_sequence_bound_and_checkpoints(rng):
    for _ in range(20):
        spec = random_starred_spec(rng, 5)
        seq = ca.adapted_sequence(spec, 2)
        assert ca.audit_adapted(seq, spec) == []
        for i, floor in enumerate(seq.floors[1:], start=1):
            assert len(floor) <= 4 * 3 ** (i - 1)
        for n, k in enumerate(seq.checkpoints, start=1):
            assert ca.refines(spec, ca.prefix_partition(spec, n),
                              list(seq.floors[k]))


def test_adapted_four_start():
    seq = ca.adapted_sequence(FULL, 1, four_start=True)
    assert len(seq.floors[1]) == 4
    assert ca.audit_adapted(seq, FULL) == []


def test_adapted_rejects_bad_pairs():
    with pytest.raises(PreconditionError):
        ca.adapted_sequence(RAY, 1)
    finite = ca.PairSpec((0, 1), frozenset({(0, 1), (1, 1)}), 0,
                         frozenset({0, 1}), frozenset({(0, 1), (1, 1)}))
    with pytest.raises(PreconditionError):
        ca.adapted_sequence(finite, 1)


def test_build_gxi_repeat_ray_is_h2_chain():
    w = ca.whole_space(FULL_K0)
    a, b = ca.split_infinite(w)
    floors = (tuple([w]), (a, b), (a, b), (a, b), (a, b))
    seq = ca.PartitionSeq(FULL_K0, floors)
    g, info = ca.build_gxi(seq, 4)
    assert cg.validate(g) == []
    interior_kinds = sorted(k for k in g.kinds.values()
                            if k not in cg.BOUNDARY_KINDS)
    assert set(interior_kinds) == {cg.H2}


def test_build_gxi_ternary_floor_is_s_vertex():
    seq = ca.adapted_sequence(FULL, 2)
    g, info = ca.build_gxi(seq, 3)
    assert cg.validate(g) == []
    # the root splits in two, later splits are ternary s vertices
    assert any(k == cg.S4 for k in g.kinds.values())


def test_build_gxi_family_check_and_branches(rng):
    for _ in range(15):
        spec = random_starred_spec(rng, 5)
        seq = ca.adapted_sequence(spec, 2)
        d = min(5, len(seq.floors) - 1)
        g, info = ca.build_gxi(seq, d)
        assert cg.validate(g) == []
        for k in range(1, d):
            assert fo.family_c_check(cg.ball(g, g.pointing, 2 * k + 1), k)
        stubs = sum(1 for v, kk in g.kinds.items() if kk == cg.B1)
        assert stubs == len(seq.floors[d])


def test_ends_match_audit(rng):
    assert ca.ends_match_audit(ca.adapted_sequence(FULL, 2), FULL, 3) == []
    seq = ca.adapted_sequence(FULL_K0, 2)
    assert ca.ends_match_audit(seq, FULL_K0, len(seq.floors) - 1) == []
    for _ in range(15):
        spec = random_starred_spec(rng, 5)
        seq = ca.adapted_sequence(spec, 2)
        d = min(6, len(seq.floors) - 1)
        assert ca.ends_match_audit(seq, spec, d) == []


def test_ends_match_no_h2_below_one_for_perfect_empty():
    seq = ca.adapted_sequence(FULL, 2)
    g, info = ca.build_gxi(seq, min(5, len(seq.floors) - 1))
    for v, (i, blk) in info.items():
        if i >= 1 and g.kinds[v] == cg.H2:
            raise AssertionError("unexpected repeat vertex for an empty subspace")


def test_finite_ends_graph_counts(rng):
    for k in range(1, 9):
        g = ca.finite_ends_graph(k, k + 6)
        assert cg.validate(g) == []
        t = col.ends_tree(g, [g.pointing], k + 4)
        assert t.branch_count() == k
    with pytest.raises(PreconditionError):
        ca.finite_ends_graph(0, 3)


def test_finite_ends_substitution_adds_two():
    for k in (1, 2, 3, 4, 5, 6):
        a = col.ends_tree(ca.finite_ends_graph(k, k + 8),
                          [0], k + 6).branch_count()
        b = col.ends_tree(ca.finite_ends_graph(k + 2, k + 8),
                          [0], k + 6).branch_count()
        assert b - a == 2


def test_finite_ends_graphs_all_homology_accumulated():
    for k in (1, 2, 5, 6):
        g = ca.finite_ends_graph(k, k + 5)
        t = col.ends_tree(g, [g.pointing], k + 3)
        assert all(n.hom for n in t.levels[-1])


def test_pair_spec_json_round_trip():
    again = ca.PairSpec.from_json(FULL_K0.to_json())
    assert again == FULL_K0

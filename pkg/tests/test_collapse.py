import pytest

from forge import cantor as ca
from forge import cgraph as cg
from forge import collapse as col
from forge import covering as cov
from forge.errors import PreconditionError

from conftest import blow_up_collapse, random_connected_fig8_cover


def two_exit_member(g):
    """A connected interior set with positive Betti number and 2 exits."""
    import itertools
    svs = [v for v, k in sorted(g.kinds.items()) if k == cg.S4]
    for n in (2, 3):
        for combo in itertools.combinations(svs, n):
            grow = set(combo)
            for v, k in g.kinds.items():
                if k == cg.B2 and all(g.other_end(e, v) in combo
                                      for e in g.incidence[v]):
                    grow.add(v)
            sub = cg.induced_subgraph(g, grow)
            exits = col._exit_edges(g, frozenset(grow))
            if cg.is_connected(sub) and cg.betti(sub) > 0 and len(exits) == 2:
                return frozenset(grow)
    return None


def test_identity_collapse_valid():
    g = cg.figure_eight()
    assert col.validate_collapse(col.identity_collapse(g)) == []


def test_quotient_two_exit_cycle(rng):
    cyc = cov.cyclic_surgery(cg.figure_eight(), 1, 3)
    g = cyc.covering.total
    member = two_exit_member(g)
    assert member is not None
    c = col.quotient_by_family(g, [member])
    assert cg.validate(c.target) == []
    assert col.validate_collapse(c) == []
    h = c.vmap[next(iter(member))]
    assert c.target.kinds[h] == cg.H2


def test_quotient_rejects_bad_families():
    g = cg.figure_eight()
    with pytest.raises(PreconditionError):
        col.quotient_by_family(g, [frozenset({0})])  # trivial homology
    cyc = cov.cyclic_surgery(g, 1, 3).covering.total
    member = two_exit_member(cyc)
    smaller = member - {max(v for v in member if cyc.kinds[v] == cg.B2)}
    # dropping an interior b2 gives 3 or more exits
    with pytest.raises(PreconditionError):
        col.quotient_by_family(cyc, [smaller])


def test_quotient_empty_family_identity():
    g = cg.figure_eight()
    c = col.quotient_by_family(g, [])
    assert c.target.kinds == g.kinds
    assert col.validate_collapse(c) == []


def test_kind_change_detected():
    g = cg.s_piece()
    bad = col.Collapse(g, cg.CGraph({0: cg.S4, 1: cg.B2, 2: cg.B1, 3: cg.B1,
                                     4: cg.B1},
                                    dict(g.edges)), (),
                       {v: v for v in g.kinds}, {e: e for e in g.edges})
    assert any("kind" in m for m in col.validate_collapse(bad))


def test_blow_up_round_trip(rng):
    for k in (1, 2, 3, 4):
        target = ca.finite_ends_graph(k, 3)
        c = blow_up_collapse(target, rng)
        assert col.validate_collapse(c) == []
        members = sorted(c.family, key=sorted)
        rebuilt = col.quotient_by_family(c.source, members)
        assert cg.is_isomorphic(rebuilt.target, c.target, with_pointing=False)


def test_preimage_component_connected(rng):
    for k in (2, 3):
        c = blow_up_collapse(ca.finite_ends_graph(k, 4), rng)
        # assertion inside must hold for connected target sets
        whole = col.preimage_component(c, set(c.target.kinds))
        assert whole == frozenset(c.source.kinds)
        h = next(v for v, kk in c.target.kinds.items() if kk in (cg.H2, cg.H4))
        pre = col.preimage_component(c, {h})
        assert pre in c.family or pre == next(m for m in c.family
                                              if pre == m)
        ball = cg.ball(c.target, c.target.pointing or
                       next(v for v, kk in c.target.kinds.items()
                            if kk not in cg.BOUNDARY_KINDS), 3)
        pre2 = col.preimage_component(c, set(ball.kinds))
        assert cg.is_connected(cg.induced_subgraph(c.source, pre2))


def test_betti_inequality(rng):
    for k in (1, 2, 5):
        c = blow_up_collapse(ca.finite_ends_graph(k, 3), rng)
        assert cg.betti(c.source) >= cg.betti(c.target) + len(c.family)


def test_ends_tree_path_graph():
    # a bare path has two branches and no homology flags
    g = cg.CGraph({0: cg.B2, 1: cg.B2, 2: cg.S4, 3: cg.B2, 4: cg.B2},
                  {0: (0, 1), 1: (1, 2), 2: (2, 3), 3: (3, 4)})
    t = col.ends_tree(g, [2], 2)
    assert t.branch_count() == 2
    assert all(not n.hom for level in t.levels for n in level)


def test_ends_tree_ray_and_trident():
    ray = ca.finite_ends_graph(2, 5)
    t = col.ends_tree(ray, [ray.pointing], 4)
    assert t.branch_count() == 2
    assert all(n.hom for n in t.levels[-1])
    trident = ca.finite_ends_graph(3, 6)
    t3 = col.ends_tree(trident, [trident.pointing], 6)
    assert t3.branch_count() == 3


def test_ends_trees_equivalent_basics():
    g = ca.finite_ends_graph(4, 5)
    t = col.ends_tree(g, [g.pointing], 4)
    assert col.ends_trees_equivalent(t, t)
    flipped = col.FiniteEndsTree(tuple(
        tuple(col.EndsNode(n.vertices, not n.hom, n.parent) for n in level)
        for level in t.levels))
    assert not col.ends_trees_equivalent(t, flipped)
    shallower = col.ends_tree(g, [g.pointing], 3)
    assert not col.ends_trees_equivalent(t, shallower)


def test_matched_ends_trees_sweep(rng):
    for _ in range(60):
        k = rng.randint(1, 6)
        c = blow_up_collapse(ca.finite_ends_graph(k, rng.randint(3, 5)), rng)
        roots = [next(v for v, kk in sorted(c.target.kinds.items())
                      if kk not in cg.BOUNDARY_KINDS)]
        t_target, t_source = col.matched_ends_trees(c, roots, 6)
        assert col.ends_trees_equivalent(t_target, t_source)


def test_collapse_then_inclusion_is_collapse_onto_image(rng):
    c = blow_up_collapse(ca.finite_ends_graph(2, 3), rng)
    bigger, incl = cg.attach_piece(c.target,
                                   cg.ElementaryStep(cg.S4, (min(
                                       v for v, k in c.target.kinds.items()
                                       if k == cg.B1),)))
    vmap = {v: incl.vmap[w] for v, w in c.vmap.items()}
    emap = {e: incl.emap[f] for e, f in c.emap.items()}
    image = cg.induced_subgraph(bigger, set(vmap.values()))
    onto_image = col.Collapse(c.source, image, c.family, vmap, emap)
    assert col.validate_collapse(onto_image) == []


def test_collapse_json_round_trip(rng):
    c = blow_up_collapse(ca.finite_ends_graph(2, 3), rng)
    again = col.Collapse.from_json(c.to_json())
    assert col.validate_collapse(again) == []
    assert again.vmap == c.vmap

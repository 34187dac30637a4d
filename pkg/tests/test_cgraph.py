import random

import pytest

from forge import cgraph as cg
from forge import cantor as ca
from forge.errors import NotDecomposableError, PreconditionError

from conftest import random_connected_fig8_cover, random_fig8_cover
from oracles import bfs_ball_vertices, spanning_forest_betti


def test_figure_eight_shape():
    g = cg.figure_eight()
    assert cg.validate(g) == []
    assert cg.betti(g) == 2
    kinds = sorted(g.kinds.values())
    assert kinds == [cg.B2, cg.B2, cg.S4]
    assert len(g.edges) == 4


def test_validate_reports_bad_edge_and_valency():
    g = cg.CGraph({0: cg.B2, 1: cg.B2}, {0: (0, 1), 1: (0, 1)})
    msgs = cg.validate(g)
    assert any("both boundary" in m for m in msgs)
    g2 = cg.CGraph({0: cg.S4, 1: cg.B1, 2: cg.B1, 3: cg.B1},
                   {0: (0, 1), 1: (0, 2), 2: (0, 3)})
    assert any("valency mismatch" in m for m in cg.validate(g2))


def test_validate_self_loop_and_pointing():
    g = cg.CGraph({0: cg.S4}, {0: (0, 0)})
    assert any("self-loop" in m for m in cg.validate(g))
    p = cg.CGraph({0: cg.S4, 1: cg.B1, 2: cg.B1, 3: cg.B1, 4: cg.B1},
                  {0: (0, 1), 1: (0, 2), 2: (0, 3), 3: (0, 4)}, pointing=1)
    assert any("boundary kind" in m for m in cg.validate(p))


def test_valency_sum_is_twice_edges(rng):
    for _ in range(50):
        g = random_fig8_cover(rng, rng.randint(1, 5)).total
        assert sum(g.valency(v) for v in g.kinds) == 2 * len(g.edges)


def test_betti_against_spanning_forest_oracle(rng):
    for _ in range(1000):
        g = random_fig8_cover(rng, rng.randint(1, 6)).total
        assert cg.betti(g) == spanning_forest_betti(g)


def test_betti_seven_fold_cover():
    from forge import covering as cov
    cyc = cov.cyclic_surgery(cg.figure_eight(), 1, 7)
    g = cyc.covering.total
    assert len(g.edges) == 28 and len(g.kinds) == 21
    assert cg.betti(g) == 8


def test_betti_of_pieces():
    for piece in (cg.h2_piece(), cg.s_piece(), cg.h4_piece()):
        assert cg.betti(piece) == 0


def test_ball_radius_one_in_cover_is_s_piece(rng):
    p = random_connected_fig8_cover(rng, 5, parallel_free=True)
    g = p.total
    s = next(v for v, k in g.kinds.items() if k == cg.S4)
    b = cg.ball(g, s, 1)
    assert cg.is_isomorphic(b, cg.s_piece(), with_pointing=False)


def test_ball_radius_zero():
    g = cg.figure_eight()
    b = cg.ball(g, 0, 0)
    assert set(b.kinds) == {0} and not b.edges


def test_ball_against_bfs_oracle():
    g = ca.finite_ends_graph(2, 5)
    want = bfs_ball_vertices(g, g.pointing, 3)
    got = cg.ball(g, g.pointing, 3)
    assert set(got.kinds) == want
    # central segment flanked by the two neighbouring h2 pieces
    assert sorted(got.kinds.values()).count(cg.H2) == 3
    assert cg.validate(got) == []


def test_two_pointings_of_two_ended_graph_agree():
    g = ca.finite_ends_graph(2, 6)
    other = next(v for v, k in sorted(g.kinds.items())
                 if k == cg.H2 and v != g.pointing
                 and len(bfs_ball_vertices(g, v, 9)) < len(g.kinds))
    # pick an interior h2 two steps away instead: translation symmetry
    dist = cg.distances(g, [g.pointing])
    other = next(v for v, k in sorted(g.kinds.items())
                 if k == cg.H2 and dist[v] == 2)
    b1 = cg.ball(g, g.pointing, 3)
    b2 = cg.ball(cg.CGraph(g.kinds, g.edges, other), other, 3)
    assert cg.canonical_form(b1) == cg.canonical_form(b2)


def test_is_c_subgraph():
    g = ca.finite_ends_graph(2, 4)
    s = g.pointing
    assert not cg.is_c_subgraph(g, {s})
    star = {s} | set(g.neighbors(s))
    assert cg.is_c_subgraph(g, star)
    with pytest.raises(PreconditionError):
        cg.is_c_subgraph(g, {max(g.kinds) + 1})


def test_c_subgraph_boundary_characterization(rng):
    p = random_connected_fig8_cover(rng, 4, parallel_free=True)
    g = p.total
    s = next(v for v, k in g.kinds.items() if k == cg.S4)
    vs = {s} | set(g.neighbors(s))
    sub = cg.induced_subgraph(g, vs)
    for v, k in sub.kinds.items():
        if k == cg.B1:
            outside = [e for e in g.incidence[v] if e not in sub.edges]
            assert g.kinds[v] == cg.B1 or (g.kinds[v] == cg.B2 and len(outside) == 1)


def test_attach_h2_to_s_piece():
    g, incl = cg.attach_piece(cg.s_piece(), cg.ElementaryStep(cg.H2, (1,)))
    # the s piece keeps its five vertices; the new piece adds its center and
    # one fresh boundary vertex
    assert len(g.kinds) == 7 and len(g.edges) == 6
    assert cg.validate(g) == []
    assert cg.validate_inclusion(incl) == []
    assert g.kinds[1] == cg.B2
    assert cg.is_elementary(incl) is not None


def test_attach_sequence_and_errors():
    g = cg.s_piece()
    for step in (cg.ElementaryStep(cg.H4, (1, 2)), cg.ElementaryStep(cg.S4, (3,)),
                 cg.ElementaryStep(cg.H2, (4,))):
        g, incl = cg.attach_piece(g, step)
        assert cg.validate(g) == []
    with pytest.raises(PreconditionError):
        cg.attach_piece(cg.s_piece(), cg.ElementaryStep(cg.H4, (1, 1)))
    with pytest.raises(PreconditionError):
        cg.attach_piece(g, cg.ElementaryStep(cg.H2, (1,)))  # valency exhausted


def test_peel_identity_is_empty():
    g = cg.s_piece()
    assert cg.peel_decomposition(cg.identity_inclusion(g)) == []


def test_peel_round_trip(rng):
    for _ in range(25):
        root = rng.choice([cg.h2_piece, cg.s_piece, cg.h4_piece])()
        g = root
        incl = cg.identity_inclusion(root)
        for _ in range(rng.randint(1, 4)):
            b1s = [v for v, k in g.kinds.items() if k == cg.B1]
            kind = rng.choice([cg.H2, cg.S4, cg.H4])
            if kind == cg.H4 and len(b1s) < 2:
                kind = cg.H2
            attach = tuple(sorted(rng.sample(b1s, 2 if kind == cg.H4 else 1)))
            g, j = cg.attach_piece(g, cg.ElementaryStep(kind, attach))
            incl = cg.compose_inclusions(j, incl)
        steps = cg.peel_decomposition(incl)
        rebuilt, _ = cg.replay_steps(root, steps)
        assert cg.is_isomorphic(rebuilt, g, with_pointing=False)


def test_peel_not_decomposable():
    # complement contains a component never adjacent to the image
    piece = cg.s_piece()
    far = ca.finite_ends_graph(1, 1)  # has homology, disjoint component
    kinds = dict(piece.kinds)
    edges = dict(piece.edges)
    off_v = 100
    off_e = 100
    for v, k in far.kinds.items():
        kinds[off_v + v] = k
    for e, (a, b) in far.edges.items():
        edges[off_e + e] = (off_v + a, off_v + b)
    target = cg.CGraph(kinds, edges)
    incl = cg.CInclusion(piece, target, {v: v for v in piece.kinds},
                         {e: e for e in piece.edges})
    with pytest.raises(NotDecomposableError):
        cg.peel_decomposition(incl)


def test_canonical_relabel_invariance(rng):
    for _ in range(60):
        base = random_fig8_cover(rng, rng.randint(1, 4)).total
        vs = list(base.kinds)
        es = list(base.edges)
        pv = dict(zip(vs, rng.sample(range(1000, 2000), len(vs))))
        pe = dict(zip(es, rng.sample(range(1000, 2000), len(es))))
        relabeled = cg.CGraph({pv[v]: k for v, k in base.kinds.items()},
                              {pe[e]: (pv[a], pv[b]) for e, (a, b) in base.edges.items()})
        assert cg.canonical_form(base) == cg.canonical_form(relabeled)


def test_canonical_distinguishes_kinds():
    assert cg.canonical_form(cg.s_piece()) != cg.canonical_form(cg.h4_piece())
    a = ca.finite_ends_graph(2, 3)
    b = ca.finite_ends_graph(4, 3)
    assert cg.canonical_form(a) != cg.canonical_form(b)


def test_canonical_pointing_sensitivity():
    g = ca.finite_ends_graph(4, 4)
    dist = cg.distances(g, [g.pointing])
    s = next(v for v, k in g.kinds.items() if k == cg.S4)
    repointed = cg.CGraph(g.kinds, g.edges, s)
    assert cg.canonical_form(g) != cg.canonical_form(repointed)
    assert cg.canonical_form(g, with_pointing=False) == \
        cg.canonical_form(repointed, with_pointing=False)


def test_iso_map_is_an_isomorphism(rng):
    for _ in range(20):
        base = random_fig8_cover(rng, rng.randint(1, 4)).total
        vs = list(base.kinds)
        es = list(base.edges)
        pv = dict(zip(vs, rng.sample(range(500, 999), len(vs))))
        pe = dict(zip(es, rng.sample(range(500, 999), len(es))))
        other = cg.CGraph({pv[v]: k for v, k in base.kinds.items()},
                          {pe[e]: (pv[a], pv[b]) for e, (a, b) in base.edges.items()})
        vmap, emap = cg.iso_map(base, other)
        assert sorted(vmap) == sorted(base.kinds)
        assert len(set(vmap.values())) == len(vmap)
        for e, (a, b) in base.edges.items():
            fa, fb = other.edges[emap[e]]
            assert {vmap[a], vmap[b]} == {fa, fb}
        for v, w in vmap.items():
            assert base.kinds[v] == other.kinds[w]


def test_hom_nontrivial():
    g = ca.finite_ends_graph(1, 3)
    h = next(v for v, k in g.kinds.items() if k == cg.H2)
    assert cg.hom_nontrivial(g, {h} | set(g.neighbors(h)))
    sp = cg.s_piece()
    assert not cg.hom_nontrivial(sp, set(sp.kinds))
    f8 = cg.figure_eight()
    assert cg.hom_nontrivial(f8, {0, 1})  # double edge is a cycle


def test_json_round_trip(rng):
    g = random_fig8_cover(rng, 3).total
    again = cg.CGraph.from_json(g.to_json())
    assert again.kinds == g.kinds and again.edges == g.edges

import random

import pytest

from forge import cantor as ca
from forge import cgraph as cg
from forge import collapse as col
from forge import covering as cov
from forge import forest as fo


@pytest.fixture
def rng():
    return random.Random(20260810)


def random_fig8_cover(rng, degree, parallel_free=False):
    """Random degree-d cover of the figure eight from four permutations."""
    while True:
        perms = [rng.sample(range(degree), degree) for _ in range(4)]
        if parallel_free and any(perms[0][i] == perms[1][i] or
                                 perms[2][i] == perms[3][i]
                                 for i in range(degree)):
            continue
        kinds = {}
        edges = {}
        for i in range(degree):
            kinds[i] = cg.S4
            kinds[100 + i] = cg.B2
            kinds[200 + i] = cg.B2
        for i in range(degree):
            edges[1000 + i] = (i, 100 + perms[0][i])
            edges[2000 + i] = (i, 100 + perms[1][i])
            edges[3000 + i] = (i, 200 + perms[2][i])
            edges[4000 + i] = (i, 200 + perms[3][i])
        g = cg.CGraph(kinds, edges)
        f8 = cg.figure_eight()
        vmap = {v: (0 if v < 100 else 1 if v < 200 else 2) for v in kinds}
        emap = {e: e // 1000 - 1 for e in edges}
        return cov.CoveringMap(f8, g, vmap, emap)


def random_connected_fig8_cover(rng, degree, parallel_free=False):
    for _ in range(200):
        p = random_fig8_cover(rng, degree, parallel_free)
        if cg.is_connected(p.total):
            return p
    raise AssertionError("could not sample a connected cover")


def random_cover_of(base, m, rng):
    """Random degree-m cover of an arbitrary valid graph via per-edge
    permutations of the sheets."""
    perms = {e: rng.sample(range(m), m) for e in base.edges}
    vstride = max(base.kinds) + 1
    estride = max(base.edges) + 1
    kinds = {}
    edges = {}
    vmap = {}
    emap = {}
    for i in range(m):
        for v in base.kinds:
            kinds[i * vstride + v] = base.kinds[v]
            vmap[i * vstride + v] = v
    for e, (a, b) in base.edges.items():
        for i in range(m):
            edges[i * estride + e] = (i * vstride + a, perms[e][i] * vstride + b)
            emap[i * estride + e] = e
    return cov.CoveringMap(base, cg.CGraph(kinds, edges), vmap, emap)


def random_pair_spec(rng, max_states, force_k0=None):
    """Random valid pair spec: reachable, out-degree >= 1, sub-automaton
    trimmed to closure."""
    while True:
        n = rng.randint(1, max_states)
        states = tuple(range(n))
        edges = set()
        for s in states:
            outs = rng.sample(states, rng.randint(1, n))
            edges.update((s, t) for t in outs)
        reach = set()
        stack = [0]
        while stack:
            s = stack.pop()
            if s in reach:
                continue
            reach.add(s)
            stack.extend(t for a, t in edges if a == s)
        states = tuple(sorted(reach))
        edges = frozenset((a, b) for a, b in edges if a in reach and b in reach)
        if force_k0 == "empty":
            k0s, k0e = frozenset(), frozenset()
        elif force_k0 == "full":
            k0s, k0e = frozenset(states), edges
        else:
            k0e_raw = {e for e in edges if rng.random() < 0.5}
            k0s_raw = {a for a, b in k0e_raw} | {b for a, b in k0e_raw}
            k0s, k0e = ca.trim_k0(states, edges, k0s_raw, k0e_raw)
        spec = ca.PairSpec(states, edges, 0, k0s, k0e)
        if not ca.validate_pair_spec(spec):
            return spec


def random_starred_spec(rng, max_states, require_infinite=True):
    """Random spec passing the star condition (with infinite big space
    unless told otherwise)."""
    while True:
        spec = random_pair_spec(rng, max_states)
        if not ca.condition_star(spec):
            continue
        if require_infinite and ca.is_finite(ca.whole_space(spec)):
            continue
        return spec


H2_MEMBER = "h2"
H4_MEMBER = "h4"


def blow_up_collapse(target, rng):
    """Inverse construction of a collapse: replace every homology vertex of
    the target by an explicit subgraph with the right number of exits.
    Returns the resulting Collapse with the target rebuilt on the source."""
    nxt_v = max(target.kinds) + 1
    nxt_e = max(target.edges) + 1
    kinds = {}
    edges = {}
    vmap = {}
    emap = {}
    family = []
    for v, k in target.kinds.items():
        if k in (cg.H2, cg.H4):
            continue
        kinds[v] = k
        vmap[v] = v
    for e, (a, b) in target.edges.items():
        ka, kb = target.kinds[a], target.kinds[b]
        if ka not in (cg.H2, cg.H4) and kb not in (cg.H2, cg.H4):
            edges[e] = (a, b)
            emap[e] = e
    for h in sorted(v for v, k in target.kinds.items() if k in (cg.H2, cg.H4)):
        s1, s2 = nxt_v, nxt_v + 1
        bs = [nxt_v + 2, nxt_v + 3] if target.kinds[h] == cg.H4 else \
             [nxt_v + 2, nxt_v + 3, nxt_v + 4]
        nxt_v += 2 + len(bs)
        member = {s1, s2, *bs}
        kinds[s1] = kinds[s2] = cg.S4
        for b in bs:
            kinds[b] = cg.B2
        for b in bs[:2]:
            for s in (s1, s2):
                edges[nxt_e] = (s, b)
                nxt_e += 1
        for b in bs[2:]:
            for s in (s1, s2):
                edges[nxt_e] = (s, b)
                nxt_e += 1
        for v in member:
            vmap[v] = h
        family.append(frozenset(member))
        incident = sorted(e for e in target.incidence[h])
        exit_slots = [s1, s2] if target.kinds[h] == cg.H2 else [s1, s1, s2, s2]
        rng.shuffle(exit_slots)
        for e, slot in zip(incident, exit_slots):
            other = target.other_end(e, h)
            edges[e] = (slot, other)
            emap[e] = e
    source = cg.CGraph(kinds, edges)
    return col.Collapse(source, cg.CGraph(target.kinds, target.edges), tuple(family),
                        vmap, emap)


def random_piece(rng):
    return rng.choice([cg.h2_piece, cg.s_piece, cg.h4_piece])()


def random_witnessed_chain(rng, length, max_factor=1500):
    """Random chain forest of basic-piece attachments with a bound on the
    realization degree factor."""
    graphs = [random_piece(rng)]
    inclusions = []
    witnesses = []
    factor = 1
    for _ in range(length):
        g = graphs[-1]
        steps = []
        comp = cg.identity_inclusion(g)
        n_steps = rng.randint(1, 2)
        for _ in range(n_steps):
            b1s = [v for v, k in g.kinds.items() if k == cg.B1]
            kind = rng.choice([cg.H2, cg.S4, cg.H4])
            cost = 3 if kind == cg.H4 else 2
            if factor * cost > max_factor:
                kind = cg.H2
                cost = 2
                if factor * cost > max_factor:
                    break
            if kind == cg.H4 and len(b1s) < 2:
                kind = cg.S4
                cost = 2
            attach = tuple(sorted(rng.sample(b1s, 2 if kind == cg.H4 else 1)))
            center = max(g.kinds) + 1
            step = cg.ElementaryStep(kind, attach, center)
            g, j = cg.attach_piece(g, step)
            comp = cg.compose_inclusions(j, comp)
            steps.append(step)
            factor *= cost
        if not steps:
            break
        graphs.append(g)
        inclusions.append(comp)
        witnesses.append(tuple(steps))
    floors = tuple((k,) for k in range(len(graphs)))
    fedges = {k: (k, k + 1) for k in range(len(graphs) - 1)}
    return fo.CGraphForest(fo.GradedForest(floors, fedges),
                           dict(enumerate(graphs)),
                           dict(enumerate(inclusions)),
                           dict(enumerate(witnesses)))

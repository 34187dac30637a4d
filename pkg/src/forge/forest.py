"""Graded forests of graphs, their compositions and decompositions, bounded
limits, shell-growth checks and the bounded universal forest.

A graded forest layers its vertices into floors; edges climb exactly one
floor and every vertex above the bottom has a unique parent.  Decorating
vertices with graphs and edges with inclusions gives the objects that the
tower builder realizes as families of disjoint liftable subgraphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import cgraph as cg
from .cgraph import CGraph, CInclusion, ElementaryStep
from .errors import NotDecomposableError, PreconditionError, ResourceCapError


@dataclass(frozen=True)
class GradedForest:
    floors: tuple[tuple[int, ...], ...]
    edges: dict[int, tuple[int, int]]  # edge id -> (origin, terminal)

    def floor_of(self) -> dict[int, int]:
        return {v: n for n, floor in enumerate(self.floors) for v in floor}

    def edges_from_floor(self, n: int) -> list[int]:
        fl = self.floor_of()
        return sorted(e for e, (o, t) in self.edges.items() if fl[o] == n)

    def parent_edge(self, v: int) -> int | None:
        for e, (o, t) in sorted(self.edges.items()):
            if t == v:
                return e
        return None

    def roots(self) -> tuple[int, ...]:
        return self.floors[0]


def validate_graded_forest(f: GradedForest) -> list[str]:
    out = []
    fl = {}
    for n, floor in enumerate(f.floors):
        for v in floor:
            if v in fl:
                out.append(f"vertex {v} on two floors")
            fl[v] = n
    incoming: dict[int, int] = {v: 0 for v in fl}
    outgoing: dict[int, int] = {v: 0 for v in fl}
    for e, (o, t) in f.edges.items():
        if o not in fl or t not in fl:
            out.append(f"edge {e}: endpoint missing")
            continue
        if fl[t] != fl[o] + 1:
            out.append(f"edge {e}: does not climb exactly one floor")
        incoming[t] += 1
        outgoing[o] += 1
    for v, n in fl.items():
        if n > 0 and incoming[v] != 1:
            out.append(f"vertex {v}: {incoming[v]} incoming edges")
        if n + 1 < len(f.floors) and outgoing[v] == 0:
            out.append(f"vertex {v}: no outgoing edge below the top floor")
    return out


@dataclass(frozen=True)
class CGraphForest:
    forest: GradedForest
    graphs: dict[int, CGraph]
    inclusions: dict[int, CInclusion]
    witnesses: dict[int, tuple[ElementaryStep, ...]] = field(default_factory=dict)

    def depth(self) -> int:
        return len(self.forest.floors) - 1


def validate_cgraph_forest(h: CGraphForest) -> list[str]:
    out = validate_graded_forest(h.forest)
    fl = h.forest.floor_of()
    for v in fl:
        if v not in h.graphs:
            out.append(f"vertex {v}: no graph attached")
    for e, (o, t) in h.forest.edges.items():
        inc = h.inclusions.get(e)
        if inc is None:
            out.append(f"edge {e}: no inclusion attached")
            continue
        if inc.source is not h.graphs.get(o) or inc.target is not h.graphs.get(t):
            if inc.source.kinds != h.graphs[o].kinds or inc.target.kinds != h.graphs[t].kinds:
                out.append(f"edge {e}: inclusion endpoints mismatch")
        out += [f"edge {e}: {m}" for m in cg.validate_inclusion(inc)]
        steps = h.witnesses.get(e)
        if steps is not None:
            chain = cg.witness_chain(inc, steps)
            comp = chain[0]
            for nxt in chain[1:]:
                comp = cg.compose_inclusions(nxt, comp)
            if comp.vmap != inc.vmap or comp.emap != inc.emap:
                out.append(f"edge {e}: witness steps do not replay to the inclusion")
    return out


# -- composition and decomposition -------------------------------------------

def sigma_compose(h: CGraphForest, sigma) -> CGraphForest:
    """Select floors sigma(0) < sigma(1) < ... and compose inclusions along
    the unique connecting paths."""
    sigma = list(sigma)
    if any(a >= b for a, b in zip(sigma, sigma[1:])):
        raise PreconditionError("index map must be strictly increasing")
    if not sigma or sigma[-1] >= len(h.forest.floors):
        raise PreconditionError("index map out of range")
    fl = h.forest.floor_of()
    parent = {}
    for e, (o, t) in h.forest.edges.items():
        parent[t] = (o, e)
    floors = tuple(h.forest.floors[i] for i in sigma)
    edges = {}
    inclusions = {}
    nxt = 0
    for level, pick in enumerate(sigma[1:], start=1):
        for v in h.forest.floors[pick]:
            chain = []
            w = v
            while fl[w] > sigma[level - 1]:
                o, e = parent[w]
                chain.append(e)
                w = o
            comp = h.inclusions[chain[-1]]
            for e in reversed(chain[:-1]):
                comp = cg.compose_inclusions(h.inclusions[e], comp)
            edges[nxt] = (w, v)
            inclusions[nxt] = comp
            nxt += 1
    graphs = {v: h.graphs[v] for floor in floors for v in floor}
    return CGraphForest(GradedForest(floors, edges), graphs, inclusions)


@dataclass(frozen=True)
class DecomposedForest(CGraphForest):
    """Elementary decomposition: every floor either consists of bijective
    inclusions only, or has pairwise distinct origins and exactly one
    elementary edge (``estar``) with all others bijective.  ``sigma`` maps
    the original floors back into this one."""
    floor_kinds: tuple[str, ...] = ()
    estar: dict[int, int] = field(default_factory=dict)  # floor -> edge id
    sigma: tuple[int, ...] = ()


def elementary_decomposition(h: CGraphForest) -> DecomposedForest:
    """Serialize each floor so at most one basic-piece attachment happens
    per step; branching happens on separate all-bijective floors."""
    errs = validate_cgraph_forest(h)
    if errs:
        raise PreconditionError("invalid forest: " + "; ".join(errs))
    floors: list[list[int]] = [list(h.forest.roots())]
    graphs: dict[int, CGraph] = {v: h.graphs[v] for v in h.forest.roots()}
    fedges: dict[int, tuple[int, int]] = {}
    inclusions: dict[int, CInclusion] = {}
    floor_kinds: list[str] = []
    estar: dict[int, int] = {}
    sigma = [0]
    carrier = {v: v for v in h.forest.roots()}  # original vertex -> current vertex
    nxt_v = max(h.forest.floor_of(), default=-1) + 1
    nxt_e = 0

    def add_floor(kind: str):
        floors.append([])
        floor_kinds.append(kind)

    for n in range(len(h.forest.floors) - 1):
        level_edges = h.forest.edges_from_floor(n)
        chains: list[tuple[int, list[CInclusion]]] = []  # (orig terminal, arrows)
        for e in level_edges:
            o, t = h.forest.edges[e]
            inc = h.inclusions[e]
            steps = h.witnesses.get(e)
            if steps is None:
                if inc.is_bijective():
                    steps = ()
                else:
                    steps = tuple(cg.peel_decomposition(inc))
            chain = cg.witness_chain(inc, steps) if steps else [inc]
            chains.append((t, chain))

        origins = [h.forest.edges[e][0] for e in level_edges]
        if len(set(origins)) != len(origins):
            # replication floor: one bijective copy per outgoing edge
            add_floor("bijective")
            new_carrier = {}
            for (t, chain), o in zip(chains, origins):
                src = graphs[carrier[o]]
                v = nxt_v
                nxt_v += 1
                floors[-1].append(v)
                graphs[v] = src
                fedges[nxt_e] = (carrier[o], v)
                inclusions[nxt_e] = cg.identity_inclusion(src)
                nxt_e += 1
                new_carrier[t] = v
        else:
            new_carrier = {t: carrier[h.forest.edges[e][0]]
                           for e, (t, _) in zip(level_edges, chains)}

        pending = [(t, list(chain)) for t, chain in chains]
        if all(len(chain) == 1 and chain[0].is_bijective() for _, chain in pending):
            # nothing to attach: land the bijective arrows on one floor
            add_floor("bijective")
            for t, chain in pending:
                v = nxt_v
                nxt_v += 1
                floors[-1].append(v)
                graphs[v] = chain[0].target
                fedges[nxt_e] = (new_carrier[t], v)
                inclusions[nxt_e] = chain[0]
                nxt_e += 1
                new_carrier[t] = v
        else:
            total = sum(len(chain) for _, chain in pending)
            done = 0
            posn = {t: 0 for t, _ in pending}
            while done < total:
                active = next(t for t, chain in pending if posn[t] < len(chain))
                add_floor("elementary")
                for t, chain in pending:
                    v = nxt_v
                    nxt_v += 1
                    floors[-1].append(v)
                    if t == active:
                        arrow = chain[posn[t]]
                        posn[t] += 1
                        done += 1
                        estar[len(floors) - 2] = nxt_e
                        graphs[v] = arrow.target
                        fedges[nxt_e] = (new_carrier[t], v)
                        inclusions[nxt_e] = arrow
                    else:
                        src = graphs[new_carrier[t]]
                        graphs[v] = src
                        fedges[nxt_e] = (new_carrier[t], v)
                        inclusions[nxt_e] = cg.identity_inclusion(src)
                    nxt_e += 1
                    new_carrier[t] = v
        carrier = new_carrier
        sigma.append(len(floors) - 1)

    return DecomposedForest(GradedForest(tuple(map(tuple, floors)), fedges),
                            graphs, inclusions, {},
                            tuple(floor_kinds), estar, tuple(sigma))


def limit_truncation(h: CGraphForest, ray, upto: int):
    """Follow a root-based ray of edges; return the floor graph reached and
    the composed chain of inclusions from the root."""
    fl = h.forest.floor_of()
    if upto == 0:
        root = h.forest.edges[ray[0]][0] if ray else h.forest.roots()[0]
        return h.graphs[root], []
    chain = []
    at = None
    for n, e in enumerate(ray[:upto]):
        o, t = h.forest.edges[e]
        if fl[o] != n or (at is not None and o != at):
            raise PreconditionError("inconsistent ray")
        chain.append(h.inclusions[e])
        at = t
    return h.graphs[at], chain


# -- shell growth --------------------------------------------------------------

def family_c_check(g: CGraph, depth: int) -> bool:
    """Whether a pointed graph of radius 2*depth+1 grows by legal shells:
    each odd ball extends the previous one by disjoint basic pieces, h4
    pieces meeting the old boundary at two vertices, s and h2 pieces at one,
    with strict growth and no interior valency-1 vertices."""
    if g.pointing is None or g.kinds[g.pointing] in cg.BOUNDARY_KINDS:
        return False
    if cg.validate(g):
        return False
    dist = cg.distances(g, [g.pointing])
    radius = 2 * depth + 1
    if set(dist) != set(g.kinds) or max(dist.values(), default=0) > radius:
        return False
    for v, k in g.kinds.items():
        if k == cg.B1 and dist[v] != radius:
            return False
    for shell in range(1, depth + 1):
        lo = 2 * shell - 1
        inner = {v for v, d in dist.items() if d <= lo}
        boundary = {v for v in inner if dist[v] == lo and
                    sum(1 for e in g.incidence[v] if dist[g.other_end(e, v)] < lo) == 1}
        centers = [v for v, d in dist.items() if d == lo + 1]
        if not centers:
            return False
        seen: set[int] = set()
        for c in centers:
            if g.kinds[c] in cg.BOUNDARY_KINDS:
                return False
            piece = {c} | set(g.neighbors(c))
            if piece & seen:
                return False
            seen |= piece
            meets = piece & inner
            want = 2 if g.kinds[c] == cg.H4 else 1
            if len(meets) != want or not meets <= boundary:
                return False
    return True


# -- the universal forest -------------------------------------------------------

def shell_extensions(g: CGraph) -> list[tuple[CGraph, tuple[ElementaryStep, ...]]]:
    """All one-shell extensions of a pointed ball, up to isomorphism.

    Every valency-1 boundary vertex must be consumed, by an h2 or s piece
    alone or by an h4 piece in pairs.  Generated by canonical-form keyed
    search over partial shells, so symmetric choices collapse early.
    """
    start_b1 = tuple(sorted(v for v, k in g.kinds.items() if k == cg.B1))
    if not start_b1:
        raise PreconditionError("ball has no boundary to extend")
    done: dict[bytes, tuple[CGraph, tuple[ElementaryStep, ...]]] = {}
    frontier: dict[bytes, tuple[CGraph, tuple[int, ...], tuple[ElementaryStep, ...]]] = {
        cg.canonical_form(g): (g, start_b1, ())}
    while frontier:
        nxt: dict[bytes, tuple] = {}
        for graph, remaining, steps in frontier.values():
            v = remaining[0]
            center = max(graph.kinds) + 1
            options = [ElementaryStep(cg.H2, (v,), center),
                       ElementaryStep(cg.S4, (v,), center)]
            options += [ElementaryStep(cg.H4, (v, w), center) for w in remaining[1:]]
            for step in options:
                bigger, _ = cg.attach_piece(graph, step)
                left = tuple(x for x in remaining if x not in step.attach)
                key = cg.canonical_form(bigger)
                if left:
                    nxt.setdefault(key, (bigger, left, steps + (step,)))
                else:
                    done.setdefault(key, (bigger, steps + (step,)))
        frontier = nxt
    return [done[k] for k in sorted(done)]


def universal_forest(depth: int, max_depth: int = 2) -> CGraphForest:
    """Floors of iso-classes of odd balls grown by legal shells from the
    three basic pieces; each ball's parent is its inner ball, so incoming
    edges are unique.  Enumeration is exponential: capped at ``max_depth``.
    """
    if depth > max_depth:
        raise ResourceCapError(f"universal forest capped at depth {max_depth}")
    roots = [cg.h2_piece(), cg.s_piece(), cg.h4_piece()]
    floors: list[list[int]] = [[0, 1, 2]]
    graphs: dict[int, CGraph] = dict(enumerate(roots))
    fedges: dict[int, tuple[int, int]] = {}
    inclusions: dict[int, CInclusion] = {}
    witnesses: dict[int, tuple[ElementaryStep, ...]] = {}
    nxt_v, nxt_e = 3, 0
    for _ in range(depth):
        floors.append([])
        for parent in floors[-2]:
            for bigger, steps in shell_extensions(graphs[parent]):
                v = nxt_v
                nxt_v += 1
                floors[-1].append(v)
                graphs[v] = bigger
                fedges[nxt_e] = (parent, v)
                inclusions[nxt_e] = cg.CInclusion(
                    graphs[parent], bigger,
                    {w: w for w in graphs[parent].kinds},
                    {e: e for e in graphs[parent].edges})
                witnesses[nxt_e] = steps
                nxt_e += 1
    return CGraphForest(GradedForest(tuple(map(tuple, floors)), fedges),
                        graphs, inclusions, witnesses)


# -- realized forests -----------------------------------------------------------

@dataclass(frozen=True)
class HostedGraph:
    """A subgraph of a tower floor, as an induced graph on ambient ids,
    together with its collapse onto the abstract floor graph."""
    graph: CGraph
    collapse: "object"  # forge.collapse.Collapse

    def vertices(self) -> frozenset[int]:
        return frozenset(self.graph.kinds)


@dataclass(frozen=True)
class RealizedForest:
    """A decomposed forest carried by a tower: per floor, disjoint hosted
    subgraphs and one-sheet lifts making every square with the abstract
    inclusions commute."""
    abstract: CGraphForest
    tower: tuple  # CoveringMap per floor step
    hosts: dict[int, HostedGraph]  # forest vertex -> hosted subgraph
    lifts: dict[int, CInclusion]  # forest edge -> lift between hosts


def validate_realization(r: RealizedForest) -> list[str]:
    from . import collapse as col
    from . import covering as cov
    out = []
    fl = r.abstract.forest.floor_of()
    for n, floor in enumerate(r.abstract.forest.floors):
        used: set[int] = set()
        for v in floor:
            host = r.hosts.get(v)
            if host is None:
                out.append(f"vertex {v}: not hosted")
                continue
            vs = host.vertices()
            if vs & used:
                out.append(f"floor {n}: hosted subgraphs overlap at vertex {v}")
            used |= vs
            errs = col.validate_collapse(host.collapse)
            out += [f"vertex {v} collapse: {m}" for m in errs]
            if host.collapse.target.kinds != r.abstract.graphs[v].kinds:
                out.append(f"vertex {v}: collapse target is not the floor graph")
        if n < len(r.tower):
            p = r.tower[n]
            out += [f"floor {n} covering: {m}" for m in cov.validate_covering(p)]
            amb = set(p.base.kinds) if n == 0 else set(r.tower[n - 1].total.kinds)
            if not used <= amb:
                out.append(f"floor {n}: hosts not inside the tower graph")
    for e, (o, t) in r.abstract.forest.edges.items():
        j = r.lifts.get(e)
        if j is None:
            out.append(f"edge {e}: no lift")
            continue
        out += [f"edge {e} lift: {m}" for m in cg.validate_inclusion(j)]
        p = r.tower[fl[o]]
        for v, w in j.vmap.items():
            if p.vmap.get(w) != v:
                out.append(f"edge {e}: lift is not a section over vertex {v}")
                break
        for ee, ff in j.emap.items():
            if p.emap.get(ff) != ee:
                out.append(f"edge {e}: lift is not a section over edge {ee}")
                break
        f_o = r.hosts[o].collapse
        f_t = r.hosts[t].collapse
        iota = r.abstract.inclusions[e]
        for v in j.vmap:
            if f_t.vmap.get(j.vmap[v]) != iota.vmap.get(f_o.vmap.get(v)):
                out.append(f"edge {e}: collapse square fails at vertex {v}")
                break
        for ee in j.emap:
            lhs = f_t.emap.get(j.emap[ee])
            rhs = iota.emap.get(f_o.emap.get(ee)) if ee in f_o.emap else None
            if lhs != rhs:
                out.append(f"edge {e}: collapse square fails at edge {ee}")
                break
    return out


def ball_chain_forest(g: CGraph, floors: int) -> CGraphForest:
    """Chain of odd balls around the pointing of a shell-grown graph, with
    the shell pieces recorded as witnesses; floor k carries the radius
    2k+1 ball."""
    if g.pointing is None:
        raise PreconditionError("graph must be pointed")
    dist = cg.distances(g, [g.pointing])
    if max(dist.values()) < 2 * floors + 1:
        raise PreconditionError("graph too shallow for the requested chain")
    balls = [cg.ball(g, g.pointing, 2 * k + 1) for k in range(floors + 1)]
    graphs = dict(enumerate(balls))
    edges = {}
    inclusions = {}
    witnesses = {}
    for k in range(floors):
        lo, hi = balls[k], balls[k + 1]
        edges[k] = (k, k + 1)
        inclusions[k] = cg.CInclusion(lo, hi, {v: v for v in lo.kinds},
                                      {e: e for e in lo.edges})
        steps = []
        for c in sorted(v for v in hi.kinds
                        if v not in lo.kinds and not hi.is_boundary(v)):
            meets = tuple(sorted(w for w in hi.neighbors(c) if w in lo.kinds))
            steps.append(ElementaryStep(hi.kinds[c], meets, center=c))
        witnesses[k] = tuple(steps)
    forest = GradedForest(tuple((k,) for k in range(floors + 1)), edges)
    return CGraphForest(forest, graphs, inclusions, witnesses)

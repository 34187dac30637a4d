"""Finite coverings of typed graphs: validation, cut, surgery, cyclic covers.

A covering map stores explicit vertex and edge maps; parallel edges make the
vertex map alone insufficient.  Cut-and-reglue surgery follows a fixed
orientation convention: the two edges at any b2 vertex are ordered by edge
id, the smaller one acting as the "minus" side.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import cgraph as cg
from .cgraph import CGraph
from .errors import PreconditionError


@dataclass(frozen=True)
class CoveringMap:
    base: CGraph
    total: CGraph
    vmap: dict[int, int]
    emap: dict[int, int]

    def degree(self) -> int:
        fibers: dict[int, int] = {}
        for v in self.vmap.values():
            fibers[v] = fibers.get(v, 0) + 1
        sizes = set(fibers.values())
        if len(sizes) != 1 or set(fibers) != set(self.base.kinds):
            raise PreconditionError("fibers are not uniform")
        return sizes.pop()

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "total": self.total.to_json(),
            "vmap": {str(v): w for v, w in sorted(self.vmap.items())},
            "emap": {str(e): f for e, f in sorted(self.emap.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "CoveringMap":
        return cls(CGraph.from_json(data["base"]), CGraph.from_json(data["total"]),
                   {int(v): w for v, w in data["vmap"].items()},
                   {int(e): f for e, f in data["emap"].items()})


def identity_covering(g: CGraph) -> CoveringMap:
    return CoveringMap(g, g, {v: v for v in g.kinds}, {e: e for e in g.edges})


def validate_covering(p: CoveringMap) -> list[str]:
    out = []
    out += [f"base: {m}" for m in cg.validate(p.base)]
    out += [f"total: {m}" for m in cg.validate(p.total)]
    if set(p.vmap) != set(p.total.kinds):
        out.append("vertex map domain mismatch")
        return out
    if set(p.emap) != set(p.total.edges):
        out.append("edge map domain mismatch")
        return out
    for v, w in p.vmap.items():
        if w not in p.base.kinds:
            out.append(f"vertex {v} maps outside base")
        elif p.total.kinds[v] != p.base.kinds[w]:
            out.append(f"vertex {v}: kind not preserved")
    for e, f in p.emap.items():
        if f not in p.base.edges:
            out.append(f"edge {e} maps outside base")
            continue
        a, b = p.total.edges[e]
        fa, fb = p.base.edges[f]
        if {p.vmap.get(a), p.vmap.get(b)} != {fa, fb}:
            out.append(f"edge {e}: endpoints not respected")
    for v in p.total.vertex_ids():
        up = [p.emap[e] for e in p.total.incidence[v]]
        down = p.base.incidence.get(p.vmap[v], [])
        if sorted(up) != sorted(down):
            out.append(f"star bijection fails at vertex {v}")
    return out


# -- disjoint copies -------------------------------------------------------

@dataclass(frozen=True)
class CopyLift:
    """A (1:1) lift assignment: base cell id -> total cell id."""
    vmap: dict[int, int]
    emap: dict[int, int]


@dataclass(frozen=True)
class DisjointCover:
    covering: CoveringMap
    copies: list[CopyLift]


def disjoint_cover(base: CGraph, n: int) -> DisjointCover:
    """n labeled copies of the base; the projection forgets the copy."""
    if n < 1:
        raise PreconditionError("need at least one copy")
    vstride = max(base.kinds, default=-1) + 1
    estride = max(base.edges, default=-1) + 1
    kinds = {}
    edges = {}
    vmap = {}
    emap = {}
    copies = []
    for i in range(n):
        cv = {v: i * vstride + v for v in base.kinds}
        ce = {e: i * estride + e for e in base.edges}
        for v, w in cv.items():
            kinds[w] = base.kinds[v]
            vmap[w] = v
        for e, f in ce.items():
            a, b = base.edges[e]
            edges[f] = (cv[a], cv[b])
            emap[f] = e
        copies.append(CopyLift(cv, ce))
    return DisjointCover(CoveringMap(base, CGraph(kinds, edges), vmap, emap), copies)


# -- cut -------------------------------------------------------------------

@dataclass(frozen=True)
class CutResult:
    """Graph cut open at a set of b2 vertices.

    Each cut vertex a splits into two b1 vertices: ``minus[a]`` keeps the
    smaller-id incident edge (or the assigned minus edge), ``plus[a]`` the
    other.  ``fold_v``/``fold_e`` give the folding map back onto the
    original graph.
    """
    original: CGraph
    graph: CGraph
    fold_v: dict[int, int]
    fold_e: dict[int, int]
    plus: dict[int, int]
    minus: dict[int, int]


def cut(g: CGraph, xs, tags: dict[int, tuple[int, int]] | None = None) -> CutResult:
    """Cut ``g`` along b2 vertices ``xs``; |V| grows by |xs|, edges persist.

    ``tags`` optionally assigns (minus_edge, plus_edge) per cut vertex;
    the default is the sorted incident edge pair.
    """
    xs = sorted(set(xs))
    for x in xs:
        if g.kinds.get(x) != cg.B2:
            raise PreconditionError(f"cut vertex {x} is not b2")
    kinds = dict(g.kinds)
    edges = dict(g.edges)
    fold_v = {v: v for v in g.kinds}
    fold_e = {e: e for e in g.edges}
    plus = {}
    minus = {}
    nxt = max(g.kinds, default=-1) + 1
    for x in xs:
        e_minus, e_plus = tags[x] if tags else tuple(sorted(g.incidence[x]))
        if {e_minus, e_plus} != set(g.incidence[x]):
            raise PreconditionError(f"bad edge tags at {x}")
        del kinds[x]
        vm, vp = nxt, nxt + 1
        nxt += 2
        kinds[vm] = cg.B1
        kinds[vp] = cg.B1
        minus[x], plus[x] = vm, vp
        fold_v[vm] = x
        fold_v[vp] = x
        del fold_v[x]
        for e, end in ((e_minus, vm), (e_plus, vp)):
            a, b = edges[e]
            edges[e] = (end, b) if a == x else (a, end)
    pointing = g.pointing if g.pointing not in set(xs) else None
    return CutResult(g, CGraph(kinds, edges, pointing), fold_v, fold_e, plus, minus)


def glue_pairs(graph: CGraph, pairs: list[tuple[int, int]], kind: str = cg.B2):
    """Identify vertex pairs; returns (new graph, old-vertex -> new-vertex)."""
    nxt = max(graph.kinds) + 1
    vmap = {v: v for v in graph.kinds}
    kinds = dict(graph.kinds)
    for a, b in pairs:
        w = nxt
        nxt += 1
        kinds[w] = kind
        del kinds[a]
        del kinds[b]
        vmap[a] = w
        vmap[b] = w
    edges = {e: (vmap[a], vmap[b]) for e, (a, b) in graph.edges.items()}
    pointing = vmap.get(graph.pointing) if graph.pointing is not None else None
    return CGraph(kinds, edges, pointing), vmap


# -- surgery ---------------------------------------------------------------

@dataclass(frozen=True)
class SurgeryResult:
    covering: CoveringMap
    cut: CutResult
    glue_v: dict[int, int]  # cut-graph vertex -> surgered-total vertex
    glue_e: dict[int, int]


def surgery(p0: CoveringMap, xs) -> SurgeryResult:
    """Cut the total space at ``xs`` and cross-reglue over each base vertex.

    Requires the restriction of the projection to ``xs`` to be (2:1) onto
    its image.  Degree and base are preserved.
    """
    xs = sorted(set(xs))
    if not xs:
        return SurgeryResult(p0, cut(p0.total, []),
                             {v: v for v in p0.total.kinds},
                             {e: e for e in p0.total.edges})
    fibers: dict[int, list[int]] = {}
    for x in xs:
        if p0.total.kinds.get(x) != cg.B2:
            raise PreconditionError(f"fiber condition: {x} is not b2")
        fibers.setdefault(p0.vmap[x], []).append(x)
    for a0, pre in fibers.items():
        if len(pre) != 2:
            raise PreconditionError(f"fiber condition: {len(pre)} cut vertices over {a0}")
    tags = {}
    for a0, (a1, a2) in sorted(fibers.items()):
        e_minus, e_plus = sorted(p0.base.incidence[a0])
        for a in (a1, a2):
            up = {p0.emap[e]: e for e in p0.total.incidence[a]}
            if set(up) != {e_minus, e_plus}:
                raise PreconditionError(f"fiber condition: bad star over {a0}")
            tags[a] = (up[e_minus], up[e_plus])
    res = cut(p0.total, xs, tags)
    pairs = []
    for a0, (a1, a2) in sorted(fibers.items()):
        pairs.append((res.plus[a1], res.minus[a2]))
        pairs.append((res.minus[a1], res.plus[a2]))
    glued, gv = glue_pairs(res.graph, pairs)
    vmap = {}
    for v in res.graph.kinds:
        vmap[gv[v]] = p0.vmap[res.fold_v[v]]
    emap = {e: p0.emap[res.fold_e[e]] for e in glued.edges}
    return SurgeryResult(CoveringMap(p0.base, glued, vmap, emap), res, gv,
                         {e: e for e in res.graph.edges})


# -- cyclic covers ---------------------------------------------------------

@dataclass(frozen=True)
class CyclicCover:
    covering: CoveringMap
    copies: list[CopyLift]  # lift of the base minus the cut vertex, per copy
    glue_vertices: list[int]
    cut_vertex: int


def cyclic_surgery(g: CGraph, a: int, n: int, labels=None) -> CyclicCover:
    """Degree-n cover from n copies of ``g`` cut at ``a`` and chained in a
    cycle: the plus side of copy i glues to the minus side of copy i+1.

    Each copy carries a canonical (1:1) lift of g minus the cut vertex;
    edges lift into their own copy, the two edges at ``a`` landing on the
    glue vertices shared with the neighbouring copies.
    """
    if g.kinds.get(a) != cg.B2:
        raise PreconditionError(f"cut vertex {a} is not b2")
    if n < 2:
        raise PreconditionError("cyclic cover needs at least 2 copies")
    if labels is not None and len(labels) != n:
        raise PreconditionError("need one label per copy")
    e_minus, e_plus = sorted(g.incidence[a])
    vstride = max(g.kinds) + 1
    estride = max(g.edges) + 1
    kinds = {}
    edges = {}
    vmap = {}
    emap = {}
    copies = []
    glue = [n * vstride + i for i in range(n)]
    for i, w in enumerate(glue):
        kinds[w] = cg.B2
        vmap[w] = a
    for i in range(n):
        cv = {v: i * vstride + v for v in g.kinds if v != a}
        ce = {e: i * estride + e for e in g.edges}
        for v, w in cv.items():
            kinds[w] = g.kinds[v]
            vmap[w] = v
        for e, f in ce.items():
            p, q = g.edges[e]
            if e == e_plus:
                ends = (glue[i], cv[q] if p == a else cv[p])
            elif e == e_minus:
                ends = (glue[(i - 1) % n], cv[q] if p == a else cv[p])
            else:
                ends = (cv[p], cv[q])
            edges[f] = ends
            emap[f] = e
        copies.append(CopyLift(cv, ce))
    total = CGraph(kinds, edges)
    return CyclicCover(CoveringMap(g, total, vmap, emap), copies, glue, a)


# -- small utilities -------------------------------------------------------

def compose(p: CoveringMap, q: CoveringMap) -> CoveringMap:
    """q after p: pre total(q) = base(p); degrees multiply."""
    if set(q.total.kinds) != set(p.base.kinds) or set(q.total.edges) != set(p.base.edges):
        raise PreconditionError("coverings do not compose")
    return CoveringMap(q.base, p.total,
                       {v: q.vmap[w] for v, w in p.vmap.items()},
                       {e: q.emap[f] for e, f in p.emap.items()})


def find_nondisconnecting_b2(g: CGraph, comp=None) -> int:
    """Least b2 vertex of the component whose cut leaves it connected.

    Existence needs positive first Betti number on the component."""
    if comp is None:
        comp = max(cg.components(g), key=len)
    comp = frozenset(comp)
    sub = cg.induced_subgraph(g, comp)
    if cg.betti(sub) == 0:
        raise PreconditionError("component has no cycle, every cut disconnects a branch")
    for v in sorted(comp):
        if g.kinds[v] != cg.B2 or sub.kinds[v] != cg.B2:
            continue
        opened = cut(sub, [v])
        if cg.is_connected(opened.graph):
            return v
    raise PreconditionError("no non-disconnecting b2 vertex found")


def lift_vertices(lift: CopyLift, vset) -> frozenset[int]:
    return frozenset(lift.vmap[v] for v in vset)

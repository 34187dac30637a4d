"""Collapse quotients and truncated end-space comparison.

A collapse crushes a disjoint family of finite connected interior subgraphs
with positive first Betti number onto fresh homology vertices and is an
isomorphism elsewhere.  End spaces are compared through finite rooted trees
of complement components, flagged by whether each component still carries
homology.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import cgraph as cg
from .cgraph import CGraph
from .errors import PreconditionError


@dataclass(frozen=True)
class Collapse:
    source: CGraph
    target: CGraph
    family: tuple[frozenset[int], ...]
    vmap: dict[int, int]
    emap: dict[int, int]  # defined on non-collapsed edges only

    def member_of(self, v: int) -> frozenset[int] | None:
        for member in self.family:
            if v in member:
                return member
        return None

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "family": [sorted(m) for m in self.family],
            "vmap": {str(v): w for v, w in sorted(self.vmap.items())},
            "emap": {str(e): f for e, f in sorted(self.emap.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "Collapse":
        return cls(CGraph.from_json(data["source"]), CGraph.from_json(data["target"]),
                   tuple(frozenset(m) for m in data["family"]),
                   {int(v): w for v, w in data["vmap"].items()},
                   {int(e): f for e, f in data["emap"].items()})


def identity_collapse(g: CGraph) -> Collapse:
    return Collapse(g, g, (), {v: v for v in g.kinds}, {e: e for e in g.edges})


def _exit_edges(g: CGraph, member: frozenset[int]) -> list[int]:
    out = []
    for v in member:
        for e in g.incidence[v]:
            if g.other_end(e, v) not in member:
                out.append(e)
    return sorted(out)


def quotient_by_family(g: CGraph, family) -> Collapse:
    """Crush each family member to a fresh homology vertex.

    The member's exit-edge count decides the kind: 2 exits make an h2
    vertex, 4 an h4 vertex; anything else is rejected.
    """
    family = tuple(frozenset(m) for m in family)
    if any(k in (cg.H2, cg.H4) for k in g.kinds.values()):
        raise PreconditionError("source already has homology vertices")
    taken: set[int] = set()
    for member in family:
        if member & taken:
            raise PreconditionError("family members overlap")
        taken |= member
        if any(g.kinds[v] == cg.B1 for v in member):
            raise PreconditionError("member touches boundary")
        sub = cg.induced_subgraph(g, member)
        if not cg.is_connected(sub) or len(member) == 0:
            raise PreconditionError("member not connected")
        if cg.betti(sub) == 0:
            raise PreconditionError("member has trivial homology")
    nxt = max(g.kinds) + 1
    vmap = {}
    kinds = {}
    h_of: dict[frozenset[int], int] = {}
    for member in family:
        exits = _exit_edges(g, member)
        if len(exits) == 2:
            kind = cg.H2
        elif len(exits) == 4:
            kind = cg.H4
        else:
            raise PreconditionError(f"invalid collapse valency: {len(exits)} exit edges")
        for e in exits:
            a, b = g.edges[e]
            outside = b if a in member else a
            if outside in taken:
                raise PreconditionError("exit edge runs into another member")
            if g.kinds[outside] not in cg.BOUNDARY_KINDS:
                raise PreconditionError("exit edge does not end at a boundary vertex")
        h = nxt
        nxt += 1
        kinds[h] = kind
        h_of[member] = h
        for v in member:
            vmap[v] = h
    for v in g.kinds:
        if v not in taken:
            vmap[v] = v
            kinds[v] = g.kinds[v]
    edges = {}
    emap = {}
    for e, (a, b) in g.edges.items():
        if a in taken and b in taken and vmap[a] == vmap[b]:
            continue
        edges[e] = (vmap[a], vmap[b])
        emap[e] = e
    pointing = g.pointing if (g.pointing is not None and g.pointing not in taken) else None
    return Collapse(g, CGraph(kinds, edges, pointing), family, vmap, emap)


def validate_collapse(c: Collapse) -> list[str]:
    out = []
    out += [f"source: {m}" for m in cg.validate(c.source)]
    out += [f"target: {m}" for m in cg.validate(c.target)]
    if any(k in (cg.H2, cg.H4) for k in c.source.kinds.values()):
        out.append("source has homology vertices")
    taken: set[int] = set()
    h_hit: dict[int, int] = {}
    for n, member in enumerate(c.family):
        if member & taken:
            out.append(f"member {n} overlaps another member")
        taken |= member
        if not member <= set(c.source.kinds):
            out.append(f"member {n} not inside the source")
            continue
        if any(c.source.kinds[v] == cg.B1 for v in member):
            out.append(f"member {n} touches the boundary")
        sub = cg.induced_subgraph(c.source, member)
        if not cg.is_connected(sub):
            out.append(f"member {n} not connected")
        if cg.betti(sub) == 0:
            out.append(f"member {n} has trivial homology")
        images = {c.vmap.get(v) for v in member}
        if len(images) != 1:
            out.append(f"member {n} not crushed to a single vertex")
            continue
        h = images.pop()
        if h is None or c.target.kinds.get(h) not in (cg.H2, cg.H4):
            out.append(f"member {n} not sent to a homology vertex")
        else:
            h_hit[h] = h_hit.get(h, 0) + 1
    h_all = {v for v, k in c.target.kinds.items() if k in (cg.H2, cg.H4)}
    if set(h_hit) != h_all or any(k != 1 for k in h_hit.values()):
        out.append("family is not in bijection with target homology vertices")
    for v in c.source.kinds:
        if v in taken:
            continue
        w = c.vmap.get(v)
        if w is None or w not in c.target.kinds:
            out.append(f"vertex {v} unmapped")
        elif c.target.kinds[w] != c.source.kinds[v]:
            out.append(f"vertex {v}: kind changes off the family")
    off = [v for v in c.source.kinds if v not in taken]
    if len({c.vmap[v] for v in off if c.vmap.get(v) is not None}) != len(off):
        out.append("map not injective off the family")
    elif len(off) != len(c.target.kinds) - len(h_all):
        out.append("map not onto the non-homology part")
    # surviving edges match bijectively; collapsed edges lie inside members
    surv = {}
    for e, (a, b) in c.source.edges.items():
        if e in c.emap:
            surv[e] = c.emap[e]
        else:
            ma = next((m for m in c.family if a in m), None)
            if ma is None or b not in ma:
                out.append(f"edge {e} dropped but not inside a member")
    if sorted(surv.values()) != c.target.edge_ids():
        out.append("surviving edges not in bijection with target edges")
    else:
        for e, f in surv.items():
            a, b = c.source.edges[e]
            fa, fb = c.target.edges[f]
            if {c.vmap[a], c.vmap[b]} != {fa, fb}:
                out.append(f"edge {e}: endpoints not respected")
    return out


def preimage_component(c: Collapse, tvs) -> frozenset[int]:
    """Full preimage of a connected target set; asserts connectivity."""
    tvs = set(tvs)
    if not cg.is_connected(cg.induced_subgraph(c.target, tvs)):
        raise PreconditionError("target set not connected")
    pre = frozenset(v for v in c.source.kinds if c.vmap[v] in tvs)
    if pre and not cg.is_connected(cg.induced_subgraph(c.source, pre)):
        raise AssertionError("collapse preimage of a connected set is disconnected")
    return pre


# -- truncated end spaces ----------------------------------------------------

@dataclass(frozen=True)
class EndsNode:
    vertices: frozenset[int]
    hom: bool
    parent: int | None  # index into the previous level


@dataclass(frozen=True)
class FiniteEndsTree:
    """Components of g minus an increasing exhaustion, with homology flags."""
    levels: tuple[tuple[EndsNode, ...], ...]

    def depth(self) -> int:
        return len(self.levels)

    def branch_count(self) -> int:
        return len(self.levels[-1]) if self.levels else 0

    def to_json(self) -> dict:
        return {"levels": [[{"size": len(n.vertices), "hom": n.hom,
                             "parent": n.parent} for n in level]
                           for level in self.levels]}


def ends_tree_from_exhaustion(g: CGraph, exhaustion) -> FiniteEndsTree:
    """Tree of complement components for explicit nested vertex sets."""
    levels = []
    prev: list[EndsNode] = []
    prev_sets: list[frozenset[int]] = []
    for k_i in exhaustion:
        k_i = set(k_i)
        rest = set(g.kinds) - k_i
        comps = sorted(cg.components(cg.induced_subgraph(g, rest)), key=sorted) if rest else []
        level = []
        for comp in comps:
            parent = None
            if prev_sets:
                for n, s in enumerate(prev_sets):
                    if comp <= s:
                        parent = n
                        break
            level.append(EndsNode(comp, cg.hom_nontrivial(g, comp), parent))
        levels.append(tuple(level))
        prev_sets = [n.vertices for n in level]
    return FiniteEndsTree(tuple(levels))


def ends_tree(g: CGraph, roots, depth: int) -> FiniteEndsTree:
    """Exhaust by balls of radius 0..depth-1 around the root set."""
    dist = cg.distances(g, sorted(set(roots)))
    exhaustion = [{v for v, d in dist.items() if d <= r} for r in range(depth)]
    return ends_tree_from_exhaustion(g, exhaustion)


def _flag_code(tree: FiniteEndsTree, level: int, index: int) -> tuple:
    node = tree.levels[level][index]
    if level + 1 >= len(tree.levels):
        kids = ()
    else:
        kids = tuple(sorted(_flag_code(tree, level + 1, j)
                            for j, m in enumerate(tree.levels[level + 1])
                            if m.parent == index))
    return (node.hom, kids)


def ends_trees_equivalent(t1: FiniteEndsTree, t2: FiniteEndsTree) -> bool:
    """Rooted-tree isomorphism respecting the homology flags."""
    if t1.depth() != t2.depth():
        return False
    if t1.depth() == 0:
        return True
    code1 = sorted(_flag_code(t1, 0, i) for i in range(len(t1.levels[0])))
    code2 = sorted(_flag_code(t2, 0, i) for i in range(len(t2.levels[0])))
    return code1 == code2


def matched_ends_trees(c: Collapse, roots, depth: int):
    """Ends trees of target and source with the source exhausted by
    preimages of the target's balls, as the equivalence argument demands."""
    dist = cg.distances(c.target, sorted(set(roots)))
    k_sets = [{v for v, d in dist.items() if d <= r} for r in range(depth)]
    l_sets = [{v for v in c.source.kinds if c.vmap[v] in k} for k in k_sets]
    return (ends_tree_from_exhaustion(c.target, k_sets),
            ends_tree_from_exhaustion(c.source, l_sets))

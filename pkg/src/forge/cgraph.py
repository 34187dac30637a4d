"""Typed multigraphs with boundary/simple/homology vertices.

Vertices come in five kinds: b1 and b2 are boundary vertices (valency 1 and
2), s4 is a simple 4-valent vertex, h2 and h4 are homology vertices (valency
2 and 4) standing for collapsed subgraphs with positive first Betti number.
Every edge joins one boundary vertex to one non-boundary vertex, so the
graphs are bipartite and self-loop free.  Parallel edges are allowed and all
edges carry explicit ids, which the covering machinery relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotDecomposableError, PreconditionError

B1 = "b1"
B2 = "b2"
S4 = "s4"
H2 = "h2"
H4 = "h4"

KINDS = (B1, B2, S4, H2, H4)
BOUNDARY_KINDS = frozenset({B1, B2})
KIND_VALENCY = {B1: 1, B2: 2, S4: 4, H2: 2, H4: 4}

_JSON_KIND = {B1: "B1", B2: "B2", S4: "S4", H2: "H2", H4: "H4"}
_KIND_FROM_JSON = {v: k for k, v in _JSON_KIND.items()}


class CGraph:
    """Finite multigraph with kinded vertices and an optional pointing.

    Values are immutable by convention: operations build new graphs rather
    than mutating, so instances can be shared freely.
    """

    __slots__ = ("kinds", "edges", "pointing", "_inc")

    def __init__(self, kinds: dict[int, str], edges: dict[int, tuple[int, int]],
                 pointing: int | None = None):
        self.kinds = dict(kinds)
        self.edges = {e: (a, b) for e, (a, b) in edges.items()}
        self.pointing = pointing
        self._inc: dict[int, list[int]] | None = None

    # -- basic accessors -------------------------------------------------

    def vertex_ids(self) -> list[int]:
        return sorted(self.kinds)

    def edge_ids(self) -> list[int]:
        return sorted(self.edges)

    @property
    def incidence(self) -> dict[int, list[int]]:
        if self._inc is None:
            inc: dict[int, list[int]] = {v: [] for v in self.kinds}
            for e in sorted(self.edges):
                a, b = self.edges[e]
                if a in inc:
                    inc[a].append(e)
                if b in inc and b != a:
                    inc[b].append(e)
            self._inc = inc
        return self._inc

    def valency(self, v: int) -> int:
        return len(self.incidence[v])

    def other_end(self, e: int, v: int) -> int:
        a, b = self.edges[e]
        return b if v == a else a

    def neighbors(self, v: int) -> list[int]:
        return [self.other_end(e, v) for e in self.incidence[v]]

    def is_boundary(self, v: int) -> bool:
        return self.kinds[v] in BOUNDARY_KINDS

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (f"CGraph(|V|={len(self.kinds)}, |E|={len(self.edges)}, "
                f"pointing={self.pointing})")

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "vertices": [{"id": v, "kind": _JSON_KIND[self.kinds[v]]}
                         for v in self.vertex_ids()],
            "edges": [{"id": e, "a": self.edges[e][0], "b": self.edges[e][1]}
                      for e in self.edge_ids()],
            "pointing": self.pointing,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CGraph":
        kinds = {int(v["id"]): _KIND_FROM_JSON[v["kind"]] for v in data["vertices"]}
        edges = {int(e["id"]): (int(e["a"]), int(e["b"])) for e in data["edges"]}
        return cls(kinds, edges, data.get("pointing"))


# -- validation ----------------------------------------------------------

def validate(g: CGraph) -> list[str]:
    """Return the list of invariant violations; empty means valid."""
    out = []
    for e in g.edge_ids():
        a, b = g.edges[e]
        if a not in g.kinds or b not in g.kinds:
            out.append(f"edge {e}: endpoint missing from vertex set")
            continue
        if a == b:
            out.append(f"edge {e}: self-loop at vertex {a}")
            continue
        ka, kb = g.kinds[a] in BOUNDARY_KINDS, g.kinds[b] in BOUNDARY_KINDS
        if ka and kb:
            out.append(f"edge {e}: endpoints both boundary")
        elif not ka and not kb:
            out.append(f"edge {e}: endpoints both non-boundary")
    for v in g.vertex_ids():
        kind = g.kinds[v]
        if kind not in KIND_VALENCY:
            out.append(f"vertex {v}: unknown kind {kind!r}")
            continue
        want = KIND_VALENCY[kind]
        have = g.valency(v)
        if have != want:
            out.append(f"vertex {v}: valency mismatch ({kind} has {have}, wants {want})")
    if g.pointing is not None:
        if g.pointing not in g.kinds:
            out.append(f"pointing {g.pointing} is not a vertex")
        elif g.kinds[g.pointing] in BOUNDARY_KINDS:
            out.append(f"pointing {g.pointing} is of boundary kind")
    return out


def is_valid(g: CGraph) -> bool:
    return not validate(g)


# -- homology and connectivity -------------------------------------------

def components(g: CGraph) -> list[frozenset[int]]:
    seen: set[int] = set()
    comps = []
    for root in g.vertex_ids():
        if root in seen:
            continue
        comp = {root}
        stack = [root]
        while stack:
            v = stack.pop()
            for e in g.incidence[v]:
                w = g.other_end(e, v)
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def is_connected(g: CGraph) -> bool:
    return len(components(g)) <= 1


def betti(g: CGraph) -> int:
    """First Betti number |E| - |V| + #components."""
    return len(g.edges) - len(g.kinds) + len(components(g))


def hom_nontrivial(g: CGraph, vset) -> bool:
    """True when the induced subgraph has a cycle or a homology vertex."""
    if any(g.kinds[v] in (H2, H4) for v in vset):
        return True
    return betti(induced_subgraph(g, vset)) > 0


# -- subgraphs and balls --------------------------------------------------

def induced_subgraph(g: CGraph, vset, pointing: int | None = None) -> CGraph:
    """Induced sub-multigraph; boundary kinds are re-derived from valency.

    A b2 vertex that keeps a single incident edge becomes b1, matching how
    subgraphs of larger graphs acquire their own boundary.
    """
    vs = set(vset)
    edges = {e: ab for e, ab in g.edges.items() if ab[0] in vs and ab[1] in vs}
    deg: dict[int, int] = {v: 0 for v in vs}
    for a, b in edges.values():
        deg[a] += 1
        deg[b] += 1
    kinds = {}
    for v in vs:
        k = g.kinds[v]
        if k in BOUNDARY_KINDS:
            kinds[v] = B1 if deg[v] <= 1 else B2
        else:
            kinds[v] = k
    if pointing is None and g.pointing in vs:
        pointing = g.pointing
    return CGraph(kinds, edges, pointing)


def distances(g: CGraph, sources) -> dict[int, int]:
    from collections import deque
    dist = {s: 0 for s in sources}
    queue = deque(sorted(dist))
    while queue:
        v = queue.popleft()
        for e in g.incidence[v]:
            w = g.other_end(e, v)
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def ball(g: CGraph, v: int, r: int) -> CGraph:
    """Induced subgraph on vertices at distance <= r from v.

    For a non-boundary center and odd radius the result satisfies the
    subgraph closure condition, with cut b2 vertices demoted to b1.
    """
    if v not in g.kinds:
        raise PreconditionError(f"no vertex {v}")
    dist = distances(g, [v])
    vs = {w for w, d in dist.items() if d <= r}
    pointing = v if g.kinds[v] not in BOUNDARY_KINDS else None
    return induced_subgraph(g, vs, pointing)


def is_c_subgraph(g: CGraph, vset) -> bool:
    """Closure test: non-boundary vertices keep their whole star inside."""
    vs = set(vset)
    if not vs <= set(g.kinds):
        raise PreconditionError("vertex set not contained in graph")
    for v in vs:
        if g.kinds[v] in BOUNDARY_KINDS:
            continue
        for e in g.incidence[v]:
            if g.other_end(e, v) not in vs:
                return False
    return True


def boundary_vertices(g: CGraph) -> list[int]:
    return [v for v in g.vertex_ids() if g.kinds[v] == B1]


def interior_vertices(g: CGraph) -> list[int]:
    return [v for v in g.vertex_ids() if g.kinds[v] != B1]


# -- basic pieces ---------------------------------------------------------

def h2_piece() -> CGraph:
    return CGraph({0: H2, 1: B1, 2: B1}, {0: (0, 1), 1: (0, 2)}, pointing=0)


def s_piece() -> CGraph:
    return CGraph({0: S4, 1: B1, 2: B1, 3: B1, 4: B1},
                  {0: (0, 1), 1: (0, 2), 2: (0, 3), 3: (0, 4)}, pointing=0)


def h4_piece() -> CGraph:
    return CGraph({0: H4, 1: B1, 2: B1, 3: B1, 4: B1},
                  {0: (0, 1), 1: (0, 2), 2: (0, 3), 3: (0, 4)}, pointing=0)


def figure_eight() -> CGraph:
    """One 4-valent simple vertex joined to two b2 vertices by double edges."""
    return CGraph({0: S4, 1: B2, 2: B2},
                  {0: (0, 1), 1: (0, 1), 2: (0, 2), 3: (0, 2)})


PIECE_BUILDERS = {H2: h2_piece, S4: s_piece, H4: h4_piece}


# -- inclusions -----------------------------------------------------------

@dataclass(frozen=True)
class CInclusion:
    """Injective kind-preserving morphism whose image is a closed subgraph.

    The one permitted kind change: a b1 vertex of the source may land on a
    b2 vertex of the target (its second edge lies outside the image).
    """
    source: CGraph
    target: CGraph
    vmap: dict[int, int]
    emap: dict[int, int]

    def image_vertices(self) -> frozenset[int]:
        return frozenset(self.vmap.values())

    def image_edges(self) -> frozenset[int]:
        return frozenset(self.emap.values())

    def is_bijective(self) -> bool:
        return (len(self.vmap) == len(self.target.kinds)
                and len(self.emap) == len(self.target.edges))


def identity_inclusion(g: CGraph) -> CInclusion:
    return CInclusion(g, g, {v: v for v in g.kinds}, {e: e for e in g.edges})


def subset_inclusion(sub: CGraph, g: CGraph) -> CInclusion:
    """Inclusion of an induced subgraph that shares the ambient ids."""
    return CInclusion(sub, g, {v: v for v in sub.kinds}, {e: e for e in sub.edges})


def compose_inclusions(outer: CInclusion, inner: CInclusion) -> CInclusion:
    if outer.source is not inner.target and set(outer.source.kinds) != set(inner.target.kinds):
        raise PreconditionError("inclusions do not compose")
    return CInclusion(inner.source, outer.target,
                      {v: outer.vmap[w] for v, w in inner.vmap.items()},
                      {e: outer.emap[f] for e, f in inner.emap.items()})


def validate_inclusion(i: CInclusion) -> list[str]:
    out = []
    g, h = i.source, i.target
    if set(i.vmap) != set(g.kinds):
        out.append("vertex map domain mismatch")
        return out
    if set(i.emap) != set(g.edges):
        out.append("edge map domain mismatch")
        return out
    if len(set(i.vmap.values())) != len(i.vmap):
        out.append("vertex map not injective")
    if len(set(i.emap.values())) != len(i.emap):
        out.append("edge map not injective")
    for v, w in i.vmap.items():
        if w not in h.kinds:
            out.append(f"vertex {v} maps outside target")
            continue
        kv, kw = g.kinds[v], h.kinds[w]
        if kv != kw and not (kv == B1 and kw == B2):
            out.append(f"vertex {v}: kind {kv} mapped onto {kw}")
    for e, f in i.emap.items():
        if f not in h.edges:
            out.append(f"edge {e} maps outside target")
            continue
        a, b = g.edges[e]
        fa, fb = h.edges[f]
        if {i.vmap.get(a), i.vmap.get(b)} != {fa, fb}:
            out.append(f"edge {e}: endpoints not respected")
    img_v = i.image_vertices()
    img_e = i.image_edges()
    for w in img_v:
        if h.kinds[w] in BOUNDARY_KINDS:
            continue
        for e in h.incidence[w]:
            if e not in img_e:
                out.append(f"image not closed at non-boundary vertex {w}")
                break
    return out


# -- elementary attachments ----------------------------------------------

@dataclass(frozen=True)
class ElementaryStep:
    """One basic-piece attachment: h2/s pieces glue at one boundary vertex,
    h4 pieces at two.  ``center`` optionally records the piece's non-boundary
    vertex when the step was read off from an existing graph."""
    kind: str  # H2, S4 or H4
    attach: tuple[int, ...]
    center: int | None = field(default=None, compare=False)

    def arity(self) -> int:
        return 2 if self.kind == H4 else 1


def attach_piece(h: CGraph, step: ElementaryStep) -> tuple[CGraph, CInclusion]:
    """Glue a basic piece at valency-1 boundary vertices of ``h``.

    The attachment vertices are promoted from b1 to b2; the rest of the
    piece is fresh.  Returns the enlarged graph and the inclusion of ``h``.
    """
    if step.kind not in (H2, S4, H4):
        raise PreconditionError(f"unknown piece kind {step.kind!r}")
    want = step.arity()
    if len(step.attach) != want or len(set(step.attach)) != want:
        raise PreconditionError("invalid attachment: wrong number of distinct vertices")
    for v in step.attach:
        if v not in h.kinds:
            raise PreconditionError(f"invalid attachment: no vertex {v}")
        if h.kinds[v] != B1:
            raise PreconditionError(f"invalid attachment: vertex {v} is {h.kinds[v]}, not b1")

    next_v = max(h.kinds, default=-1) + 1
    next_e = max(h.edges, default=-1) + 1
    kinds = dict(h.kinds)
    edges = dict(h.edges)
    for v in step.attach:
        kinds[v] = B2
    center = next_v
    kinds[center] = step.kind
    next_v += 1
    ends: list[int] = list(step.attach)
    free = KIND_VALENCY[step.kind] - want
    for _ in range(free):
        kinds[next_v] = B1
        ends.append(next_v)
        next_v += 1
    for w in ends:
        edges[next_e] = (center, w)
        next_e += 1
    enlarged = CGraph(kinds, edges, h.pointing)
    incl = CInclusion(h, enlarged, {v: v for v in h.kinds}, {e: e for e in h.edges})
    return enlarged, incl


def replay_steps(root: CGraph, steps) -> tuple[CGraph, CInclusion]:
    """Apply a list of steps and return the composite inclusion of the root."""
    g = root
    incl = identity_inclusion(root)
    for step in steps:
        g, j = attach_piece(g, step)
        incl = compose_inclusions(j, incl)
    return g, incl


def is_elementary(i: CInclusion) -> ElementaryStep | None:
    """Recognize target = image plus one basic piece; return the step or None."""
    if validate_inclusion(i):
        return None
    h = i.target
    img_v = i.image_vertices()
    img_e = i.image_edges()
    extra_nb = [v for v in h.kinds
                if v not in img_v and h.kinds[v] not in BOUNDARY_KINDS]
    if len(extra_nb) != 1:
        return None
    c = extra_nb[0]
    star = set(h.incidence[c])
    if set(h.edges) - img_e != star:
        return None
    meets = []
    fresh = []
    for e in h.incidence[c]:
        w = h.other_end(e, c)
        (meets if w in img_v else fresh).append(w)
    if set(h.kinds) - img_v != {c} | set(fresh):
        return None
    want = 2 if h.kinds[c] == H4 else 1
    if len(meets) != want or len(set(meets)) != want:
        return None
    return ElementaryStep(h.kinds[c], tuple(sorted(meets)), center=c)


def peel_decomposition(i: CInclusion, prefer=(H2, S4, H4)) -> list[ElementaryStep]:
    """Factor an inclusion into basic-piece attachments.

    Greedy search with full backtracking over the order in which the
    non-boundary vertices of target-minus-image can be consumed; ties prefer
    h2 then s then h4 pieces, lowest center id first.  Steps carry target
    ids in both ``attach`` and ``center``, so replaying them on the source
    rebuilds a graph isomorphic to the target.

    Raises NotDecomposableError when the search space is exhausted.
    """
    errs = validate_inclusion(i)
    if errs:
        raise PreconditionError("invalid inclusion: " + "; ".join(errs))
    h = i.target
    img_v = i.image_vertices()
    current = set(img_v)
    deg = {v: 0 for v in h.kinds}
    for e in i.image_edges():
        a, b = h.edges[e]
        deg[a] += 1
        deg[b] += 1
    remaining = {v for v in h.kinds
                 if v not in img_v and h.kinds[v] not in BOUNDARY_KINDS}
    rank = {k: n for n, k in enumerate(prefer)}
    dead: set[frozenset[int]] = set()

    def candidates():
        cands = []
        for c in remaining:
            meet_edges = [e for e in h.incidence[c] if h.other_end(e, c) in current]
            meets = [h.other_end(e, c) for e in meet_edges]
            want = 2 if h.kinds[c] == H4 else 1
            if len(meet_edges) != want or len(set(meets)) != want:
                continue
            if any(deg[m] != 1 for m in meets):
                continue
            cands.append((rank[h.kinds[c]], c, tuple(sorted(meets))))
        cands.sort()
        return cands

    steps: list[ElementaryStep] = []

    def search() -> bool:
        if not remaining:
            return True
        key = frozenset(remaining)
        if key in dead:
            return False
        for _, c, meets in candidates():
            fresh = [h.other_end(e, c) for e in h.incidence[c]
                     if h.other_end(e, c) not in current]
            remaining.discard(c)
            current.add(c)
            current.update(fresh)
            for e in h.incidence[c]:
                a, b = h.edges[e]
                deg[a] += 1
                deg[b] += 1
            steps.append(ElementaryStep(h.kinds[c], meets, center=c))
            if search():
                return True
            steps.pop()
            for e in h.incidence[c]:
                a, b = h.edges[e]
                deg[a] -= 1
                deg[b] -= 1
            current.difference_update(fresh)
            current.discard(c)
            remaining.add(c)
        dead.add(key)
        return False

    if not search():
        raise NotDecomposableError("no elementary factorization exists")
    # every boundary vertex outside the image is adjacent to some consumed
    # center, so the steps cover the whole target.  Translate attachment ids
    # into replay coordinates (what attach_piece would name them when the
    # steps are replayed on the source); centers stay in target coordinates.
    mapping = {w: v for v, w in i.vmap.items()}
    nxt = max(i.source.kinds) + 1
    out = []
    for step in steps:
        out.append(ElementaryStep(step.kind,
                                  tuple(sorted(mapping[m] for m in step.attach)),
                                  center=step.center))
        mapping[step.center] = nxt
        nxt += 1
        fresh = sorted(w for w in h.neighbors(step.center)
                       if w not in mapping)
        for w in fresh:
            mapping[w] = nxt
            nxt += 1
    return out


def witness_chain(i: CInclusion, steps) -> list[CInclusion]:
    """Expand an inclusion into a chain of elementary inclusions.

    The intermediate stages are induced subgraphs of the target (sharing its
    ids); the first arrow is ``i`` with restricted codomain, the rest are
    literal subset inclusions.  Composing the chain gives back ``i`` exactly.
    """
    h = i.target
    stages = []
    vs = set(i.image_vertices())
    for step in steps:
        if step.center is None:
            raise PreconditionError("witness steps must carry target centers")
        vs.add(step.center)
        vs.update(h.other_end(e, step.center) for e in h.incidence[step.center])
        stages.append(induced_subgraph(h, vs, pointing=h.pointing if h.pointing in vs else None))
    if not stages:
        return []
    chain = [CInclusion(i.source, stages[0], dict(i.vmap), dict(i.emap))]
    for lo, hi in zip(stages, stages[1:]):
        chain.append(subset_inclusion(lo, hi))
    if len(stages[-1].kinds) != len(h.kinds):
        raise PreconditionError("witness steps do not cover the target")
    chain[-1] = CInclusion(chain[-1].source, h, dict(chain[-1].vmap), dict(chain[-1].emap))
    return chain



# -- canonical forms -------------------------------------------------------
#
# Components split into a 2-core plus pendant trees.  Trees are encoded
# exactly by bottom-up code tuples; the core (it carries all the cycles and
# stays small in practice) goes through color refinement plus backtracking,
# pruned by automorphisms discovered along the way.


def _code_of(g: CGraph, v: int, children, pointed) -> tuple:
    return (g.kinds[v], v == pointed,
            tuple(sorted(_code_of(g, w, children, pointed) for w in children[v])))


def _peel_to_core(g: CGraph, comp: frozenset[int]):
    """Return (core vertex set, children map of the pendant forest)."""
    from collections import deque
    deg = {v: g.valency(v) for v in comp}
    queue = deque(sorted(v for v in comp if deg[v] <= 1))
    dropped: set[int] = set()
    while queue:
        v = queue.popleft()
        if v in dropped or deg[v] > 1:
            continue
        dropped.add(v)
        for e in g.incidence[v]:
            w = g.other_end(e, v)
            if w not in dropped:
                deg[w] -= 1
                if deg[w] <= 1:
                    queue.append(w)
    core = set(comp) - dropped
    children: dict[int, list[int]] = {v: [] for v in comp}
    if core:
        order = distances_within(g, core, comp)
        for v in sorted(dropped):
            parent = next(w for w in g.neighbors(v) if order[w] < order[v])
            children[parent].append(v)
    return core, children


def distances_within(g: CGraph, sources, comp):
    from collections import deque
    dist = {s: 0 for s in sources}
    queue = deque(sorted(dist))
    while queue:
        v = queue.popleft()
        for e in g.incidence[v]:
            w = g.other_end(e, v)
            if w in comp and w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def _tree_children(g: CGraph, comp: frozenset[int], root: int):
    parent = {root: None}
    order = [root]
    for v in order:
        for e in g.incidence[v]:
            w = g.other_end(e, v)
            if w not in parent:
                parent[w] = v
                order.append(w)
    children: dict[int, list[int]] = {v: [] for v in parent}
    for v, p in parent.items():
        if p is not None:
            children[p].append(v)
    return children


def _tree_center(g: CGraph, comp: frozenset[int]) -> list[int]:
    deg = {v: g.valency(v) for v in comp}
    alive = set(comp)
    layer = sorted(v for v in comp if deg[v] <= 1)
    while len(alive) > 2:
        nxt = set()
        for v in layer:
            alive.discard(v)
            for e in g.incidence[v]:
                w = g.other_end(e, v)
                if w in alive:
                    deg[w] -= 1
                    if deg[w] == 1:
                        nxt.add(w)
        layer = sorted(nxt)
    return sorted(alive)


class _DSU:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    def same(self, a, b):
        return self.find(a) == self.find(b)


def _refine(vs, inc, other, colors):
    while True:
        sigs = {v: (colors[v], tuple(sorted(colors[other[e, v]] for e in inc[v])))
                for v in vs}
        table = {s: n for n, s in enumerate(sorted(set(sigs.values())))}
        new = {v: table[sigs[v]] for v in vs}
        if len(set(new.values())) == len(set(colors.values())):
            return new
        colors = new


def _core_canon(g: CGraph, core: list[int], base_sig: dict[int, tuple]):
    """Canonical (cert, labeling) of the colored core multigraph."""
    cset = set(core)
    inc = {v: [e for e in g.incidence[v] if g.other_end(e, v) in cset] for v in core}
    other = {(e, v): g.other_end(e, v) for v in core for e in inc[v]}
    ranks = {s: n for n, s in enumerate(sorted(set(base_sig.values())))}
    colors0 = {v: ranks[base_sig[v]] for v in core}
    orbits = _DSU(core)
    best: list = [None, None]

    def certificate(colors):
        order = sorted(core, key=lambda v: colors[v])
        lab = {v: n for n, v in enumerate(order)}
        edge_part = []
        for v in order:
            for e in inc[v]:
                w = other[e, v]
                if lab[w] >= lab[v]:
                    edge_part.append((lab[v], lab[w]))
        return (tuple(base_sig[v] for v in order), tuple(sorted(edge_part))), lab

    def rec(colors):
        colors = _refine(core, inc, other, colors)
        cells: dict[int, list[int]] = {}
        for v in core:
            cells.setdefault(colors[v], []).append(v)
        split = [c for c in sorted(cells) if len(cells[c]) > 1]
        if not split:
            cert, lab = certificate(colors)
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, lab
            elif cert == best[0]:
                inv = {n: v for v, n in best[1].items()}
                for v in core:
                    orbits.union(v, inv[lab[v]])
            return
        nxt = max(colors.values()) + 1
        tried: list[int] = []
        for v in sorted(cells[split[0]]):
            if any(orbits.same(v, u) for u in tried):
                continue
            tried.append(v)
            branch = dict(colors)
            branch[v] = nxt
            rec(branch)

    rec(colors0)
    return best[0], best[1]


def _component_cert(g: CGraph, comp: frozenset[int], pointed):
    core, children = _peel_to_core(g, comp)
    if not core:
        if pointed is not None and pointed in comp:
            centers = [pointed]
        else:
            centers = _tree_center(g, comp)
        best = min(_code_of(g, c, _tree_children(g, comp, c), pointed)
                   for c in centers)
        return ("tree", best)
    base_sig = {v: (g.kinds[v], v == pointed,
                    tuple(sorted(_code_of(g, w, children, pointed)
                                 for w in children[v])))
                for v in core}
    cert, _ = _core_canon(g, sorted(core), base_sig)
    return ("core", cert)


def canonical_form(g: CGraph, with_pointing: bool = True) -> bytes:
    """Canonical byte string: equal iff the graphs are isomorphic
    (kind-preserving, and pointing-preserving when ``with_pointing``)."""
    pointed = g.pointing if with_pointing else None
    certs = sorted(repr(_component_cert(g, comp, pointed)) for comp in components(g))
    return ("|".join(certs)).encode()


def is_isomorphic(g1: CGraph, g2: CGraph, with_pointing: bool = True) -> bool:
    if len(g1.kinds) != len(g2.kinds) or len(g1.edges) != len(g2.edges):
        return False
    if sorted(g1.kinds.values()) != sorted(g2.kinds.values()):
        return False
    return canonical_form(g1, with_pointing) == canonical_form(g2, with_pointing)


def _edge_between(g: CGraph, a: int, b: int) -> int:
    for e in g.incidence[a]:
        if g.other_end(e, a) == b:
            return e
    raise PreconditionError("missing edge during isomorphism extraction")


def _match_trees(g1, ch1, r1, p1, g2, ch2, r2, p2, vmap, emap):
    vmap[r1] = r2
    stack = [(r1, r2)]
    while stack:
        v1, v2 = stack.pop()
        kids1 = sorted(ch1[v1], key=lambda w: _code_of(g1, w, ch1, p1))
        kids2 = sorted(ch2[v2], key=lambda w: _code_of(g2, w, ch2, p2))
        for w1, w2 in zip(kids1, kids2):
            vmap[w1] = w2
            emap[_edge_between(g1, v1, w1)] = _edge_between(g2, v2, w2)
            stack.append((w1, w2))


def _match_component(g1, c1, p1, g2, c2, p2, vmap, emap):
    core1, child1 = _peel_to_core(g1, c1)
    core2, child2 = _peel_to_core(g2, c2)
    if not core1:
        ch1 = {}
        if p1 is not None and p1 in c1:
            centers1 = [p1]
        else:
            centers1 = _tree_center(g1, c1)
        best = None
        for c in centers1:
            ch = _tree_children(g1, c1, c)
            code = _code_of(g1, c, ch, p1)
            if best is None or code < best[0]:
                best = (code, c, ch)
        code, r1, ch1 = best
        if p2 is not None and p2 in c2:
            centers2 = [p2]
        else:
            centers2 = _tree_center(g2, c2)
        for c in centers2:
            ch2 = _tree_children(g2, c2, c)
            if _code_of(g2, c, ch2, p2) == code:
                _match_trees(g1, ch1, r1, p1, g2, ch2, c, p2, vmap, emap)
                return
        raise PreconditionError("tree components do not match")
    sig1 = {v: (g1.kinds[v], v == p1,
                tuple(sorted(_code_of(g1, w, child1, p1) for w in child1[v])))
            for v in core1}
    sig2 = {v: (g2.kinds[v], v == p2,
                tuple(sorted(_code_of(g2, w, child2, p2) for w in child2[v])))
            for v in core2}
    _, lab1 = _core_canon(g1, sorted(core1), sig1)
    _, lab2 = _core_canon(g2, sorted(core2), sig2)
    inv2 = {n: v for v, n in lab2.items()}
    for v in core1:
        vmap[v] = inv2[lab1[v]]
    buckets1: dict[tuple, list[int]] = {}
    buckets2: dict[tuple, list[int]] = {}
    for g, cset, lab, buckets in ((g1, set(core1), lab1, buckets1),
                                  (g2, set(core2), lab2, buckets2)):
        for e in sorted(g.edges):
            a, b = g.edges[e]
            if a in cset and b in cset:
                buckets.setdefault(tuple(sorted((lab[a], lab[b]))), []).append(e)
    for key, es1 in buckets1.items():
        for e1, e2 in zip(es1, buckets2[key]):
            emap[e1] = e2
    for v in sorted(core1):
        w = vmap[v]
        kids1 = sorted(child1[v], key=lambda x: _code_of(g1, x, child1, p1))
        kids2 = sorted(child2[w], key=lambda x: _code_of(g2, x, child2, p2))
        for k1, k2 in zip(kids1, kids2):
            vmap[k1] = k2
            emap[_edge_between(g1, v, k1)] = _edge_between(g2, w, k2)
            _match_trees(g1, child1, k1, p1, g2, child2, k2, p2, vmap, emap)


def iso_map(g1: CGraph, g2: CGraph, with_pointing: bool = True):
    """An explicit isomorphism (vmap, emap) from g1 onto g2, or None."""
    if not is_isomorphic(g1, g2, with_pointing):
        return None
    p1 = g1.pointing if with_pointing else None
    p2 = g2.pointing if with_pointing else None
    vmap: dict[int, int] = {}
    emap: dict[int, int] = {}
    comps1 = sorted(components(g1), key=lambda c: repr(_component_cert(g1, c, p1)))
    comps2 = sorted(components(g2), key=lambda c: repr(_component_cert(g2, c, p2)))
    for c1, c2 in zip(comps1, comps2):
        _match_component(g1, c1, p1, g2, c2, p2, vmap, emap)
    return vmap, emap

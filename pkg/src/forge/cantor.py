"""Automaton-presented nested pairs of compact totally disconnected spaces,
their clopen algebra, and the partition machinery that turns such a pair
into a pointed graph with matching end behaviour.

A pair spec is a finite pointed digraph: the big space is the set of
infinite state paths from the start, topologized by cylinders (finite path
prefixes).  A sub-automaton closed under "has an outgoing edge" carves out
the nested closed subspace.  All clopen-set questions (emptiness,
finiteness, singletons, meeting the subspace) reduce to reachability and
cycle analysis, so every partition manipulation below is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from . import cgraph as cg
from .cgraph import CGraph
from .errors import PreconditionError

INF = math.inf


# -- pair specs --------------------------------------------------------------

@dataclass(frozen=True)
class PairSpec:
    states: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    start: int
    k0_states: frozenset[int] = frozenset()
    k0_edges: frozenset[tuple[int, int]] = frozenset()

    @property
    def succ(self) -> dict[int, tuple[int, ...]]:
        return _succ_cached(self)

    def to_json(self) -> dict:
        return {"states": list(self.states),
                "edges": sorted([a, b] for a, b in self.edges),
                "start": self.start,
                "k0_states": sorted(self.k0_states),
                "k0_edges": sorted([a, b] for a, b in self.k0_edges)}

    @classmethod
    def from_json(cls, data: dict) -> "PairSpec":
        return cls(tuple(data["states"]),
                   frozenset((a, b) for a, b in data["edges"]),
                   data["start"],
                   frozenset(data.get("k0_states", ())),
                   frozenset((a, b) for a, b in data.get("k0_edges", ())))


@lru_cache(maxsize=1024)
def _succ_cached(spec: PairSpec) -> dict[int, tuple[int, ...]]:
    out: dict[int, list[int]] = {s: [] for s in spec.states}
    for a, b in sorted(spec.edges):
        if a in out:
            out[a].append(b)
    return {s: tuple(dict.fromkeys(ts)) for s, ts in out.items()}


def validate_pair_spec(spec: PairSpec) -> list[str]:
    out = []
    sset = set(spec.states)
    if len(spec.states) != len(sset):
        out.append("duplicate states")
    if spec.start not in sset:
        out.append("start is not a state")
        return out
    for a, b in spec.edges:
        if a not in sset or b not in sset:
            out.append(f"edge ({a},{b}) outside the state set")
    succ = spec.succ
    for s in spec.states:
        if not succ[s]:
            out.append(f"state {s} has no outgoing edge")
    reach = _reachable(succ, spec.start)
    for s in spec.states:
        if s not in reach:
            out.append(f"state {s} unreachable from start")
    if not spec.k0_states <= sset:
        out.append("k0 states outside the state set")
    for a, b in spec.k0_edges:
        if (a, b) not in spec.edges:
            out.append(f"k0 edge ({a},{b}) not an edge")
        if a not in spec.k0_states or b not in spec.k0_states:
            out.append(f"k0 edge ({a},{b}) leaves the k0 states")
    k0succ = {s: [t for t in succ.get(s, ()) if (s, t) in spec.k0_edges]
              for s in spec.k0_states}
    for s in spec.k0_states:
        if not k0succ[s]:
            out.append(f"k0 state {s} has no outgoing k0 edge")
    return out


def _reachable(succ, start) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        s = stack.pop()
        for t in succ.get(s, ()):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def trim_k0(states, edges, k0_states, k0_edges):
    """Drop k0 states without outgoing k0 edges until closure holds."""
    k0s = set(k0_states)
    k0e = {(a, b) for a, b in k0_edges if a in k0s and b in k0s}
    while True:
        dead = {s for s in k0s if not any(a == s for a, b in k0e)}
        if not dead:
            return frozenset(k0s), frozenset(k0e)
        k0s -= dead
        k0e = {(a, b) for a, b in k0e if a in k0s and b in k0s}


def ray_counts(spec: PairSpec) -> dict[int, float]:
    """Number of infinite paths out of each state, exactly (int or inf).

    Computed over the condensation: a strongly connected component with a
    cycle contributes one ray per state if it is an isolated simple cycle
    and infinitely many otherwise; counts then sum along the DAG.
    """
    succ = spec.succ
    sccs = _sccs(spec.states, succ)
    comp_of = {}
    for n, comp in enumerate(sccs):
        for s in comp:
            comp_of[s] = n
    counts: dict[int, float] = {}
    for comp in sccs:  # _sccs yields reverse topological order
        cyclic = len(comp) > 1 or any((s, s) in spec.edges for s in comp)
        if cyclic:
            simple = all(len([t for t in succ[s] if t in comp]) == 1 for s in comp)
            exits = any(t not in comp for s in comp for t in succ[s])
            val = 1 if (simple and not exits) else INF
            for s in comp:
                counts[s] = val
        else:
            s = comp[0]
            counts[s] = sum(counts[t] for t in succ[s])
    return counts


def _sccs(states, succ):
    """Tarjan, iterative; components come out in reverse topological order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on: set[int] = set()
    stack: list[int] = []
    out: list[tuple[int, ...]] = []
    counter = [0]
    for root in states:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(tuple(sorted(comp)))
    return out


# -- clopen sets --------------------------------------------------------------

@dataclass(frozen=True)
class ClopenSet:
    """Finite antichain of cylinders, kept in canonical (maximal) form.

    A cylinder is a state path starting at the spec's start state; distinct
    cylinders in the antichain denote disjoint basic clopen sets.
    """
    spec: PairSpec = field(compare=False)
    cyls: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cyls", _normalize(self.spec, self.cyls))

    def is_empty(self) -> bool:
        return not self.cyls

    def __bool__(self) -> bool:
        return bool(self.cyls)

    def __hash__(self):
        return hash(self.cyls)


def _children(spec: PairSpec, cyl: tuple[int, ...]):
    return [cyl + (t,) for t in spec.succ[cyl[-1]]]


def _normalize(spec: PairSpec, cyls) -> tuple[tuple[int, ...], ...]:
    cyls = sorted(set(cyls), key=lambda c: (len(c), c))
    kept: list[tuple[int, ...]] = []
    for c in cyls:
        if not any(c[:len(k)] == k for k in kept):
            kept.append(c)
    # merge complete sibling families upward
    merged = True
    current = set(kept)
    while merged:
        merged = False
        by_parent: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for c in current:
            if len(c) > 1:
                by_parent.setdefault(c[:-1], []).append(c)
        for parent, kids in by_parent.items():
            if sorted(kids) == sorted(_children(spec, parent)):
                current -= set(kids)
                current.add(parent)
                merged = True
    return tuple(sorted(current))


def whole_space(spec: PairSpec) -> ClopenSet:
    return ClopenSet(spec, ((spec.start,),))


def empty_set(spec: PairSpec) -> ClopenSet:
    return ClopenSet(spec, ())


def _same_spec(a: ClopenSet, b: ClopenSet):
    if a.spec != b.spec:
        raise PreconditionError("clopen sets over different pair specs")


def intersect(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    _same_spec(a, b)
    out = []
    for u in a.cyls:
        for v in b.cyls:
            if u[:len(v)] == v or v[:len(u)] == u:
                out.append(max(u, v, key=len))
    return ClopenSet(a.spec, tuple(out))


def _subtract_cyl(spec, u, v):
    """Cylinder u minus cylinder v, as a list of cylinders."""
    if v[:len(u)] == u and len(v) >= len(u):
        if u == v:
            return []
        out = []
        for child in _children(spec, u):
            out.extend(_subtract_cyl(spec, child, v))
        return out
    if u[:len(v)] == v:
        return []
    return [u]


def subtract(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    _same_spec(a, b)
    pieces = list(a.cyls)
    for v in b.cyls:
        nxt = []
        for u in pieces:
            nxt.extend(_subtract_cyl(a.spec, u, v))
        pieces = nxt
    return ClopenSet(a.spec, tuple(pieces))


def union(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    _same_spec(a, b)
    return ClopenSet(a.spec, a.cyls + b.cyls)


def union_all(spec: PairSpec, sets) -> ClopenSet:
    cyls: list[tuple[int, ...]] = []
    for s in sets:
        if s.spec != spec:
            raise PreconditionError("clopen sets over different pair specs")
        cyls.extend(s.cyls)
    return ClopenSet(spec, tuple(cyls))


def size(a: ClopenSet) -> float:
    counts = _counts_for(a.spec)
    return sum(counts[c[-1]] for c in a.cyls)


@lru_cache(maxsize=256)
def _counts_cached(spec: PairSpec):
    return ray_counts(spec)


def _counts_for(spec: PairSpec):
    return _counts_cached(spec)


def is_finite(a: ClopenSet) -> bool:
    return size(a) != INF


def is_singleton(a: ClopenSet) -> bool:
    return size(a) == 1


def meets_k0(a: ClopenSet) -> bool:
    """Whether the set contains a point of the nested subspace: some
    cylinder must be a path of the sub-automaton (closure then extends it)."""
    spec = a.spec
    for c in a.cyls:
        if all(s in spec.k0_states for s in c) and \
           all((c[i], c[i + 1]) in spec.k0_edges for i in range(len(c) - 1)):
            return True
    return False


def k0_nonempty(spec: PairSpec) -> bool:
    return meets_k0(whole_space(spec))


# -- splitting helpers --------------------------------------------------------

def _extend_until(a: ClopenSet, want_infinite: int) -> list[tuple[int, ...]]:
    """Refine the antichain until it holds >= want_infinite infinite cylinders
    (extending the first infinite cylinder repeatedly)."""
    counts = _counts_for(a.spec)
    cyls = sorted(a.cyls)
    budget = 1000 + 50 * len(a.spec.states)
    while sum(1 for c in cyls if counts[c[-1]] == INF) < want_infinite:
        budget -= 1
        if budget < 0:
            raise PreconditionError("set does not split into enough infinite pieces")
        try:
            first = next(c for c in cyls if counts[c[-1]] == INF)
        except StopIteration:
            raise PreconditionError("set too small to split")
        cyls.remove(first)
        cyls.extend(_children(a.spec, first))
        cyls.sort()
    return cyls


def split_infinite(a: ClopenSet) -> tuple[ClopenSet, ClopenSet]:
    """Two disjoint infinite clopen pieces with union a."""
    counts = _counts_for(a.spec)
    cyls = _extend_until(a, 2)
    inf_cyls = [c for c in cyls if counts[c[-1]] == INF]
    first = inf_cyls[0]
    rest = [c for c in cyls if c != first]
    return ClopenSet(a.spec, (first,)), ClopenSet(a.spec, tuple(rest))


def split_three(a: ClopenSet) -> tuple[ClopenSet, ClopenSet, ClopenSet]:
    counts = _counts_for(a.spec)
    cyls = _extend_until(a, 3)
    inf_cyls = [c for c in cyls if counts[c[-1]] == INF]
    c1, c2 = inf_cyls[0], inf_cyls[1]
    rest = [c for c in cyls if c != c1 and c != c2]
    return (ClopenSet(a.spec, (c1,)), ClopenSet(a.spec, (c2,)),
            ClopenSet(a.spec, tuple(rest)))


def split3(a: ClopenSet, n: int) -> list[list[ClopenSet]]:
    """Ternary refinement ladder: level 0 is [a], each next level splits
    every member into three infinite clopen pieces.  Needs ``a`` infinite
    with no isolated rays inside (true for sets avoiding the subspace when
    the pair satisfies the star condition)."""
    if is_finite(a):
        raise PreconditionError("cannot ternary-split a finite set")
    levels = [[a]]
    for _ in range(n):
        nxt: list[ClopenSet] = []
        for member in levels[-1]:
            nxt.extend(split_three(member))
        levels.append(nxt)
    return levels


def split_into_singletons(a: ClopenSet) -> list[ClopenSet]:
    """A finite clopen set as a list of singleton clopen sets."""
    counts = _counts_for(a.spec)
    if not is_finite(a):
        raise PreconditionError("set is infinite")
    cyls = list(a.cyls)
    done: list[tuple[int, ...]] = []
    while cyls:
        c = cyls.pop()
        if counts[c[-1]] == 1:
            done.append(c)
        else:
            cyls.extend(_children(a.spec, c))
    return [ClopenSet(a.spec, (c,)) for c in sorted(done)]


# -- star condition -----------------------------------------------------------

def isolated_region(spec: PairSpec) -> set[int]:
    """States with exactly one infinite continuation; a point is isolated
    precisely when its path enters this forward-closed region."""
    counts = ray_counts(spec)
    reach = _reachable(spec.succ, spec.start)
    return {s for s in reach if counts[s] == 1}


def condition_star(spec: PairSpec) -> bool:
    """Every isolated point of the big space lies in the nested subspace.

    An isolated point is a path through the deterministic-tail region; it
    lies in the subspace iff all its edges are sub-automaton edges.  So the
    condition fails exactly when some start-reachable non-sub edge can still
    reach the deterministic region.
    """
    succ = spec.succ
    counts = ray_counts(spec)
    reach = _reachable(succ, spec.start)
    region = {s for s in reach if counts[s] == 1}
    if not region:
        return True
    # states that can reach the region
    pred: dict[int, list[int]] = {s: [] for s in spec.states}
    for a, b in spec.edges:
        pred[b].append(a)
    can_reach = set(region)
    stack = list(region)
    while stack:
        s = stack.pop()
        for t in pred[s]:
            if t not in can_reach:
                can_reach.add(t)
                stack.append(t)
    for a, b in spec.edges:
        if a in reach and b in can_reach and (a, b) not in spec.k0_edges:
            return False
    return True


# -- partitions ---------------------------------------------------------------

@dataclass(frozen=True)
class PartitionSeq:
    spec: PairSpec
    floors: tuple[tuple[ClopenSet, ...], ...]
    checkpoints: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {"floors": [[list(map(list, a.cyls)) for a in floor]
                           for floor in self.floors],
                "checkpoints": list(self.checkpoints)}


def _sort_key(a: ClopenSet):
    return a.cyls


def is_partition(spec: PairSpec, parts) -> bool:
    parts = list(parts)
    if union_all(spec, parts) != whole_space(spec):
        return False
    for i, a in enumerate(parts):
        for b in parts[i + 1:]:
            if not intersect(a, b).is_empty():
                return False
    return True


def prefix_partition(spec: PairSpec, depth: int) -> list[ClopenSet]:
    """Partition of the whole space by path prefixes of the given length."""
    cyls = [(spec.start,)]
    for _ in range(depth):
        cyls = [c + (t,) for c in cyls for t in spec.succ[c[-1]]]
    return sorted((ClopenSet(spec, (c,)) for c in cyls), key=_sort_key)


def _odd_size_pieces(spec: PairSpec, big: ClopenSet, mu) -> list[ClopenSet]:
    """Intersect a block with the refining partition, subdivide so finite
    pieces are singletons and the piece count is odd."""
    pieces = []
    for b in mu:
        p = intersect(big, b)
        if p.is_empty():
            continue
        if is_finite(p) and not is_singleton(p):
            pieces.extend(split_into_singletons(p))
        else:
            pieces.append(p)
    if len(pieces) % 2 == 0:
        idx = next((n for n, p in enumerate(pieces) if not is_finite(p)), None)
        if idx is None:
            raise PreconditionError("all pieces finite with even count")
        half1, half2 = split_infinite(pieces[idx])
        pieces[idx:idx + 1] = [half1, half2]
    return sorted(pieces, key=_sort_key)


def partition_lemma(xi, mu, spec: PairSpec) -> list[list[ClopenSet]]:
    """Refine partition ``xi`` to dominate ``mu`` through a chain where each
    change is a ternary split and a block repeats on an adjacent floor
    exactly when it meets the nested subspace.

    Per block of ``xi`` the refining pieces are consumed two at a time from
    a tail set; whether a tail still meets the subspace decides if it is
    held for one repeat floor before splitting.  Blocks that stop early are
    continued to the common horizon: subspace-meeting blocks ride along
    unchanged, the rest (automatically perfect, by the star condition) go
    through ternary splitting.  Finite blocks of the result are singletons,
    so the output can seed the next round.
    """
    xi = sorted(xi, key=_sort_key)
    mu = sorted(mu, key=_sort_key)
    if not is_partition(spec, xi) or not is_partition(spec, mu):
        raise PreconditionError("inputs are not partitions")
    for a in xi:
        if is_finite(a) and not is_singleton(a):
            raise PreconditionError("finite blocks of the partition must be singletons")
    if not condition_star(spec):
        raise PreconditionError("pair fails the star condition")
    if refines(spec, mu, xi) and not any(meets_k0(a) for a in xi):
        return [list(xi)]

    families: list[list[list[ClopenSet]]] = []
    for big in xi:
        pieces = _odd_size_pieces(spec, big, mu)
        floors: list[list[ClopenSet]] = [[big]]
        if len(pieces) > 1:
            for i in range(0, len(pieces) - 2, 2):
                tail = union_all(spec, pieces[i:])
                split_floor = [pieces[i], pieces[i + 1], union_all(spec, pieces[i + 2:])]
                if meets_k0(tail):
                    floors.append([tail])
                floors.append(split_floor)
        families.append(floors)

    horizon = max(len(f) for f in families)  # floors 0..horizon-1, plus one more
    eta: list[list[ClopenSet]] = [[] for _ in range(horizon)]
    for floors in families:
        for i, level in enumerate(floors):
            eta[i].extend(level)

    # blocks that stop: last floor on which they appear, nothing below refines them
    stops: list[tuple[ClopenSet, int]] = []
    seen: set[ClopenSet] = set()
    for i in range(horizon - 1, -1, -1):
        below = eta[i + 1] if i + 1 < horizon else []
        hat_below = union_all(spec, below) if below else empty_set(spec)
        for blk in eta[i]:
            if blk in seen:
                continue
            if intersect(blk, hat_below).is_empty():
                stops.append((blk, i))
                seen.add(blk)

    out: list[list[ClopenSet]] = [list(level) for level in eta] + [[]]
    top = horizon  # index of the extra floor
    for blk, o in sorted(stops, key=lambda t: (_sort_key(t[0]), t[1])):
        if meets_k0(blk):
            for j in range(o + 1, top + 1):
                out[j].append(blk)
        else:
            ladder = split3(blk, top - o)
            for k in range(1, top - o + 1):
                out[o + k].extend(ladder[k])
    return [sorted(level, key=_sort_key) for level in out]


def adapted_sequence(spec: PairSpec, horizon: int, four_start: bool = False) -> PartitionSeq:
    """Nested clopen partitions separating points, with ternary splits and
    subspace-synchronized repeats, refining the depth-n prefix partitions at
    recorded checkpoint floors.

    Fails on pairs with isolated points outside the subspace (not
    realizable) and on finite spaces.
    """
    if not condition_star(spec):
        raise PreconditionError("pair not realizable: star condition fails")
    whole = whole_space(spec)
    if is_finite(whole):
        raise PreconditionError("the big space must be infinite")
    floors: list[list[ClopenSet]] = [[whole]]
    a, b = split_infinite(whole)
    if four_start:
        a1, a2 = split_infinite(a)
        b1, b2 = split_infinite(b)
        current = sorted([a1, a2, b1, b2], key=_sort_key)
    else:
        current = sorted([a, b], key=_sort_key)
    floors.append(current)
    checkpoints = []
    for n in range(1, horizon + 1):
        mu = prefix_partition(spec, n)
        chain = partition_lemma(current, mu, spec)
        floors.extend(chain[1:])
        current = chain[-1]
        checkpoints.append(len(floors) - 1)
    return PartitionSeq(spec, tuple(tuple(level) for level in floors),
                        tuple(checkpoints))


def refines(spec: PairSpec, coarse, fine) -> bool:
    """Every fine block is contained in a coarse block."""
    for b in fine:
        if not any(subtract(b, a).is_empty() for a in coarse):
            return False
    return True


# -- audits -------------------------------------------------------------------

def audit_partition_floors(floors, spec: PairSpec, start_rule: str | None = None) -> list[str]:
    """Symbolic audit of a partition chain.

    Checks exact cover and disjointness per floor, refinement between
    floors, the ternary-split rule for blocks that change, and the
    subspace rule: a block meets the nested subspace iff it appears on an
    adjacent floor.  ``start_rule='adapted'`` additionally checks the floor
    sizes #floor0 = 1, #floor1 in {2,4} and the bound 4*3^(i-1); the
    subspace rule is then enforced from floor 1 on.
    """
    out = []
    for i, level in enumerate(floors):
        if not is_partition(spec, list(level)):
            out.append(f"floor {i}: not a partition")
        if len(set(level)) != len(level):
            out.append(f"floor {i}: repeated blocks")
    for i in range(len(floors) - 1):
        if not refines(spec, list(floors[i]), list(floors[i + 1])):
            out.append(f"floor {i + 1}: does not refine floor {i}")
    first_split = 1 if start_rule == "adapted" else 0
    for i in range(len(floors) - 1):
        nxt = set(floors[i + 1])
        for blk in floors[i]:
            if blk in nxt:
                continue
            parts = [b for b in floors[i + 1] if not intersect(blk, b).is_empty()]
            bad = (len(parts) != 3 or
                   union_all(spec, parts) != blk or
                   any(not subtract(p, blk).is_empty() for p in parts))
            if bad and i >= first_split:
                out.append(f"floor {i}: block not split into three pieces")
    lo = 1 if start_rule == "adapted" else 0
    for i in range(lo, len(floors)):
        prev = set(floors[i - 1]) if i > 0 else set()
        nxt = set(floors[i + 1]) if i + 1 < len(floors) else set()
        for blk in floors[i]:
            repeats = blk in prev or blk in nxt
            if meets_k0(blk) != repeats:
                out.append(f"floor {i}: subspace rule fails for a block "
                           f"(meets={meets_k0(blk)}, repeats={repeats})")
    if start_rule == "adapted":
        if len(floors[0]) != 1:
            out.append("floor 0 is not the whole space")
        if len(floors) > 1 and len(floors[1]) not in (2, 4):
            out.append("floor 1 must have 2 or 4 blocks")
        for i in range(1, len(floors)):
            if len(floors[i]) > 4 * 3 ** (i - 1):
                out.append(f"floor {i}: size bound 4*3^(i-1) exceeded")
    return out


def audit_partition_lemma(chain, xi, mu, spec: PairSpec) -> list[str]:
    """Audit for a single refinement round: chain rules plus endpoints."""
    out = audit_partition_floors(chain, spec)
    if sorted(chain[0], key=_sort_key) != sorted(xi, key=_sort_key):
        out.append("chain does not start at the given partition")
    if not refines(spec, list(mu), list(chain[-1])):
        out.append("final floor does not refine the target partition")
    for blk in chain[-1]:
        if is_finite(blk) and not is_singleton(blk):
            out.append("finite block of the final floor is not a singleton")
    return out


def audit_adapted(seq: PartitionSeq, spec: PairSpec, depths=None) -> list[str]:
    out = audit_partition_floors(list(seq.floors), spec, start_rule="adapted")
    for n, k in enumerate(seq.checkpoints, start=1):
        mu = prefix_partition(spec, n)
        if not refines(spec, mu, list(seq.floors[k])):
            out.append(f"checkpoint {k}: prefix partition of depth {n} not refined")
    return out


# -- the graph of a partition sequence ---------------------------------------

def build_gxi(seq: PartitionSeq, depth: int):
    """Pointed graph of the containment tree of a partition sequence.

    Nodes are the blocks of floors 0..depth-1 plus a boundary stub for each
    floor-``depth`` block; block containment gives the tree edges, each
    subdivided by a b2 vertex at its midpoint.  Two-valent interior nodes
    (repeat blocks) become h2 vertices, four-valent ones become s4, the
    floor-0 node is the pointing.  Returns (graph, node_info) where
    node_info maps interior vertex ids to (floor, block).
    """
    if depth < 1 or depth >= len(seq.floors):
        raise PreconditionError("depth out of range")
    spec = seq.spec
    kinds: dict[int, str] = {}
    edges: dict[int, tuple[int, int]] = {}
    node_info: dict[int, tuple[int, ClopenSet]] = {}
    ids: dict[tuple[int, int], int] = {}
    nxt_v = 0
    nxt_e = 0
    for i in range(depth):
        for n, blk in enumerate(seq.floors[i]):
            ids[(i, n)] = nxt_v
            node_info[nxt_v] = (i, blk)
            kinds[nxt_v] = "?"
            nxt_v += 1
    child_count = {v: 0 for v in node_info}

    def parent_index(i, blk):
        for m, parent in enumerate(seq.floors[i - 1]):
            if not intersect(parent, blk).is_empty():
                return m
        raise PreconditionError("block has no parent")

    for i in range(1, depth + 1):
        for n, blk in enumerate(seq.floors[i]):
            m = parent_index(i, blk)
            up = ids[(i - 1, m)]
            child_count[up] += 1
            mid = nxt_v
            nxt_v += 1
            if i == depth:
                kinds[mid] = cg.B1
                node_info[mid] = (i, blk)
            else:
                kinds[mid] = cg.B2
            edges[nxt_e] = (up, mid)
            nxt_e += 1
            if i < depth:
                down = ids[(i, n)]
                edges[nxt_e] = (mid, down)
                nxt_e += 1
    for v, (i, blk) in node_info.items():
        if kinds[v] != "?":
            continue
        val = child_count[v] + (0 if i == 0 else 1)
        if val == 2:
            kinds[v] = cg.H2
        elif val == 4:
            kinds[v] = cg.S4
        else:
            raise PreconditionError(f"tree node of valency {val}; sequence not adapted")
    g = CGraph(kinds, edges, pointing=ids[(0, 0)])
    return g, node_info


def ends_match_audit(seq: PartitionSeq, spec: PairSpec, depth: int) -> list[str]:
    """Check the block/cone correspondence of the built graph at finite depth.

    Interior nodes must be h2 exactly when their block repeats on the next
    floor; a block meets the nested subspace iff its node touches a repeat
    edge; below a subspace-avoiding block every interior node is 4-valent;
    boundary stubs biject with the blocks of the last floor.
    """
    g, node_info = build_gxi(seq, depth)
    out = []
    interior = {v: fi for v, fi in node_info.items() if g.kinds[v] != cg.B1}
    stubs = {v: fi for v, fi in node_info.items() if g.kinds[v] == cg.B1}
    floors = seq.floors
    for v, (i, blk) in interior.items():
        if i == 0:
            continue
        repeat_up = blk in set(floors[i + 1])
        if (g.kinds[v] == cg.H2) != repeat_up:
            out.append(f"node {v}: h2 flag does not match block repetition")
        repeat_any = repeat_up or blk in set(floors[i - 1])
        if meets_k0(blk) != repeat_any:
            out.append(f"node {v}: subspace membership does not match repeats")
    by_block: dict[tuple[int, ClopenSet], int] = {}
    for v, (i, blk) in interior.items():
        by_block[(i, blk)] = v
    for v, (i, blk) in interior.items():
        if meets_k0(blk) or i == 0:
            continue
        for j in range(i + 1, depth - 1):
            for w, (jj, sub) in interior.items():
                if jj == j and not intersect(sub, blk).is_empty():
                    if g.kinds[w] != cg.S4:
                        out.append(f"node {w}: expected 4-valent below a "
                                   f"subspace-avoiding block")
    if len(stubs) != len(floors[depth]):
        out.append("boundary stubs do not match the last floor")
    if sorted(blk.cyls for _, blk in stubs.values()) != \
       sorted(b.cyls for b in floors[depth]):
        out.append("stub blocks do not biject with the last floor")
    return out


# -- graphs with finitely many ends -------------------------------------------

def finite_ends_graph(k: int, depth: int) -> CGraph:
    """Pointed graph with exactly k ends, truncated to radius 2*depth+1.

    Even k: a two-ended chain of h2 vertices with (k-2)/2 tridents (an s4
    with three rays) substituted along one side.  Odd k: one end is carried
    by a chain of h4 vertices attached in parallel pairs; k=1 caps the chain
    with an h2, larger odd k cap it with an s4 feeding rays and tridents.
    All ends are accumulated by homology vertices.
    """
    if k < 1:
        raise PreconditionError("need at least one end")
    radius = 2 * depth + 1
    kinds: dict[int, str] = {}
    edges: dict[int, tuple[int, int]] = {}
    counter = [0, 0]

    def new_vertex(kind):
        v = counter[0]
        counter[0] += 1
        kinds[v] = kind
        return v

    def new_edge(a, b):
        e = counter[1]
        counter[1] += 1
        edges[e] = (a, b)

    if k % 2 == 0:
        subs = (k - 2) // 2
        root = new_vertex(cg.H2)
        plans = [(root, 0, "ray"), (root, 0, ("spine", 1))]
    elif k == 1:
        subs = 0
        root = new_vertex(cg.H2)
        plans = [(root, 0, "chainpair")]
    else:
        subs = (k - 3) // 2
        root = new_vertex(cg.S4)
        plans = [(root, 0, "ray"), (root, 0, ("spine", 1)), (root, 0, "chainpair")]

    queue = list(plans)
    while queue:
        center, dist, plan = queue.pop(0)
        b_dist = dist + 1
        if plan == "chainpair":
            if b_dist >= radius:
                for _ in range(2):
                    new_edge(center, new_vertex(cg.B1))
                continue
            b_1 = new_vertex(cg.B2)
            b_2 = new_vertex(cg.B2)
            new_edge(center, b_1)
            new_edge(center, b_2)
            h = new_vertex(cg.H4)
            new_edge(b_1, h)
            new_edge(b_2, h)
            queue.append((h, b_dist + 1, "chainpair"))
            continue
        if b_dist >= radius:
            new_edge(center, new_vertex(cg.B1))
            continue
        b = new_vertex(cg.B2)
        new_edge(center, b)
        if plan == "ray" or (isinstance(plan, tuple) and plan[1] > subs):
            nxt = new_vertex(cg.H2)
            new_edge(b, nxt)
            queue.append((nxt, b_dist + 1, "ray"))
        else:
            j = plan[1]
            s = new_vertex(cg.S4)
            new_edge(b, s)
            queue.append((s, b_dist + 1, "ray"))
            queue.append((s, b_dist + 1, "ray"))
            queue.append((s, b_dist + 1, ("spine", j + 1)))

    return CGraph(kinds, edges, pointing=0)

"""Independent oracles used by the tests: spanning-forest cycle rank,
truncated path counting for pair specs, and a depth-limited star-condition
check built on the counting."""

BIG = 1 << 30


def spanning_forest_betti(g):
    """Cycle rank as the number of edges left over by a spanning forest."""
    seen = set()
    used = 0
    for root in sorted(g.kinds):
        if root in seen:
            continue
        seen.add(root)
        stack = [root]
        while stack:
            v = stack.pop()
            for e in g.incidence[v]:
                w = g.other_end(e, v)
                if w not in seen:
                    seen.add(w)
                    used += 1
                    stack.append(w)
    return len(g.edges) - used


def path_counts(spec, depth):
    """Number of length-``depth`` paths out of each state, capped."""
    counts = {s: 1 for s in spec.states}
    for _ in range(depth):
        counts = {s: min(BIG, sum(counts[t] for t in spec.succ[s]))
                  for s in spec.states}
    return counts


def clopen_size_truncated(a, depth):
    """Number of depth-``depth`` path prefixes inside the clopen set."""
    counts = path_counts(a.spec, depth)
    total = 0
    for c in a.cyls:
        rem = depth - (len(c) - 1)
        if rem <= 0:
            total += 1
        else:
            total = min(BIG, total + path_counts(a.spec, rem)[c[-1]])
    return total


def star_condition_oracle(spec, depth=12):
    """Depth-limited check that isolated points stay inside the subspace.

    Isolation is certified by a unique depth-``depth`` continuation; the
    walk tracks whether a non-subspace edge has been used on the way.
    Exact for specs with fewer states than ``depth``.
    """
    counts = path_counts(spec, depth)
    seen = set()
    stack = [(spec.start, False)]
    while stack:
        s, dirty = stack.pop()
        if (s, dirty) in seen:
            continue
        seen.add((s, dirty))
        if counts[s] == 1 and dirty:
            return False
        for t in spec.succ[s]:
            stack.append((t, dirty or (s, t) not in spec.k0_edges))
    return True


def bfs_ball_vertices(g, center, radius):
    """Plain breadth-first ball, independent of the library's metric code."""
    from collections import deque
    dist = {center: 0}
    queue = deque([center])
    while queue:
        v = queue.popleft()
        if dist[v] == radius:
            continue
        for e in g.incidence[v]:
            w = g.other_end(e, v)
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return set(dist)

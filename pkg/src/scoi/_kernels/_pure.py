"""Pure-Python flow kernels.

Same contract as the compiled kernel in ``_core.pyx``: unit-capacity
directed graphs in forward-star form, paired residual arcs (arc ``a`` and
``a ^ 1`` are mutual reverses), augmentation order fixed by arc id so both
backends produce identical flows.
"""
from heapq import heappop, heappush

_INF = 1 << 60


def max_flow(n_vertices, adj_start, adj_arc, arc_head, enabled, s, t, residual):
    """Dinic blocking-flow max flow. Mutates ``residual``; returns the value."""
    level = [-1] * n_vertices
    cursor = [0] * n_vertices
    total = 0
    while True:
        for i in range(n_vertices):
            level[i] = -1
        level[s] = 0
        queue = [s]
        qi = 0
        while qi < len(queue):
            v = queue[qi]
            qi += 1
            for idx in range(adj_start[v], adj_start[v + 1]):
                a = adj_arc[idx]
                if residual[a] and enabled[a]:
                    w = arc_head[a]
                    if level[w] < 0:
                        level[w] = level[v] + 1
                        queue.append(w)
        if level[t] < 0:
            return total
        for i in range(n_vertices):
            cursor[i] = adj_start[i]
        path = []
        v = s
        while True:
            if v == t:
                for a in path:
                    residual[a] -= 1
                    residual[a ^ 1] += 1
                total += 1
                path.clear()
                v = s
                continue
            advanced = False
            while cursor[v] < adj_start[v + 1]:
                a = adj_arc[cursor[v]]
                if residual[a] and enabled[a]:
                    w = arc_head[a]
                    if level[w] == level[v] + 1:
                        path.append(a)
                        v = w
                        advanced = True
                        break
                cursor[v] += 1
            if advanced:
                continue
            if v == s:
                break
            level[v] = -1  # dead end for this phase
            a = path.pop()
            v = arc_head[a ^ 1]
            cursor[v] += 1


def min_cost_max_flow(
    n_vertices, adj_start, adj_arc, arc_head, arc_cost, enabled, s, t, residual
):
    """Successive shortest augmenting paths with vertex potentials.

    Requires nonnegative arc costs. Mutates ``residual``; returns
    ``(flow_value, total_cost)``.
    """
    potential = [0] * n_vertices
    dist = [0] * n_vertices
    parent = [0] * n_vertices
    total_flow = 0
    total_cost = 0
    while True:
        for i in range(n_vertices):
            dist[i] = _INF
            parent[i] = -1
        dist[s] = 0
        heap = [(0, s)]
        while heap:
            d, v = heappop(heap)
            if d > dist[v]:
                continue
            pv = potential[v]
            for idx in range(adj_start[v], adj_start[v + 1]):
                a = adj_arc[idx]
                if residual[a] and enabled[a]:
                    w = arc_head[a]
                    nd = d + arc_cost[a] + pv - potential[w]
                    if nd < dist[w]:
                        dist[w] = nd
                        parent[w] = a
                        heappush(heap, (nd, w))
        if dist[t] >= _INF:
            return total_flow, total_cost
        dt = dist[t]
        for v in range(n_vertices):
            potential[v] += dist[v] if dist[v] < dt else dt
        v = t
        while v != s:
            a = parent[v]
            residual[a] -= 1
            residual[a ^ 1] += 1
            total_cost += arc_cost[a]
            v = arc_head[a ^ 1]
        total_flow += 1

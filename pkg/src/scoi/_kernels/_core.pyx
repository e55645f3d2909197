# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled flow kernels.

Mirrors ``_pure.py`` operation for operation: same traversal order, same
tie-breaking, byte-identical residual arrays on identical inputs.
"""
from libc.stdlib cimport free, malloc

cdef long long _INF = <long long>1 << 60


cdef inline void _fail_alloc() except *:
    raise MemoryError("kernel workspace allocation failed")


def max_flow(
    int n_vertices,
    int[:] adj_start,
    int[:] adj_arc,
    int[:] arc_head,
    unsigned char[:] enabled,
    int s,
    int t,
    unsigned char[:] residual,
):
    """Dinic blocking-flow max flow. Mutates ``residual``; returns the value."""
    cdef int *level = <int *> malloc(n_vertices * sizeof(int))
    cdef int *cursor = <int *> malloc(n_vertices * sizeof(int))
    cdef int *queue = <int *> malloc(n_vertices * sizeof(int))
    cdef int *path = <int *> malloc(n_vertices * sizeof(int))
    if level == NULL or cursor == NULL or queue == NULL or path == NULL:
        free(level); free(cursor); free(queue); free(path)
        _fail_alloc()
    cdef int total = 0, qi, qn, v, w, a, idx, depth
    cdef bint advanced
    try:
        while True:
            for v in range(n_vertices):
                level[v] = -1
            level[s] = 0
            queue[0] = s
            qi = 0
            qn = 1
            while qi < qn:
                v = queue[qi]
                qi += 1
                for idx in range(adj_start[v], adj_start[v + 1]):
                    a = adj_arc[idx]
                    if residual[a] and enabled[a]:
                        w = arc_head[a]
                        if level[w] < 0:
                            level[w] = level[v] + 1
                            queue[qn] = w
                            qn += 1
            if level[t] < 0:
                return total
            for v in range(n_vertices):
                cursor[v] = adj_start[v]
            depth = 0
            v = s
            while True:
                if v == t:
                    for idx in range(depth):
                        a = path[idx]
                        residual[a] -= 1
                        residual[a ^ 1] += 1
                    total += 1
                    depth = 0
                    v = s
                    continue
                advanced = False
                while cursor[v] < adj_start[v + 1]:
                    a = adj_arc[cursor[v]]
                    if residual[a] and enabled[a]:
                        w = arc_head[a]
                        if level[w] == level[v] + 1:
                            path[depth] = a
                            depth += 1
                            v = w
                            advanced = True
                            break
                    cursor[v] += 1
                if advanced:
                    continue
                if v == s:
                    break
                level[v] = -1
                depth -= 1
                a = path[depth]
                v = arc_head[a ^ 1]
                cursor[v] += 1
    finally:
        free(level); free(cursor); free(queue); free(path)


def min_cost_max_flow(
    int n_vertices,
    int[:] adj_start,
    int[:] adj_arc,
    int[:] arc_head,
    long long[:] arc_cost,
    unsigned char[:] enabled,
    int s,
    int t,
    unsigned char[:] residual,
):
    """Successive shortest augmenting paths with vertex potentials.

    Requires nonnegative arc costs. Mutates ``residual``; returns
    ``(flow_value, total_cost)``.
    """
    # Heap keys encode (dist, vertex) as dist * key_base + vertex so that the
    # pop order matches the pure backend's (dist, vertex) tuples exactly.
    cdef long long key_base = 1
    while key_base < n_vertices:
        key_base <<= 1
    cdef long long *dist = <long long *> malloc(n_vertices * sizeof(long long))
    cdef long long *potential = <long long *> malloc(n_vertices * sizeof(long long))
    cdef int *parent = <int *> malloc(n_vertices * sizeof(int))
    cdef long long *heap = NULL
    cdef size_t heap_cap = 64
    heap = <long long *> malloc(heap_cap * sizeof(long long))
    if dist == NULL or potential == NULL or parent == NULL or heap == NULL:
        free(dist); free(potential); free(parent); free(heap)
        _fail_alloc()
    cdef size_t heap_len, pos, child
    cdef long long key, d, nd, dt, total_cost = 0
    cdef int total_flow = 0, v, w, a, idx
    cdef long long *new_heap
    try:
        for v in range(n_vertices):
            potential[v] = 0
        while True:
            for v in range(n_vertices):
                dist[v] = _INF
                parent[v] = -1
            dist[s] = 0
            heap[0] = <long long> s
            heap_len = 1
            while heap_len > 0:
                key = heap[0]
                heap_len -= 1
                heap[0] = heap[heap_len]
                pos = 0
                while True:
                    child = 2 * pos + 1
                    if child >= heap_len:
                        break
                    if child + 1 < heap_len and heap[child + 1] < heap[child]:
                        child += 1
                    if heap[child] < heap[pos]:
                        heap[pos] = heap[child] ^ heap[pos]
                        heap[child] = heap[child] ^ heap[pos]
                        heap[pos] = heap[child] ^ heap[pos]
                        pos = child
                    else:
                        break
                v = <int> (key % key_base)
                d = key / key_base
                if d > dist[v]:
                    continue
                for idx in range(adj_start[v], adj_start[v + 1]):
                    a = adj_arc[idx]
                    if residual[a] and enabled[a]:
                        w = arc_head[a]
                        nd = d + arc_cost[a] + potential[v] - potential[w]
                        if nd < dist[w]:
                            dist[w] = nd
                            parent[w] = a
                            if heap_len == heap_cap:
                                heap_cap *= 2
                                new_heap = <long long *> malloc(
                                    heap_cap * sizeof(long long)
                                )
                                if new_heap == NULL:
                                    _fail_alloc()
                                for pos in range(heap_len):
                                    new_heap[pos] = heap[pos]
                                free(heap)
                                heap = new_heap
                            pos = heap_len
                            heap[pos] = nd * key_base + w
                            heap_len += 1
                            while pos > 0 and heap[(pos - 1) // 2] > heap[pos]:
                                key = heap[pos]
                                heap[pos] = heap[(pos - 1) // 2]
                                heap[(pos - 1) // 2] = key
                                pos = (pos - 1) // 2
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
    finally:
        free(dist); free(potential); free(parent); free(heap)

"""Layer-unrolled dynamic graph and its vertex-split unit-capacity network.

The l-layer unrolling has one copy of every input and state node per layer;
state-to-state edges drop one layer, input-to-state edges stay inside a
layer, so every path from an input copy at layer k ends at a layer-1 state
after exactly k edges. Linkings (vertex-disjoint path sets from input
copies to layer-1 states) carry a permutation sign and a multiset of edge
parameters; both enter the determinant expansion of controllability-matrix
minors.

The flow network splits every copy into an in/out pair joined by a
unit-capacity arc, charges the layer index on input split arcs and zero
elsewhere, and wires a source to every input copy and every layer-1 state
to a sink. Vertex splitting makes integral flows decompose into
vertex-disjoint paths.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import SizeCapError, ValidationError
from .pattern import ParamKey, StructuredSystem

# Hard guard for exhaustive linking enumeration: total dynamic-graph copies.
MAX_ENUMERATION_VERTICES = 48

ARC_SPLIT_U = 0
ARC_SPLIT_X = 1
ARC_EDGE = 2
ARC_SOURCE = 3
ARC_SINK = 4


@dataclass(frozen=True)
class DynamicGraph:
    """The l-layer unrolling of a system (immutable; vertices are ints).

    Vertex ids are layer-major with inputs before states, so id order is
    exactly the (layer, kind, index) order used for linking signs.
    """

    n: int
    m: int
    l: int
    edges: tuple[tuple[int, int, ParamKey], ...]

    @property
    def vertex_count(self) -> int:
        return (self.n + self.m) * self.l

    def input_copy(self, j: int, k: int) -> int:
        """Vertex id of u_{j+1} at layer k (j is 0-based, k is 1-based)."""
        return (k - 1) * (self.m + self.n) + j

    def state_copy(self, i: int, k: int) -> int:
        return (k - 1) * (self.m + self.n) + self.m + i

    def describe(self, v: int) -> tuple[str, int, int]:
        """Return (kind, index, layer) for a vertex id, 0-based index."""
        k, r = divmod(v, self.m + self.n)
        if r < self.m:
            return ("u", r, k + 1)
        return ("x", r - self.m, k + 1)

    def vertex_name(self, v: int) -> str:
        kind, idx, layer = self.describe(v)
        return f"{kind}{idx + 1}^{layer}"

    def input_copies(self) -> list[int]:
        return [self.input_copy(j, k) for k in range(1, self.l + 1) for j in range(self.m)]

    def first_layer_states(self) -> list[int]:
        return [self.state_copy(i, 1) for i in range(self.n)]

    def successors(self) -> dict[int, list[tuple[int, ParamKey]]]:
        succ: dict[int, list[tuple[int, ParamKey]]] = {}
        for src, dst, label in self.edges:
            succ.setdefault(src, []).append((dst, label))
        return succ


def build_dynamic_graph(sys: StructuredSystem, l: int) -> DynamicGraph:
    """Unroll the system over l layers (1 <= l <= n)."""
    n, m = sys.n, sys.m
    if not (1 <= l <= n):
        raise ValidationError(f"layer count must satisfy 1 <= l <= n={n}, got {l}")
    dg = DynamicGraph(n=n, m=m, l=l, edges=())
    edges: list[tuple[int, int, ParamKey]] = []
    a_entries = sys.a.sorted_entries()
    b_entries = sys.b.sorted_entries()
    for k in range(1, l):
        # A[i][j] != 0 gives the edge x_j^{k+1} -> x_i^k.
        for i, j in a_entries:
            edges.append((dg.state_copy(j, k + 1), dg.state_copy(i, k), ("a", i, j)))
    for k in range(1, l + 1):
        for i, j in b_entries:
            edges.append((dg.input_copy(j, k), dg.state_copy(i, k), ("b", i, j)))
    return DynamicGraph(n=n, m=m, l=l, edges=tuple(edges))


@dataclass(frozen=True)
class Linking:
    """Vertex-disjoint paths from input copies to layer-1 states.

    Paths are vertex-id tuples within a dynamic graph. The sign is the
    parity of the tail permutation once tails and heads are each sorted by
    vertex id; the weight is the sorted multiset of edge parameters.
    """

    paths: tuple[tuple[int, ...], ...]
    tails: tuple[int, ...]
    heads: tuple[int, ...]
    sign: int
    weight: tuple[ParamKey, ...]

    @property
    def size(self) -> int:
        return len(self.paths)


def _permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def make_linking(dg: DynamicGraph, paths: Sequence[Sequence[int]]) -> Linking:
    """Assemble a Linking (sign, weight) from vertex-id paths; validates
    disjointness and endpoints."""
    label_of = {(src, dst): lab for src, dst, lab in dg.edges}
    seen: set[int] = set()
    labels: list[ParamKey] = []
    ends: list[tuple[int, int]] = []
    for path in paths:
        if dg.describe(path[0])[0] != "u":
            raise ValidationError("linking path must start at an input copy")
        kind_end, _, layer_end = dg.describe(path[-1])
        if kind_end != "x" or layer_end != 1:
            raise ValidationError("linking path must end at a layer-1 state copy")
        for v in path:
            if v in seen:
                raise ValidationError("linking paths must be vertex-disjoint")
            seen.add(v)
        for a, b in zip(path, path[1:]):
            labels.append(label_of[(a, b)])
        ends.append((path[0], path[-1]))

    order = sorted(range(len(paths)), key=lambda idx: ends[idx][1])  # by head
    tails_sorted = sorted(e[0] for e in ends)
    tail_rank = {v: r for r, v in enumerate(tails_sorted)}
    perm = [tail_rank[ends[idx][0]] for idx in order]
    return Linking(
        paths=tuple(tuple(p) for p in paths),
        tails=tuple(tails_sorted),
        heads=tuple(sorted(e[1] for e in ends)),
        sign=_permutation_sign(perm),
        weight=tuple(sorted(labels)),
    )


def _paths_from(dg, succ, start) -> list[tuple[int, ...]]:
    """All paths from an input copy down to layer 1 (layers strictly descend
    after the first hop, so every such walk is simple)."""
    out: list[tuple[int, ...]] = []
    stack: list[tuple[int, ...]] = [(start,)]
    while stack:
        path = stack.pop()
        v = path[-1]
        kind, _, layer = dg.describe(v)
        if kind == "x" and layer == 1:
            out.append(path)
            continue
        for w, _lab in succ.get(v, ()):
            stack.append(path + (w,))
    return sorted(out)


def enumerate_linkings(
    dg: DynamicGraph,
    size: int,
    tails: Sequence[int] | None = None,
    heads: Sequence[int] | None = None,
    vertex_cap: int = MAX_ENUMERATION_VERTICES,
) -> Iterator[Linking]:
    """Yield every linking of exactly ``size`` paths from input copies to
    layer-1 states, optionally with prescribed tail/head sets.

    Exhaustive; refuses instances above ``vertex_cap`` dynamic vertices.
    """
    if size < 1:
        raise ValidationError(f"linking size must be >= 1, got {size}")
    if dg.vertex_count > vertex_cap:
        raise SizeCapError(
            f"{dg.vertex_count} dynamic vertices exceed the enumeration cap {vertex_cap}"
        )
    tail_set = None if tails is None else frozenset(tails)
    head_set = None if heads is None else frozenset(heads)
    if tail_set is not None and len(tail_set) != size:
        raise ValidationError("tail set size must equal the linking size")
    if head_set is not None and len(head_set) != size:
        raise ValidationError("head set size must equal the linking size")

    succ = dg.successors()
    candidates: list[tuple[int, ...]] = []
    for start in dg.input_copies():
        if tail_set is not None and start not in tail_set:
            continue
        for path in _paths_from(dg, succ, start):
            if head_set is not None and path[-1] not in head_set:
                continue
            candidates.append(path)
    # Group candidate paths by tail so each tail is used at most once.
    by_tail: dict[int, list[tuple[int, ...]]] = {}
    for path in candidates:
        by_tail.setdefault(path[0], []).append(path)
    tail_order = sorted(by_tail)

    def recurse(tail_idx: int, chosen: list[tuple[int, ...]], used: set[int]):
        if len(chosen) == size:
            yield make_linking(dg, list(chosen))
            return
        if tail_idx >= len(tail_order):
            return
        remaining_tails = len(tail_order) - tail_idx
        if len(chosen) + remaining_tails < size:
            return
        tail = tail_order[tail_idx]
        # Either skip this tail entirely (unless it is prescribed) ...
        if tail_set is None:
            yield from recurse(tail_idx + 1, chosen, used)
        # ... or extend with one of its vertex-disjoint paths.
        for path in by_tail[tail]:
            if any(v in used for v in path):
                continue
            used.update(path)
            chosen.append(path)
            yield from recurse(tail_idx + 1, chosen, used)
            chosen.pop()
            used.difference_update(path)

    yield from recurse(0, [], set())


@dataclass(frozen=True)
class FlowNetwork:
    """Vertex-split unit-capacity network over a dynamic graph.

    Vertices: source 0, sink 1, then an in/out pair per dynamic vertex.
    Forward arc a and its residual partner are directed arcs 2a and 2a+1.
    All capacities are 1; the only nonzero costs sit on input split arcs
    and equal that copy's layer index.
    """

    dg: DynamicGraph
    arc_tail: tuple[int, ...]
    arc_head: tuple[int, ...]
    arc_cost: tuple[int, ...]
    arc_kind: tuple[int, ...]
    arc_layer: tuple[int, ...]  # layer for SPLIT_U / SOURCE arcs, else 0
    arc_ref: tuple[int, ...]  # dyn vertex for splits/sources, edge index for edges
    adj_start: tuple[int, ...]
    adj_arc: tuple[int, ...]

    # Lazy per-backend array cache; mutated in place, never reassigned.
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    SOURCE = 0
    SINK = 1

    @property
    def vertex_count(self) -> int:
        return 2 * self.dg.vertex_count + 2

    @property
    def forward_arc_count(self) -> int:
        return len(self.arc_tail)

    def v_in(self, dyn_vertex: int) -> int:
        return 2 + 2 * dyn_vertex

    def v_out(self, dyn_vertex: int) -> int:
        return 3 + 2 * dyn_vertex

    def input_split_arcs(self) -> list[tuple[int, int, int]]:
        """(forward arc id, layer, input index) for every input split arc."""
        out = []
        for a, kind in enumerate(self.arc_kind):
            if kind == ARC_SPLIT_U:
                kind_, j, layer = self.dg.describe(self.arc_ref[a])
                out.append((a, layer, j))
        return out

    def enabled_mask(
        self,
        layer_cap: int | None = None,
        allowed_sources: frozenset[int] | None = None,
    ) -> list[int]:
        """Per-directed-arc 0/1 mask. ``layer_cap`` disables source arcs of
        higher layers; ``allowed_sources`` restricts source arcs to a set of
        dynamic input-copy vertex ids (for matroid independence queries)."""
        mask = [1] * (2 * self.forward_arc_count)
        for a, kind in enumerate(self.arc_kind):
            if kind != ARC_SOURCE:
                continue
            ok = True
            if layer_cap is not None and self.arc_layer[a] > layer_cap:
                ok = False
            if allowed_sources is not None and self.arc_ref[a] not in allowed_sources:
                ok = False
            if not ok:
                mask[2 * a] = 0
                mask[2 * a + 1] = 0
        return mask

    def directed_arrays(self):
        """Directed-arc arrays (head, cost) shared by both kernels."""
        cache = self._cache
        if "directed" not in cache:
            m = self.forward_arc_count
            head = [0] * (2 * m)
            cost = [0] * (2 * m)
            for a in range(m):
                head[2 * a] = self.arc_head[a]
                head[2 * a + 1] = self.arc_tail[a]
                cost[2 * a] = self.arc_cost[a]
                cost[2 * a + 1] = -self.arc_cost[a]
            cache["directed"] = (head, cost)
        return cache["directed"]

    def numpy_arrays(self):
        """int32/int64 copies for the compiled kernel, built once."""
        cache = self._cache
        if "numpy" not in cache:
            import numpy as np

            head, cost = self.directed_arrays()
            cache["numpy"] = (
                np.asarray(self.adj_start, dtype=np.int32),
                np.asarray(self.adj_arc, dtype=np.int32),
                np.asarray(head, dtype=np.int32),
                np.asarray(cost, dtype=np.int64),
            )
        return cache["numpy"]

    def verify_flow(self, arc_flow: Sequence[int]) -> None:
        """Assert capacity and conservation; raises ValidationError if broken."""
        if len(arc_flow) != self.forward_arc_count:
            raise ValidationError("flow vector length mismatch")
        balance = [0] * self.vertex_count
        for a, f in enumerate(arc_flow):
            if f not in (0, 1):
                raise ValidationError(f"arc {a} carries non-unit flow {f}")
            if f:
                balance[self.arc_tail[a]] -= 1
                balance[self.arc_head[a]] += 1
        for v in range(2, self.vertex_count):
            if balance[v] != 0:
                raise ValidationError(f"flow not conserved at vertex {v}")
        if balance[self.SOURCE] != -balance[self.SINK]:
            raise ValidationError("source/sink imbalance")


def _network_from_dynamic_graph(dg: DynamicGraph) -> FlowNetwork:
    tails: list[int] = []
    heads: list[int] = []
    costs: list[int] = []
    kinds: list[int] = []
    layers: list[int] = []
    refs: list[int] = []

    def v_in(dv):
        return 2 + 2 * dv

    def v_out(dv):
        return 3 + 2 * dv

    def add(tail, head, cost, kind, layer, ref):
        tails.append(tail)
        heads.append(head)
        costs.append(cost)
        kinds.append(kind)
        layers.append(layer)
        refs.append(ref)

    for dv in range(dg.vertex_count):
        kind, _idx, layer = dg.describe(dv)
        if kind == "u":
            add(v_in(dv), v_out(dv), layer, ARC_SPLIT_U, layer, dv)
        else:
            add(v_in(dv), v_out(dv), 0, ARC_SPLIT_X, 0, dv)
    for idx, (src, dst, _label) in enumerate(dg.edges):
        add(v_out(src), v_in(dst), 0, ARC_EDGE, 0, idx)
    for k in range(1, dg.l + 1):
        for j in range(dg.m):
            dv = dg.input_copy(j, k)
            add(0, v_in(dv), 0, ARC_SOURCE, k, dv)
    for i in range(dg.n):
        add(v_out(dg.state_copy(i, 1)), 1, 0, ARC_SINK, 0, dg.state_copy(i, 1))

    n_vertices = 2 * dg.vertex_count + 2
    n_directed = 2 * len(tails)
    degree = [0] * n_vertices
    for a in range(len(tails)):
        degree[tails[a]] += 1
        degree[heads[a]] += 1
    adj_start = [0] * (n_vertices + 1)
    for v in range(n_vertices):
        adj_start[v + 1] = adj_start[v] + degree[v]
    fill = list(adj_start[:-1])
    adj_arc = [0] * n_directed
    for a in range(len(tails)):
        adj_arc[fill[tails[a]]] = 2 * a
        fill[tails[a]] += 1
        adj_arc[fill[heads[a]]] = 2 * a + 1
        fill[heads[a]] += 1

    return FlowNetwork(
        dg=dg,
        arc_tail=tuple(tails),
        arc_head=tuple(heads),
        arc_cost=tuple(costs),
        arc_kind=tuple(kinds),
        arc_layer=tuple(layers),
        arc_ref=tuple(refs),
        adj_start=tuple(adj_start),
        adj_arc=tuple(adj_arc),
    )


def build_flow_network(sys: StructuredSystem) -> FlowNetwork:
    """The full n-layer network; lower layer counts are reached by masking
    source arcs rather than rebuilding."""
    return _network_from_dynamic_graph(build_dynamic_graph(sys, sys.n))


def network_for_dynamic_graph(dg: DynamicGraph) -> FlowNetwork:
    """Vertex-split network over an arbitrary (possibly truncated) unrolling."""
    return _network_from_dynamic_graph(dg)


def dynamic_graph_dot(dg: DynamicGraph) -> str:
    """GraphViz rendering of the unrolled graph (debug aid)."""
    lines = ["digraph dyn {", "  rankdir=RL;"]
    for v in range(dg.vertex_count):
        kind, idx, layer = dg.describe(v)
        shape = "box" if kind == "u" else "circle"
        lines.append(f'  v{v} [label="{dg.vertex_name(v)}", shape={shape}];')
    for src, dst, label in dg.edges:
        kind, r, c = label
        lines.append(f'  v{src} -> v{dst} [label="{kind}{r + 1}{c + 1}"];')
    lines.append("}")
    return "\n".join(lines)


def flow_network_dot(net: FlowNetwork) -> str:
    """GraphViz rendering of the split network (debug aid)."""
    dg = net.dg
    lines = ["digraph flownet {", "  rankdir=RL;", '  s [shape=diamond];', '  t [shape=diamond];']

    def name(v):
        if v == 0:
            return "s"
        if v == 1:
            return "t"
        dv, io = divmod(v - 2, 2)
        return f'"{dg.vertex_name(dv)}{"io"[io]}"'

    for a in range(net.forward_arc_count):
        cost = net.arc_cost[a]
        attr = f' [label="{cost}"]' if cost else ""
        lines.append(f"  {name(net.arc_tail[a])} -> {name(net.arc_head[a])}{attr};")
    lines.append("}")
    return "\n".join(lines)

"""Integral max-flow and min-cost max-flow on the vertex-split network.

Interesting quantities live on input split arcs: the flow cost is the sum
of layer indices of the occupied ones, and gamma is the highest such layer.
The min-cost solve therefore yields, in one shot, a maximum flow whose
occupied input copies sit as low as possible.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .dyngraph import (
    ARC_EDGE,
    ARC_SINK,
    ARC_SOURCE,
    ARC_SPLIT_U,
    DynamicGraph,
    FlowNetwork,
    Linking,
    make_linking,
)
from .errors import ValidationError


@dataclass(frozen=True)
class IntegralFlow:
    """An integral feasible flow on a FlowNetwork.

    ``arc_flow[a]`` is the 0/1 flow on forward arc ``a``; ``gamma`` is the
    highest layer index among occupied input split arcs (0 for an empty
    flow); ``layer_cap`` records which source layers were enabled.
    """

    network: FlowNetwork
    value: int
    cost: int
    gamma: int
    arc_flow: tuple[int, ...]
    layer_cap: int

    def occupied(self) -> list[int]:
        return [a for a, f in enumerate(self.arc_flow) if f]


def _run_kernel(net: FlowNetwork, enabled, with_cost: bool, backend):
    impl = _kernels.get_backend(backend)
    n_arcs = 2 * net.forward_arc_count
    if impl.__name__.endswith("_core"):
        import numpy as np

        adj_start, adj_arc, head, cost = net.numpy_arrays()
        residual = np.empty(n_arcs, dtype=np.uint8)
        residual[0::2] = 1
        residual[1::2] = 0
        mask = np.asarray(enabled, dtype=np.uint8)
        if with_cost:
            value, total = impl.min_cost_max_flow(
                net.vertex_count, adj_start, adj_arc, head, cost,
                mask, net.SOURCE, net.SINK, residual,
            )
        else:
            value = impl.max_flow(
                net.vertex_count, adj_start, adj_arc, head,
                mask, net.SOURCE, net.SINK, residual,
            )
        flow = residual[1::2].tolist()
    else:
        head, cost = net.directed_arrays()
        residual = [1, 0] * net.forward_arc_count
        if with_cost:
            value, total = impl.min_cost_max_flow(
                net.vertex_count, net.adj_start, net.adj_arc, head, cost,
                enabled, net.SOURCE, net.SINK, residual,
            )
        else:
            value = impl.max_flow(
                net.vertex_count, net.adj_start, net.adj_arc, head,
                enabled, net.SOURCE, net.SINK, residual,
            )
        flow = residual[1::2]
    return value, tuple(int(f) for f in flow)


def _finish(net: FlowNetwork, value: int, flow: tuple[int, ...], layer_cap: int) -> IntegralFlow:
    cost = sum(net.arc_cost[a] for a, f in enumerate(flow) if f)
    gamma = 0
    for a, f in enumerate(flow):
        if f and net.arc_kind[a] == ARC_SPLIT_U and net.arc_layer[a] > gamma:
            gamma = net.arc_layer[a]
    return IntegralFlow(
        network=net, value=value, cost=cost, gamma=gamma,
        arc_flow=flow, layer_cap=layer_cap,
    )


def max_flow(
    net: FlowNetwork,
    layer_cap: int | None = None,
    allowed_sources: frozenset[int] | None = None,
    backend: str | None = None,
) -> IntegralFlow:
    """Integral maximum flow; ``layer_cap`` restricts usable source arcs to
    input copies of layer <= cap, realizing the truncated unrolling."""
    l = net.dg.l if layer_cap is None else layer_cap
    if not (1 <= l <= net.dg.l):
        raise ValidationError(f"layer cap must satisfy 1 <= cap <= {net.dg.l}, got {l}")
    enabled = net.enabled_mask(layer_cap=l, allowed_sources=allowed_sources)
    value, flow = _run_kernel(net, enabled, with_cost=False, backend=backend)
    return _finish(net, value, flow, l)


def min_cost_max_flow(net: FlowNetwork, backend: str | None = None) -> IntegralFlow:
    """Integral maximum flow of minimum cost (all layers enabled)."""
    enabled = net.enabled_mask()
    value, flow = _run_kernel(net, enabled, with_cost=True, backend=backend)
    return _finish(net, value, flow, net.dg.l)


def decompose(flow: IntegralFlow, dg: DynamicGraph) -> Linking:
    """Split an integral flow into its vertex-disjoint linking paths.

    Unit split capacities make the decomposition unique: follow the single
    occupied out-arc from each occupied source arc down to the sink.
    """
    net = flow.network
    if (dg.n, dg.m, dg.l) != (net.dg.n, net.dg.m, net.dg.l):
        raise ValidationError("dynamic graph does not match the flow's network")
    net.verify_flow(flow.arc_flow)

    starts: list[int] = []
    succ: dict[int, int] = {}
    ends: set[int] = set()
    for a in flow.occupied():
        kind = net.arc_kind[a]
        if kind == ARC_SOURCE:
            starts.append(net.arc_ref[a])
        elif kind == ARC_EDGE:
            src, dst, _label = dg.edges[net.arc_ref[a]]
            if src in succ:
                raise ValidationError(f"vertex {src} feeds two occupied arcs")
            succ[src] = dst
        elif kind == ARC_SINK:
            ends.add(net.arc_ref[a])
    paths = []
    for start in sorted(starts):
        path = [start]
        v = start
        while v in succ:
            v = succ[v]
            path.append(v)
        if v not in ends:
            raise ValidationError("occupied path does not reach the sink")
        paths.append(tuple(path))
    if len(paths) != flow.value:
        raise ValidationError("path count does not match the flow value")
    return make_linking(dg, paths)

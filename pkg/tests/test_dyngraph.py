"""Dynamic-graph unrolling, the split network, and linking enumeration."""
import pytest

from scoi.dyngraph import (
    ARC_SINK,
    ARC_SOURCE,
    ARC_SPLIT_U,
    ARC_SPLIT_X,
    build_dynamic_graph,
    build_flow_network,
    dynamic_graph_dot,
    enumerate_linkings,
    flow_network_dot,
    make_linking,
)
from scoi.errors import SizeCapError, ValidationError
from scoi.pattern import random_er_system

from conftest import chain_system, identity_input_system, system_from_edges


class TestUnrolling:
    def test_chain_two_layers(self):
        dg = build_dynamic_graph(chain_system(2), 2)
        names = {dg.vertex_name(v) for v in range(dg.vertex_count)}
        assert names == {"u1^1", "u1^2", "x1^1", "x2^1", "x1^2", "x2^2"}
        rendered = {
            (dg.vertex_name(src), dg.vertex_name(dst)) for src, dst, _ in dg.edges
        }
        assert rendered == {("x1^2", "x2^1"), ("u1^1", "x1^1"), ("u1^2", "x1^2")}

    def test_single_layer_has_no_state_edges(self):
        dg = build_dynamic_graph(chain_system(4), 1)
        kinds = {dg.describe(src)[0] for src, _, _ in dg.edges}
        assert kinds == {"u"}

    @pytest.mark.parametrize("l", [1, 3, 5])
    def test_edge_count_formula(self, l):
        sys = random_er_system(10, 3, seed=4)
        dg = build_dynamic_graph(sys, l)
        assert len(dg.edges) == (l - 1) * len(sys.a.nonzeros) + l * len(sys.b.nonzeros)

    def test_layer_bounds(self):
        sys = chain_system(3)
        with pytest.raises(ValidationError):
            build_dynamic_graph(sys, 0)
        with pytest.raises(ValidationError):
            build_dynamic_graph(sys, 4)

    def test_edges_descend_exactly_one_layer(self):
        dg = build_dynamic_graph(random_er_system(6, 2, seed=1), 4)
        for src, dst, label in dg.edges:
            k_src, k_dst = dg.describe(src)[2], dg.describe(dst)[2]
            if label[0] == "a":
                assert k_src == k_dst + 1
            else:
                assert k_src == k_dst

    def test_dot_render_smoke(self):
        dg = build_dynamic_graph(chain_system(2), 2)
        assert "digraph" in dynamic_graph_dot(dg)


class TestFlowNetwork:
    @pytest.mark.parametrize("n,m", [(2, 1), (5, 2), (7, 3)])
    def test_vertex_count(self, n, m):
        net = build_flow_network(random_er_system(n, m, seed=0))
        assert net.vertex_count == 2 * n * (n + m) + 2

    def test_input_split_costs_equal_layer(self):
        net = build_flow_network(random_er_system(6, 2, seed=3))
        splits = net.input_split_arcs()
        assert len(splits) == 6 * 2
        for arc, layer, _j in splits:
            assert net.arc_cost[arc] == layer
        assert {layer for _, layer, _ in splits} == set(range(1, 7))

    def test_all_other_costs_zero(self):
        net = build_flow_network(random_er_system(5, 2, seed=8))
        for a, kind in enumerate(net.arc_kind):
            if kind != ARC_SPLIT_U:
                assert net.arc_cost[a] == 0

    def test_arc_census(self):
        sys = random_er_system(6, 2, seed=9)
        net = build_flow_network(sys)
        n, m = sys.n, sys.m
        kinds = net.arc_kind
        assert sum(1 for k in kinds if k == ARC_SPLIT_U) == n * m
        assert sum(1 for k in kinds if k == ARC_SPLIT_X) == n * n
        assert sum(1 for k in kinds if k == ARC_SOURCE) == n * m
        assert sum(1 for k in kinds if k == ARC_SINK) == n

    def test_dot_render_smoke(self):
        net = build_flow_network(chain_system(2))
        assert "digraph" in flow_network_dot(net)


class TestEnumerateLinkings:
    def test_chain_unique_size_two_linking(self):
        dg = build_dynamic_graph(chain_system(2), 2)
        found = list(enumerate_linkings(dg, 2))
        assert len(found) == 1
        linking = found[0]
        assert linking.size == 2
        paths = {tuple(dg.vertex_name(v) for v in p) for p in linking.paths}
        assert paths == {("u1^1", "x1^1"), ("u1^2", "x1^2", "x2^1")}

    def test_oversized_request_yields_nothing(self):
        dg = build_dynamic_graph(chain_system(2), 2)
        assert list(enumerate_linkings(dg, 3)) == []

    def test_single_path_linking_sign_positive(self):
        dg = build_dynamic_graph(chain_system(3), 2)
        for linking in enumerate_linkings(dg, 1):
            assert linking.sign == 1

    def test_size_cap_guard(self):
        dg = build_dynamic_graph(random_er_system(10, 2, seed=0), 10)
        with pytest.raises(SizeCapError):
            next(enumerate_linkings(dg, 2))

    def test_prescribed_tails_and_heads(self):
        dg = build_dynamic_graph(chain_system(2), 2)
        tails = [dg.input_copy(0, 1), dg.input_copy(0, 2)]
        heads = [dg.state_copy(0, 1), dg.state_copy(1, 1)]
        assert len(list(enumerate_linkings(dg, 2, tails=tails, heads=heads))) == 1
        with pytest.raises(ValidationError):
            # A duplicated head collapses the set below the linking size.
            list(enumerate_linkings(dg, 2, tails=tails, heads=[heads[1], heads[1]]))

    def test_weights_are_sorted_multisets(self):
        dg = build_dynamic_graph(chain_system(3), 3)
        for linking in enumerate_linkings(dg, 2):
            assert list(linking.weight) == sorted(linking.weight)

    def test_make_linking_rejects_overlap(self):
        dg = build_dynamic_graph(identity_input_system(2), 1)
        path = (dg.input_copy(0, 1), dg.state_copy(0, 1))
        with pytest.raises(ValidationError):
            make_linking(dg, [path, path])

    def test_crossing_pair_has_negative_sign(self):
        # u1 -> x2 and u2 -> x1: the unique size-2 linking crosses.
        sys = system_from_edges(2, 2, [], [(1, 0), (0, 1)])
        dg = build_dynamic_graph(sys, 1)
        found = list(enumerate_linkings(dg, 2))
        assert len(found) == 1
        assert found[0].sign == -1

"""Flow solvers: values, costs, the min-layer property, decomposition."""
import random

import pytest

from scoi import flow
from scoi.dyngraph import build_dynamic_graph, build_flow_network, enumerate_linkings
from scoi.errors import ValidationError
from scoi.pattern import random_er_system
from scoi.rng import derive_seed

from conftest import chain_system, identity_input_system, system_from_edges


def max_linking_size_by_enumeration(sys, l):
    """Independent Menger-side oracle: exhaust linkings by brute force."""
    dg = build_dynamic_graph(sys, l)
    upper = min(sys.n, sys.m * l)
    for size in range(upper, 0, -1):
        if any(True for _ in enumerate_linkings(dg, size)):
            return size
    return 0


class TestMaxFlow:
    def test_chain_saturates_all_states(self):
        net = build_flow_network(chain_system(5))
        assert flow.max_flow(net).value == 5

    def test_identity_inputs_layer_one(self):
        net = build_flow_network(identity_input_system(4))
        assert flow.max_flow(net, layer_cap=1).value == 4

    def test_monotone_in_layer_cap(self):
        for seed in range(10):
            sys = random_er_system(7, 2, seed=seed)
            net = build_flow_network(sys)
            values = [flow.max_flow(net, layer_cap=k).value for k in range(1, 8)]
            assert values == sorted(values)
            assert values[-1] == flow.max_flow(net).value

    def test_layer_cap_bounds(self):
        net = build_flow_network(chain_system(3))
        with pytest.raises(ValidationError):
            flow.max_flow(net, layer_cap=0)
        with pytest.raises(ValidationError):
            flow.max_flow(net, layer_cap=4)

    def test_menger_equivalence_on_tiny_instances(self):
        # Max-flow value == exhaustive maximum linking size.
        rng = random.Random(1)
        checked = 0
        for trial in range(60):
            n = rng.randint(2, 4)
            m = rng.randint(1, 2)
            l = rng.randint(1, n)
            sys = random_er_system(n, m, seed=derive_seed(1, trial), edge_probability=0.4)
            if (n + m) * l > 20:
                continue
            net = build_flow_network(sys)
            assert flow.max_flow(net, layer_cap=l).value == max_linking_size_by_enumeration(sys, l)
            checked += 1
        assert checked >= 40

    def test_flows_conserve_and_respect_capacity(self):
        for seed in range(12):
            sys = random_er_system(6, 2, seed=seed)
            net = build_flow_network(sys)
            net.verify_flow(flow.max_flow(net).arc_flow)
            net.verify_flow(flow.min_cost_max_flow(net).arc_flow)


class TestMinCostMaxFlow:
    def test_chain_costs_sum_of_layers(self):
        # Unique maximum flow occupies input copies at layers 1, 2, 3.
        net = build_flow_network(chain_system(3))
        best = flow.min_cost_max_flow(net)
        assert (best.value, best.cost, best.gamma) == (3, 6, 3)
        # Cross-check bottom-up: enumerate all maximum linkings and take the
        # cheapest tail multiset.
        dg = build_dynamic_graph(chain_system(3), 3)
        costs = []
        for linking in enumerate_linkings(dg, 3):
            layers = [dg.describe(t)[2] for t in linking.tails]
            costs.append((sum(layers), max(layers)))
        assert min(costs) == (6, 3)

    def test_identity_inputs_all_layer_one(self):
        net = build_flow_network(identity_input_system(5))
        best = flow.min_cost_max_flow(net)
        assert (best.value, best.cost, best.gamma) == (5, 5, 1)

    def test_never_costlier_than_plain_max_flow(self):
        for seed in range(15):
            sys = random_er_system(8, 3, seed=seed)
            net = build_flow_network(sys)
            plain = flow.max_flow(net)
            best = flow.min_cost_max_flow(net)
            assert best.value == plain.value
            assert best.cost <= plain.cost

    def test_low_layer_shortcut_matches_layer_scan(self):
        # gamma of the min-cost flow == first layer cap reaching the full
        # value, over 500 randomized instances.
        rng = random.Random(2)
        for trial in range(500):
            n = rng.randint(2, 6)
            m = min(rng.randint(1, 3), n)
            sys = random_er_system(n, m, seed=derive_seed(2, trial))
            net = build_flow_network(sys)
            best = flow.min_cost_max_flow(net)
            if best.value == 0:
                assert best.gamma == 0
                continue
            scan = next(
                k for k in range(1, n + 1)
                if flow.max_flow(net, layer_cap=k).value == best.value
            )
            assert best.gamma == scan, f"trial {trial}"


class TestDecompose:
    def test_zero_flow_decomposes_to_empty_linking(self):
        sys = system_from_edges(2, 1, [(1, 0)], [])  # no input edges at all
        net = build_flow_network(sys)
        best = flow.min_cost_max_flow(net)
        assert best.value == 0
        linking = flow.decompose(best, net.dg)
        assert linking.size == 0

    def test_path_count_matches_value(self):
        for seed in range(12):
            sys = random_er_system(7, 2, seed=seed)
            net = build_flow_network(sys)
            best = flow.min_cost_max_flow(net)
            linking = flow.decompose(best, net.dg)
            assert linking.size == best.value

    def test_paths_vertex_disjoint_and_well_formed(self):
        sys = random_er_system(8, 3, seed=5)
        net = build_flow_network(sys)
        linking = flow.decompose(flow.max_flow(net), net.dg)
        seen = set()
        for path in linking.paths:
            for v in path:
                assert v not in seen
                seen.add(v)
            assert net.dg.describe(path[0])[0] == "u"
            kind, _, layer = net.dg.describe(path[-1])
            assert (kind, layer) == ("x", 1)

    def test_mismatched_graph_rejected(self):
        net = build_flow_network(chain_system(3))
        best = flow.min_cost_max_flow(net)
        with pytest.raises(ValidationError):
            flow.decompose(best, build_dynamic_graph(chain_system(4), 4))

    def test_tampered_flow_rejected(self):
        net = build_flow_network(chain_system(3))
        best = flow.min_cost_max_flow(net)
        broken = list(best.arc_flow)
        broken[next(a for a, f in enumerate(broken) if f)] = 0
        tampered = flow.IntegralFlow(
            network=net, value=best.value, cost=best.cost, gamma=best.gamma,
            arc_flow=tuple(broken), layer_cap=best.layer_cap,
        )
        with pytest.raises(ValidationError):
            flow.decompose(tampered, net.dg)

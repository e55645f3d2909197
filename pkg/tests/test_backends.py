"""Compiled and pure kernels must be interchangeable, flow for flow."""
import pytest

from scoi import _kernels, flow
from scoi.dyngraph import build_flow_network
from scoi.pattern import random_er_system
from scoi.rng import derive_seed


def _have_compiled():
    try:
        _kernels.get_backend("compiled")
        return True
    except ImportError:
        return False


needs_compiled = pytest.mark.skipif(
    not _have_compiled(), reason="compiled kernel not built"
)


def test_a_backend_is_selected():
    assert _kernels.BACKEND in ("compiled", "pure")


@needs_compiled
def test_identical_flows_across_backends():
    for trial in range(25):
        n = 3 + trial % 8
        m = min(1 + trial % 3, n)
        sys = random_er_system(n, m, seed=derive_seed(81, trial))
        net = build_flow_network(sys)
        for solver in (flow.max_flow, flow.min_cost_max_flow):
            compiled = solver(net, backend="compiled")
            pure = solver(net, backend="pure")
            assert compiled.arc_flow == pure.arc_flow
            assert (compiled.value, compiled.cost, compiled.gamma) == (
                pure.value,
                pure.cost,
                pure.gamma,
            )


@needs_compiled
def test_layer_caps_match_across_backends():
    sys = random_er_system(9, 3, seed=7)
    net = build_flow_network(sys)
    for k in range(1, 10):
        assert (
            flow.max_flow(net, layer_cap=k, backend="compiled").arc_flow
            == flow.max_flow(net, layer_cap=k, backend="pure").arc_flow
        )


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        _kernels.get_backend("gpu")

"""Compare the compiled and pure-Python flow kernels on growing instances.

Usage: python benchmarks/kernel_benchmark.py [--sizes 20,40,60,80,100] [--m 5]

Prints one row per size with wall times for the layer-capped max-flow scan
and the min-cost max-flow, per backend, plus the speedup. Both backends
must return identical flows; the script asserts that.
"""
import argparse
import time

from scoi import _kernels
from scoi.dyngraph import build_flow_network
from scoi.flow import max_flow, min_cost_max_flow
from scoi.pattern import random_er_system


def time_backend(net, backend):
    t0 = time.perf_counter()
    scan = max_flow(net, layer_cap=net.dg.l, backend=backend)
    t_max = time.perf_counter() - t0
    t0 = time.perf_counter()
    best = min_cost_max_flow(net, backend=backend)
    t_mcmf = time.perf_counter() - t0
    return scan, best, t_max, t_mcmf


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="20,40,60,80,100")
    parser.add_argument("--m", type=int, default=5)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()
    sizes = [int(tok) for tok in args.sizes.split(",")]

    backends = ["pure"]
    try:
        _kernels.get_backend("compiled")
        backends.insert(0, "compiled")
    except ImportError:
        print("compiled kernel unavailable; timing pure backend only")

    print(f"active backend at import: {_kernels.BACKEND}")
    header = f"{'n':>4} {'arcs':>7}"
    for b in backends:
        header += f" {b + '.maxflow':>16} {b + '.mcmf':>13}"
    if len(backends) == 2:
        header += f" {'mcmf speedup':>13}"
    print(header)

    for n in sizes:
        sys = random_er_system(n, args.m, seed=args.seed)
        net = build_flow_network(sys)
        results = {}
        for b in backends:
            results[b] = time_backend(net, b)
        if len(backends) == 2:
            c, p = results["compiled"], results["pure"]
            assert c[0].arc_flow == p[0].arc_flow, "backend max-flow mismatch"
            assert c[1].arc_flow == p[1].arc_flow, "backend mcmf mismatch"
        line = f"{n:>4} {net.forward_arc_count:>7}"
        for b in backends:
            _, best, t_max, t_mcmf = results[b]
            line += f" {t_max * 1e3:>14.1f}ms {t_mcmf * 1e3:>11.1f}ms"
        if len(backends) == 2:
            speedup = results["pure"][3] / max(results["compiled"][3], 1e-9)
            line += f" {speedup:>12.1f}x"
        line += f"  (value={results[backends[0]][1].value}, gamma={results[backends[0]][1].gamma})"
        print(line)


if __name__ == "__main__":
    main()

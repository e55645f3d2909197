"""Stem/cycle covers and cactus-structure families on the system digraph.

A cover is a vertex-disjoint collection of input-rooted simple paths
(stems) and simple cycles; exactly the states on stems and cycles are
essentially covered. A cactus structure is a stem plus cycles, each hooked
on by a connecting path whose interior states are not counted. Families
are vertex-disjoint collections of structures; a family is maximum when
its total essential cover equals the generic controllable-subspace
dimension.

Connecting paths here are taken internally disjoint from everything else
in the family (a conservative reading of the recursive definition), so any
family this module emits is valid; the price is that it may occasionally
find no family at all and report "unknown" upstream.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from ._kernels import pure_impl
from .errors import InvariantViolation, SizeCapError
from .pattern import SystemDigraph


class SearchBudgetExceeded(SizeCapError):
    """Exhaustive family search ran out of its node budget."""


@dataclass(frozen=True)
class CactusStructure:
    """One input-rooted structure.

    ``links[i]`` connects the structure to ``cycles[i]``: its first element
    is a vertex already in the structure (-1 stands for the input node
    itself), its last is a vertex of the cycle, and everything strictly
    between is an uncounted interior state.
    """

    input_index: int
    stem: tuple[int, ...]
    cycles: tuple[tuple[int, ...], ...] = ()
    links: tuple[tuple[int, ...], ...] = ()

    @property
    def essential_cover(self) -> int:
        return len(self.stem) + sum(len(c) for c in self.cycles)

    def covered_states(self) -> frozenset[int]:
        out = set(self.stem)
        for c in self.cycles:
            out.update(c)
        return frozenset(out)

    def all_states(self) -> frozenset[int]:
        out = set(self.covered_states())
        for link in self.links:
            out.update(v for v in link if v >= 0)
        return frozenset(out)


@dataclass(frozen=True)
class CactusStructureFamily:
    structures: tuple[CactusStructure, ...]

    @property
    def total_cover(self) -> int:
        return sum(s.essential_cover for s in self.structures)

    @property
    def max_cover(self) -> int:
        return max((s.essential_cover for s in self.structures), default=0)


def verify_family(dgraph: SystemDigraph, family: CactusStructureFamily) -> bool:
    """Re-walk every edge of every structure and check global disjointness.

    Used by tests and for witness re-verification; independent of how the
    family was constructed.
    """
    xx = dgraph.edges_xx
    ux = dgraph.edges_ux
    used_all: set[int] = set()
    used_inputs: set[int] = set()
    for s in family.structures:
        if s.input_index in used_inputs or not (0 <= s.input_index < dgraph.m):
            return False
        used_inputs.add(s.input_index)
        if len(s.cycles) != len(s.links):
            return False
        mine: set[int] = set()

        def claim(vertices) -> bool:
            for v in vertices:
                if v < 0 or v in used_all or v in mine:
                    return False
                mine.add(v)
            return True

        if not s.stem or (s.input_index, s.stem[0]) not in ux:
            return False
        if not claim(s.stem):
            return False
        for a, b in zip(s.stem, s.stem[1:]):
            if (a, b) not in xx:
                return False

        grown: set[int] = set(s.stem)
        for cycle, link in zip(s.cycles, s.links):
            if len(set(cycle)) != len(cycle) or not claim(cycle):
                return False
            for a, b in zip(cycle, cycle[1:]):
                if (a, b) not in xx:
                    return False
            if (cycle[-1], cycle[0]) not in xx:
                return False

            if len(link) < 2 or link[-1] not in cycle:
                return False
            start = link[0]
            if start == -1:
                # Link rooted at the input node: first hop is a B edge.
                if (s.input_index, link[1]) not in ux:
                    return False
            elif start not in grown:
                return False
            if not claim(link[1:-1]):
                return False
            states = [v for v in link if v >= 0]
            for a, b in zip(states, states[1:]):
                if (a, b) not in xx:
                    return False
            grown.update(cycle)
            grown.update(link[1:-1])
        used_all.update(mine)
    return True


# ---------------------------------------------------------------------------
# Exact maximum stem/cycle cover.
#
# Each reachable state contributes a "must route one unit" split; covering
# the state routes its unit along a real edge (cost 0), leaving it
# uncovered burns a bypass arc (cost 1). Stems thread source -> input ->
# states -> sink -> source; cycles circulate among states. Solved as a
# min-cost max-flow with nonnegative costs on the shared kernel.
# ---------------------------------------------------------------------------


def _csr(n_nodes, tails, heads, costs):
    degree = [0] * n_nodes
    for a in range(len(tails)):
        degree[tails[a]] += 1
        degree[heads[a]] += 1
    adj_start = [0] * (n_nodes + 1)
    for v in range(n_nodes):
        adj_start[v + 1] = adj_start[v] + degree[v]
    fill = list(adj_start[:-1])
    adj_arc = [0] * (2 * len(tails))
    head_d = [0] * (2 * len(tails))
    cost_d = [0] * (2 * len(tails))
    for a in range(len(tails)):
        adj_arc[fill[tails[a]]] = 2 * a
        fill[tails[a]] += 1
        adj_arc[fill[heads[a]]] = 2 * a + 1
        fill[heads[a]] += 1
        head_d[2 * a] = heads[a]
        head_d[2 * a + 1] = tails[a]
        cost_d[2 * a] = costs[a]
        cost_d[2 * a + 1] = -costs[a]
    return adj_start, adj_arc, head_d, cost_d


def max_cycle_stem_cover(
    dgraph: SystemDigraph, rng: random.Random | None = None
) -> tuple[list[tuple[int, list[int]]], list[list[int]]]:
    """Maximum-cardinality cover of the reachable subgraph by disjoint
    input-rooted stems and cycles.

    Returns ``(stems, cycles)``: stems as (input index, state sequence),
    cycles as state sequences. ``rng`` shuffles tie-breaking so restarts
    can reach different optimal covers; for a fixed generator state the
    result is deterministic.
    """
    reach = sorted(dgraph.reachable_states())
    if rng is not None:
        rng.shuffle(reach)
    pos = {state: p for p, state in enumerate(reach)}
    n_r, m = len(reach), dgraph.m
    if n_r == 0:
        return [], []

    source, sink, s, t = 0, 1, 2, 3

    def u_node(j):
        return 4 + j

    def x_in(i):
        return 4 + m + 2 * pos[i]

    def x_out(i):
        return 5 + m + 2 * pos[i]

    n_nodes = 4 + m + 2 * n_r
    tails: list[int] = []
    heads: list[int] = []
    costs: list[int] = []
    meta: list[tuple] = []

    def add(a, b, c, tag):
        tails.append(a)
        heads.append(b)
        costs.append(c)
        meta.append(tag)

    for i in reach:
        add(source, x_out(i), 0, ("feed", i))
        add(x_in(i), sink, 0, ("drain", i))
        add(x_out(i), x_in(i), 1, ("skip", i))
        add(x_out(i), t, 0, ("end", i))
    for j in range(m):
        add(s, u_node(j), 0, ("root", j))
        add(t, s, 0, ("return", j))
    for j, i in sorted(dgraph.edges_ux, key=lambda e: (e[0], pos.get(e[1], -1))):
        if i in pos:
            add(u_node(j), x_in(i), 0, ("enter", j, i))
    for i, j in sorted(dgraph.edges_xx, key=lambda e: (pos.get(e[0], -1), pos.get(e[1], -1))):
        if i in pos and j in pos:
            add(x_out(i), x_in(j), 0, ("step", i, j))

    adj_start, adj_arc, head_d, cost_d = _csr(n_nodes, tails, heads, costs)
    residual = [1, 0] * len(tails)
    enabled = [1] * (2 * len(tails))
    value, _cost = pure_impl.min_cost_max_flow(
        n_nodes, adj_start, adj_arc, head_d, cost_d, enabled, source, sink, residual
    )
    if value != n_r:
        raise InvariantViolation("cover transformation lost its forced units")

    covered: set[int] = set()
    skipped: set[int] = set()
    enter: dict[int, int] = {}
    step: dict[int, int] = {}
    ended: set[int] = set()
    for a in range(len(tails)):
        if not residual[2 * a + 1]:
            continue
        tag = meta[a]
        if tag[0] == "skip":
            skipped.add(tag[1])
        elif tag[0] == "enter":
            enter[tag[1]] = tag[2]
        elif tag[0] == "step":
            step[tag[1]] = tag[2]
        elif tag[0] == "end":
            ended.add(tag[1])
    covered = {i for i in reach if i not in skipped}

    stems: list[tuple[int, list[int]]] = []
    on_stem: set[int] = set()
    for j in sorted(enter):
        seq = [enter[j]]
        while seq[-1] not in ended:
            seq.append(step[seq[-1]])
        stems.append((j, seq))
        on_stem.update(seq)
    cycles: list[list[int]] = []
    seen: set[int] = set()
    for start in sorted(covered - on_stem):
        if start in seen:
            continue
        seq = [start]
        seen.add(start)
        v = step[start]
        while v != start:
            seq.append(v)
            seen.add(v)
            v = step[v]
        cycles.append(seq)
    return stems, cycles


# ---------------------------------------------------------------------------
# Connecting-path discovery
# ---------------------------------------------------------------------------


def _link_bfs(succ, input_succ, input_index, origin_states, target, blocked):
    """Shortest path from the structure (its states, or the input node
    encoded as -1) to any target vertex, interiors restricted to unblocked
    states. Returns a vertex tuple (origin, ..., target) or None."""
    parent: dict[int, int] = {}
    queue: deque[int] = deque()
    for v in sorted(origin_states):
        parent[v] = v
        queue.append(v)
    parent[-1] = -1
    queue.append(-1)
    while queue:
        v = queue.popleft()
        neighbors = succ[v] if v >= 0 else input_succ[input_index]
        for w in neighbors:
            if w in target:
                path = [w]
                u = v
                while True:
                    path.append(u)
                    if parent[u] == u:
                        break
                    u = parent[u]
                path.reverse()
                return tuple(path)
            if w in blocked or w in parent:
                continue
            parent[w] = v
            queue.append(w)
    return None


def attach_cycles(
    dgraph: SystemDigraph,
    stems: list[tuple[int, list[int]]],
    cycles: list[list[int]],
    rng: random.Random | None = None,
) -> CactusStructureFamily | None:
    """Hook every cycle onto a stem-rooted structure via a connecting path
    through otherwise-unused states. Each cycle goes to the structure that
    keeps the family's largest essential cover smallest (ties: lowest
    structure index). Returns None when some cycle cannot be attached."""
    succ = dgraph.state_successors()
    input_succ = dgraph.input_successors()

    structures = [
        {
            "input": j,
            "stem": tuple(seq),
            "vertices": set(seq),
            "cycles": [],
            "links": [],
            "cover": len(seq),
        }
        for j, seq in stems
    ]
    blocked: set[int] = set()
    for st in structures:
        blocked.update(st["vertices"])
    for cyc in cycles:
        blocked.update(cyc)

    order = sorted(range(len(cycles)), key=lambda idx: (-len(cycles[idx]), cycles[idx][0]))
    if rng is not None:
        rng.shuffle(order)
    pending = [cycles[idx] for idx in order]

    while pending:
        cycle = pending.pop(0)
        target = set(cycle)
        blocked_now = blocked - target
        best = None  # (resulting max cover, structure index, path)
        for sidx, st in enumerate(structures):
            path = _link_bfs(
                succ, input_succ, st["input"], st["vertices"], target, blocked_now
            )
            if path is None:
                continue
            others = max(
                (s2["cover"] for k2, s2 in enumerate(structures) if k2 != sidx),
                default=0,
            )
            resulting = max(others, st["cover"] + len(cycle))
            if best is None or (resulting, sidx) < (best[0], best[1]):
                best = (resulting, sidx, path)
        if best is None:
            return None
        _, sidx, path = best
        st = structures[sidx]
        st["cycles"].append(tuple(cycle))
        st["links"].append(tuple(path))
        st["vertices"].update(cycle)
        st["vertices"].update(v for v in path if v >= 0)
        st["cover"] += len(cycle)
        blocked.update(v for v in path if v >= 0)

    return CactusStructureFamily(
        structures=tuple(
            CactusStructure(
                input_index=st["input"],
                stem=st["stem"],
                cycles=tuple(st["cycles"]),
                links=tuple(st["links"]),
            )
            for st in structures
        )
    )


# ---------------------------------------------------------------------------
# Exhaustive family search (small n): enumerate stems, then cycle sets,
# then attachment assignments, everything under a node budget.
# ---------------------------------------------------------------------------


class _Search:
    def __init__(self, dgraph: SystemDigraph, target_total: int, cap: int, budget: int):
        self.g = dgraph
        self.succ = dgraph.state_successors()
        self.input_succ = dgraph.input_successors()
        self.reach = dgraph.reachable_states()
        self.target = target_total
        self.cap = cap
        self.budget = budget
        self.result: CactusStructureFamily | None = None

    def _tick(self):
        self.budget -= 1
        if self.budget <= 0:
            raise SearchBudgetExceeded("cactus family search budget exhausted")

    def run(self) -> CactusStructureFamily | None:
        if self.target == 0:
            return CactusStructureFamily(structures=())
        free = set(range(self.g.n))
        self._stem_phase(0, free, [], 0)
        return self.result

    # -- phase 1: one stem (or none) per input, in input order -------------
    def _stem_phase(self, j, free, stems, total):
        if self.result is not None:
            return
        self._tick()
        if j == self.g.m:
            self._cycle_phase(free, stems, [], total, set())
            return
        self._stem_phase(j + 1, free, stems, total)
        if self.result is not None:
            return
        for first in self.input_succ[j]:
            if first not in free:
                continue
            free.discard(first)
            self._extend_stem(j, [first], free, stems, total)
            free.add(first)
            if self.result is not None:
                return

    def _extend_stem(self, j, path, free, stems, total):
        if self.result is not None:
            return
        self._tick()
        if len(path) <= self.cap and total + len(path) <= self.target:
            stems.append((j, tuple(path)))
            self._stem_phase(j + 1, free, stems, total + len(path))
            stems.pop()
            if self.result is not None:
                return
        if len(path) >= self.cap:
            return
        for nxt in self.succ[path[-1]]:
            if nxt not in free:
                continue
            path.append(nxt)
            free.discard(nxt)
            self._extend_stem(j, path, free, stems, total)
            free.add(nxt)
            path.pop()
            if self.result is not None:
                return

    # -- phase 2: cycle sets, canonical by smallest vertex ------------------
    def _cycle_phase(self, free, stems, cycles, total, excluded):
        if self.result is not None:
            return
        self._tick()
        if total == self.target:
            self._attach_phase(free, stems, cycles)
            return
        # All cycle mass, chosen and future, must fit under the caps.
        headroom = sum(max(0, self.cap - len(seq)) for _, seq in stems)
        stem_total = sum(len(seq) for _, seq in stems)
        if headroom < self.target - stem_total:
            return
        candidates = sorted(
            v for v in free if v not in excluded and v in self.reach
        )
        if total + len(candidates) < self.target:
            return
        if not candidates:
            return
        v = candidates[0]
        for cycle in self._cycles_through(v, free, excluded):
            if total + len(cycle) > self.target:
                continue
            cset = set(cycle)
            free.difference_update(cset)
            cycles.append(tuple(cycle))
            self._cycle_phase(free, stems, cycles, total + len(cycle), excluded)
            cycles.pop()
            free.update(cset)
            if self.result is not None:
                return
        self._cycle_phase(free, stems, cycles, total, excluded | {v})

    def _cycles_through(self, v, free, excluded):
        """Simple cycles within free, non-excluded states whose minimum
        vertex is v, shortest first."""
        out: list[list[int]] = []

        def walk(path, seen):
            self._tick()
            for nxt in self.succ[path[-1]]:
                if nxt == v:
                    out.append(list(path))
                elif nxt > v and nxt in free and nxt not in excluded and nxt not in seen:
                    seen.add(nxt)
                    path.append(nxt)
                    walk(path, seen)
                    path.pop()
                    seen.discard(nxt)

        walk([v], {v})
        out.sort(key=lambda c: (len(c), c))
        return out

    # -- phase 3: assign each cycle a structure and a connecting path ------
    def _attach_phase(self, free, stems, cycles):
        if any(len(seq) > self.cap for _, seq in stems):
            return
        structures = [
            {
                "input": j,
                "stem": tuple(seq),
                "vertices": set(seq),
                "cycles": [],
                "links": [],
                "cover": len(seq),
            }
            for j, seq in stems
        ]
        seen_states: set = set()
        if self._assign(list(free), structures, list(range(len(cycles))), cycles, seen_states):
            self.result = CactusStructureFamily(
                structures=tuple(
                    CactusStructure(
                        input_index=st["input"],
                        stem=st["stem"],
                        cycles=tuple(st["cycles"]),
                        links=tuple(st["links"]),
                    )
                    for st in structures
                )
            )

    def _assign(self, free, structures, todo, cycles, seen_states):
        self._tick()
        if not todo:
            return True
        key = (
            frozenset(todo),
            frozenset(free),
            tuple(frozenset(st["vertices"]) for st in structures),
        )
        if key in seen_states:
            return False
        seen_states.add(key)
        free_set = set(free)
        for ci in todo:
            cset = set(cycles[ci])
            for st in structures:
                if st["cover"] + len(cset) > self.cap:
                    continue
                for link in self._links_to(st, cset, free_set):
                    interior = [u for u in link[1:-1]]
                    st["cycles"].append(cycles[ci])
                    st["links"].append(link)
                    st["vertices"].update(cset)
                    st["vertices"].update(interior)
                    st["cover"] += len(cset)
                    rest = [c for c in todo if c != ci]
                    if self._assign(
                        [u for u in free if u not in interior],
                        structures,
                        rest,
                        cycles,
                        seen_states,
                    ):
                        return True
                    st["cover"] -= len(cset)
                    st["vertices"].difference_update(interior)
                    st["vertices"].difference_update(cset)
                    st["links"].pop()
                    st["cycles"].pop()
        return False

    def _links_to(self, st, cset, free_set):
        """All simple connecting paths from the structure (or its input) to
        the cycle; interiors run through free states outside the cycle.
        Shortest first so cheap attachments are tried early."""
        links: list[tuple[int, ...]] = []
        allowed = {u for u in free_set if u not in cset}

        def walk(path, visited):
            self._tick()
            last = path[-1]
            neighbors = self.succ[last] if last >= 0 else self.input_succ[st["input"]]
            for nxt in neighbors:
                if nxt in cset:
                    links.append(tuple(path) + (nxt,))
                elif nxt in allowed and nxt not in visited:
                    visited.add(nxt)
                    path.append(nxt)
                    walk(path, visited)
                    path.pop()
                    visited.discard(nxt)

        for start in sorted(st["vertices"]):
            walk([start], set())
        walk([-1], set())
        links.sort(key=lambda p: (len(p), p))
        return links


def exists_family_within(
    dgraph: SystemDigraph, target_total: int, cap: int, budget: int = 300_000
) -> CactusStructureFamily | None:
    """A maximum family (total essential cover = target) whose structures
    each cover at most ``cap`` states, or None. Raises
    SearchBudgetExceeded when the search space is too large."""
    if cap < 1 and target_total > 0:
        return None
    return _Search(dgraph, target_total, cap, budget).run()


def exhaustive_min_max_cover(
    dgraph: SystemDigraph, target_total: int, budget: int = 300_000
) -> tuple[int | None, CactusStructureFamily | None]:
    """Smallest cap admitting a maximum family, scanning caps upward.

    Returns (cap, family); (None, None) when no family exists at any cap
    under the conservative connecting-path rule.
    """
    if target_total == 0:
        return 0, CactusStructureFamily(structures=())
    lowest = max(1, -(-target_total // max(1, dgraph.m)))
    for cap in range(lowest, target_total + 1):
        family = exists_family_within(dgraph, target_total, cap, budget)
        if family is not None:
            return cap, family
    return None, None

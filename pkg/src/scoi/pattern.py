"""Structured matrices, the system digraph, and instance generation.

A structured matrix records only which entries are free parameters; the
pair (A, B) of an n-state, m-input system induces a digraph on input and
state nodes whose edges are the transposed nonzero positions. Realizations
assign concrete values (floats in [0, 1] or prime-field elements) to the
free parameters.

Indices are 0-based everywhere in code and in the JSON format; the 1-based
names (x1, u1, ...) appear only in rendered labels.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ValidationError

# Mersenne prime 2^61 - 1. Large enough that a random determinant of any
# controllability-matrix minor at n <= 200 vanishes spuriously with
# probability well under 1e-12, yet products of two residues stay cheap.
PRIME_FIELD_MODULUS = (1 << 61) - 1

Entry = tuple[int, int]
ParamKey = tuple[str, int, int]  # ("a"|"b", row, col)


@dataclass(frozen=True)
class SparsityPattern:
    """A rows x cols zero/nonzero structure; nonzeros are (row, col) pairs."""

    rows: int
    cols: int
    nonzeros: frozenset[Entry]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValidationError(f"pattern shape {self.rows}x{self.cols} invalid")
        object.__setattr__(self, "nonzeros", frozenset(self.nonzeros))
        for r, c in self.nonzeros:
            if not (0 <= r < self.rows):
                raise ValidationError(
                    f"entry [{r},{c}]: row index {r} out of range (rows={self.rows})"
                )
            if not (0 <= c < self.cols):
                raise ValidationError(
                    f"entry [{r},{c}]: column index {c} out of range (cols={self.cols})"
                )

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Iterable[Entry], name: str = "matrix"):
        """Build from a possibly-duplicated entry list; duplicates are an error."""
        seen = set()
        for entry in entries:
            key = tuple(entry)
            if key in seen:
                raise ValidationError(f"duplicate entry [{key[0]},{key[1]}] in {name}")
            seen.add(key)
        return cls(rows, cols, frozenset(seen))

    def transpose(self) -> "SparsityPattern":
        return SparsityPattern(self.cols, self.rows, frozenset((c, r) for r, c in self.nonzeros))

    def sorted_entries(self) -> list[Entry]:
        return sorted(self.nonzeros)

    def density(self) -> float:
        return len(self.nonzeros) / (self.rows * self.cols)


@dataclass(frozen=True)
class StructuredSystem:
    """The structured pair (A, B): A is n x n, B is n x m."""

    a: SparsityPattern
    b: SparsityPattern

    def __post_init__(self):
        if self.a.rows != self.a.cols:
            raise ValidationError(f"A must be square, got {self.a.rows}x{self.a.cols}")
        if self.b.rows != self.a.rows:
            raise ValidationError(
                f"B has {self.b.rows} rows but A is {self.a.rows}x{self.a.cols}"
            )

    @property
    def n(self) -> int:
        return self.a.rows

    @property
    def m(self) -> int:
        return self.b.cols

    def param_keys(self) -> list[ParamKey]:
        """All free-parameter positions, in a fixed order."""
        keys = [("a", r, c) for r, c in self.a.sorted_entries()]
        keys += [("b", r, c) for r, c in self.b.sorted_entries()]
        return keys

    def dual(self) -> "StructuredSystem":
        """Transpose both patterns (controllability <-> observability)."""
        return StructuredSystem(self.a.transpose(), self.b.transpose())


@dataclass(frozen=True)
class SystemDigraph:
    """Digraph on inputs u_j and states x_i.

    ``edges_xx`` holds (i, j) for an edge x_i -> x_j, i.e. A[j][i] != 0;
    ``edges_ux`` holds (j, i) for u_j -> x_i, i.e. B[i][j] != 0. Node order
    is inputs before states, each by index.
    """

    n: int
    m: int
    edges_xx: frozenset[tuple[int, int]]
    edges_ux: frozenset[tuple[int, int]]

    def state_successors(self) -> list[list[int]]:
        succ: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges_xx):
            succ[i].append(j)
        return succ

    def input_successors(self) -> list[list[int]]:
        succ: list[list[int]] = [[] for _ in range(self.m)]
        for j, i in sorted(self.edges_ux):
            succ[j].append(i)
        return succ

    def state_predecessors(self) -> list[list[int]]:
        pred: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges_xx):
            pred[j].append(i)
        return pred

    def reachable_states(self) -> frozenset[int]:
        """States reachable from at least one input."""
        succ = self.state_successors()
        seen: set[int] = set()
        stack = [i for _, i in self.edges_ux]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(w for w in succ[v] if w not in seen)
        return frozenset(seen)

    def edge_count(self) -> int:
        return len(self.edges_xx) + len(self.edges_ux)


@dataclass(frozen=True)
class Realization:
    """Concrete values for every free parameter of a system.

    ``field_modulus`` is None for real-valued realizations; otherwise all
    values are nonzero residues of that prime.
    """

    system: StructuredSystem
    values: Mapping[ParamKey, float | int] = field(compare=False)
    field_modulus: int | None = None

    def __post_init__(self):
        expected = set(self.system.param_keys())
        got = set(self.values)
        if got != expected:
            raise ValidationError(
                "realization must assign exactly the nonzero positions "
                f"({len(got)} given, {len(expected)} expected)"
            )

    def matrix_pair(self):
        """Dense (A, B) as nested lists with explicit zeros."""
        n, m = self.system.n, self.system.m
        a = [[0] * n for _ in range(n)]
        b = [[0] * m for _ in range(n)]
        for (kind, r, c), v in self.values.items():
            (a if kind == "a" else b)[r][c] = v
        return a, b


def build_digraph(sys: StructuredSystem) -> SystemDigraph:
    return SystemDigraph(
        n=sys.n,
        m=sys.m,
        edges_xx=frozenset((c, r) for r, c in sys.a.nonzeros),
        edges_ux=frozenset((c, r) for r, c in sys.b.nonzeros),
    )


def parse_system(text: str) -> StructuredSystem:
    """Parse the JSON wire format {"n":..,"m":..,"A":[[r,c],..],"B":[[r,c],..]}."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("top-level JSON value must be an object")
    for key in ("n", "m", "A", "B"):
        if key not in doc:
            raise ValidationError(f"missing field {key!r}")
    n, m = doc["n"], doc["m"]
    if not isinstance(n, int) or not isinstance(m, int) or n < 1 or m < 1:
        raise ValidationError(f"n and m must be positive integers, got n={n!r} m={m!r}")

    def entries(raw, name):
        if not isinstance(raw, list):
            raise ValidationError(f"{name} must be a list of [row, col] pairs")
        out = []
        for item in raw:
            if (
                not isinstance(item, list)
                or len(item) != 2
                or not all(isinstance(x, int) for x in item)
            ):
                raise ValidationError(f"bad {name} entry {item!r}: expected [row, col]")
            out.append((item[0], item[1]))
        return out

    a = SparsityPattern.from_entries(n, n, entries(doc["A"], "A"), name="A")
    b = SparsityPattern.from_entries(n, m, entries(doc["B"], "B"), name="B")
    return StructuredSystem(a, b)


def serialize_system(sys: StructuredSystem) -> str:
    """Canonical JSON for a system; parse(serialize(s)) == s."""
    doc = {
        "n": sys.n,
        "m": sys.m,
        "A": [list(e) for e in sys.a.sorted_entries()],
        "B": [list(e) for e in sys.b.sorted_entries()],
    }
    return json.dumps(doc, separators=(",", ":"))


def random_er_system(
    n: int,
    m: int,
    seed: int,
    edge_probability: float | None = None,
) -> StructuredSystem:
    """Directed Erdos-Renyi A (self-loops included, each position present
    independently with probability log(n)/n, natural log) and a B with one
    nonzero per column in distinct rows.
    """
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    if not (1 <= m <= n):
        raise ValidationError(f"need 1 <= m <= n to place {m} inputs in distinct rows")
    p = math.log(n) / n if edge_probability is None else edge_probability
    rng = random.Random(seed)
    a_entries = frozenset(
        (r, c) for r in range(n) for c in range(n) if rng.random() < p
    )
    rows = rng.sample(range(n), m)
    b_entries = frozenset((rows[j], j) for j in range(m))
    return StructuredSystem(
        SparsityPattern(n, n, a_entries), SparsityPattern(n, m, b_entries)
    )


def sample_realization(
    sys: StructuredSystem,
    mode: str = "field",
    seed: int = 0,
    modulus: int = PRIME_FIELD_MODULUS,
) -> Realization:
    """Independent values per nonzero: uniform [0, 1) floats ("real") or
    uniform nonzero residues mod a prime ("field")."""
    if mode not in ("real", "field"):
        raise ValidationError(f"mode must be 'real' or 'field', got {mode!r}")
    rng = random.Random(seed)
    values: dict[ParamKey, float | int] = {}
    for key in sys.param_keys():
        if mode == "real":
            values[key] = rng.random()
        else:
            values[key] = rng.randrange(1, modulus)
    return Realization(sys, values, None if mode == "real" else modulus)

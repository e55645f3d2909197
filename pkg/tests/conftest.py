"""Shared builders for test systems."""
import pytest

from scoi.pattern import SparsityPattern, StructuredSystem


def chain_system(n: int, m: int = 1) -> StructuredSystem:
    """x1 -> x2 -> ... -> xn with u1 feeding x1 (extra inputs unused)."""
    a = SparsityPattern(n, n, frozenset((i + 1, i) for i in range(n - 1)))
    b = SparsityPattern(n, m, frozenset({(0, 0)}))
    return StructuredSystem(a, b)


def identity_input_system(n: int) -> StructuredSystem:
    """No state coupling, one dedicated input per state."""
    a = SparsityPattern(n, n, frozenset())
    b = SparsityPattern(n, n, frozenset((i, i) for i in range(n)))
    return StructuredSystem(a, b)


def system_from_edges(n, m, a_edges, b_edges) -> StructuredSystem:
    """a_edges as (row, col) of A, b_edges as (row, col) of B."""
    return StructuredSystem(
        SparsityPattern(n, n, frozenset(a_edges)),
        SparsityPattern(n, m, frozenset(b_edges)),
    )


@pytest.fixture
def chain6():
    return chain_system(6)

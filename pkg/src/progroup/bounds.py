"""Configurable size limits.  Exceeding one raises BoundExceeded."""

from dataclasses import dataclass


@dataclass
class Bounds:
    table_order: int = 2000  # Cayley-table groups (iso, Aut, chief series)
    subgroup_order: int = 2000  # full subgroup enumeration
    quotient_index: int = 20000  # quotients converted to tables
    completion_degree: int = 5000  # permutation degree of a completion
    completion_work: int = 4 * 10 ** 8  # points moved by chain multiplications while pruning one
    aut_group_order: int = 50000  # explicit automorphism lists
    closure_groups: int = 500  # groups in a subgroup/quotient closure
    search_nodes: int = 2_000_000  # backtracking nodes in hom searches


BOUNDS = Bounds()

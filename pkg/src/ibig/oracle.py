"""Exact Dempster combination over explicit subset masses on small frames.

This is the independent reference implementation the approximate hierarchy
engine is tested against.  Subsets are bitmasks over the frame's leaves;
combination allocates product masses to intersections and renormalizes the
non-conflicting remainder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MassRangeError, OracleSizeError, TotalConflictError
from .kb import CONFIRM, Hierarchy

DEFAULT_MAX_LEAVES = 12

_SUM_TOL = 1e-9
_UNDERFLOW = 1e-300


@dataclass
class OracleAssignment:
    """Basic belief assignment: explicit map from subset masks to masses."""

    n_leaves: int
    masses: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        total = 0.0
        for mask, mass in self.masses.items():
            if mask == 0 and mass != 0.0:
                raise MassRangeError("the empty set carries no mass")
            if mass < 0.0:
                raise MassRangeError(f"negative mass {mass!r}")
            total += mass
        if abs(total - 1.0) > _SUM_TOL:
            raise MassRangeError(f"masses sum to {total!r}, not 1")

    @property
    def full_mask(self) -> int:
        return (1 << self.n_leaves) - 1

    def mass(self, mask: int) -> float:
        return self.masses.get(mask, 0.0)

    def belief(self, mask: int) -> float:
        return sum(m for sub, m in self.masses.items() if sub and sub & ~mask == 0)


def vacuous(n_leaves: int) -> OracleAssignment:
    return OracleAssignment(n_leaves, {(1 << n_leaves) - 1: 1.0})


def simple_support(n_leaves: int, focus: int, mass: float) -> OracleAssignment:
    """All mass on one focus, the rest on the full frame."""
    if not 0.0 < mass < 1.0:
        raise MassRangeError(f"support mass {mass!r} outside (0, 1)")
    full = (1 << n_leaves) - 1
    if focus == full:
        return vacuous(n_leaves)
    return OracleAssignment(n_leaves, {focus: mass, full: 1.0 - mass})


def combine_pair(a: OracleAssignment, b: OracleAssignment) -> OracleAssignment:
    if a.n_leaves != b.n_leaves:
        raise OracleSizeError("assignments live on different frames")
    out: dict[int, float] = {}
    conflict = 0.0
    for mask_a, m_a in a.masses.items():
        for mask_b, m_b in b.masses.items():
            product = m_a * m_b
            meet = mask_a & mask_b
            if meet == 0:
                conflict += product
            else:
                out[meet] = out.get(meet, 0.0) + product
    remainder = 1.0 - conflict
    if remainder < _UNDERFLOW:
        raise TotalConflictError("total conflict: nothing left to renormalize")
    k = 1.0 / remainder
    return OracleAssignment(a.n_leaves, {mask: m * k for mask, m in out.items()})


def oracle_combine(
    assignments: list[OracleAssignment], max_leaves: int = DEFAULT_MAX_LEAVES
) -> OracleAssignment:
    """Left fold of Dempster's rule over the given assignments."""
    if not assignments:
        raise ValueError("need at least one assignment")
    n = assignments[0].n_leaves
    if n > max_leaves:
        raise OracleSizeError(f"frame has {n} leaves, oracle limit is {max_leaves}")
    result = assignments[0]
    for other in assignments[1:]:
        result = combine_pair(result, other)
    return result


def support_functions_for_evidence(
    hierarchy: Hierarchy, evidence, max_leaves: int = DEFAULT_MAX_LEAVES
) -> list[OracleAssignment]:
    """One simple support function per observed target mass.

    Confirming masses focus on the node's subset, non-confirming ones on its
    set-theoretic complement within the frame.
    """
    n = len(hierarchy.frame.leaves)
    if n > max_leaves:
        raise OracleSizeError(f"frame has {n} leaves, oracle limit is {max_leaves}")
    full = hierarchy.full_mask
    supports = [vacuous(n)]
    for polarity in (CONFIRM, "disconfirm"):
        source = evidence.confirming if polarity == CONFIRM else evidence.disconfirming
        for node_id in sorted(source):
            focus = hierarchy.mask(node_id)
            if polarity != CONFIRM:
                focus = full & ~focus
            for _item, mass in source[node_id]:
                supports.append(simple_support(n, focus, mass))
    return supports

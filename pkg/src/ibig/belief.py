"""Belief combination over one hierarchy via the three-step technique.

Step 1 folds same-focus masses per node, step 2 aggregates all confirming
belief across the tree in one renormalized pass, and step 3 folds each
node's non-confirming belief into the running vector sequentially, with all
reads inside one combination taken from the pre-combination vector.

For confirming-only evidence on tree nodes the result is exact Dempster
combination; with non-confirming evidence it is the standard hierarchical
approximation (displaced mass is attached to the smallest superset present
in the tree).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import MassRangeError, TotalConflictError, UnknownNodeError
from .kb import Hierarchy

SUM_TOL = 1e-9
UNDERFLOW = 1e-300


@dataclass
class EvidenceInput:
    """Observed target masses per node, with item provenance retained."""

    hierarchy_id: str
    confirming: dict[str, list[tuple[str, float]]] = field(default_factory=dict)
    disconfirming: dict[str, list[tuple[str, float]]] = field(default_factory=dict)

    def add(self, node_id: str, polarity_confirming: bool, item_id: str, mass: float):
        bucket = self.confirming if polarity_confirming else self.disconfirming
        bucket.setdefault(node_id, []).append((item_id, mass))


@dataclass
class NodeMasses:
    """Per-node combined masses from step 1 (zero where nothing was observed)."""

    hierarchy_id: str
    confirm: dict[str, float] = field(default_factory=dict)
    disconfirm: dict[str, float] = field(default_factory=dict)

    def confirm_of(self, node_id: str) -> float:
        return self.confirm.get(node_id, 0.0)

    def disconfirm_of(self, node_id: str) -> float:
        return self.disconfirm.get(node_id, 0.0)


@dataclass
class KRecord:
    """One applied normalization constant, for the audit trace."""

    stage: str  # step2 | step3
    node_id: str | None
    k: float


@dataclass
class BeliefState:
    """Combined mass vector over the tree nodes plus the frame entry."""

    hierarchy: Hierarchy
    masses: dict[str, float]
    theta: float
    k_history: list[KRecord] = field(default_factory=list)

    def mass(self, node_id: str) -> float:
        if node_id == self.hierarchy.root_id:
            return self.theta
        try:
            return self.masses[node_id]
        except KeyError:
            raise UnknownNodeError(
                f"node {node_id!r} is not part of hierarchy {self.hierarchy.hierarchy_id!r}"
            ) from None

    def total(self) -> float:
        return self.theta + sum(self.masses.values())

    def check_normalized(self):
        total = self.total()
        if abs(total - 1.0) > SUM_TOL:
            raise TotalConflictError(f"mass vector sums to {total!r}")
        return self


def combine_same_focus(masses: Iterable[float]) -> float:
    """Fold masses pointed at one focus: 1 - prod(1 - m). Empty input gives 0."""
    remainder = 1.0
    for mass in masses:
        if not 0.0 < mass < 1.0:
            raise MassRangeError(f"mass {mass!r} outside the open interval (0, 1)")
        remainder *= 1.0 - mass
    return 1.0 - remainder


def step1_node_masses(evidence: EvidenceInput, hierarchy: Hierarchy) -> NodeMasses:
    """Combine each node's observed masses into one confirming and one
    non-confirming mass per node."""
    out = NodeMasses(hierarchy_id=hierarchy.hierarchy_id)
    for source, sink in (
        (evidence.confirming, out.confirm),
        (evidence.disconfirming, out.disconfirm),
    ):
        for node_id, pairs in source.items():
            if node_id not in hierarchy.nodes:
                raise UnknownNodeError(
                    f"evidence for unknown node {node_id!r} in hierarchy "
                    f"{hierarchy.hierarchy_id!r}"
                )
            if node_id == hierarchy.root_id:
                # confirming the frame is vacuous; disconfirming it is barred
                # by validation, so root evidence never reaches combination
                continue
            combined = combine_same_focus(mass for _item, mass in pairs)
            if combined > 0.0:
                sink[node_id] = combined
    return out


@dataclass
class ConfirmingDecomposition:
    """Intermediate products of the confirming aggregation.

    For node i: ``focal[i] = c_i * outside[i]`` where ``outside[i]`` is the
    product of (1 - c_j) over every node j that is not a superset of i, and
    ``residue`` is the product over all nodes (the unnormalized frame mass).
    ``normalizer`` is the sum of all focal terms plus the residue.
    """

    focal: dict[str, float]
    outside: dict[str, float]
    residue: float
    normalizer: float
    subtree_focal: dict[str, float]  # sum of focal over the node and its descendants


def confirming_decomposition(
    node_masses: NodeMasses, hierarchy: Hierarchy, confirm: dict[str, float] | None = None
) -> ConfirmingDecomposition:
    """Aggregate a per-node confirming-mass vector across the whole tree."""
    if confirm is None:
        confirm = node_masses.confirm
    residue = 1.0
    for node_id in hierarchy.tree_ids:
        residue *= 1.0 - confirm.get(node_id, 0.0)

    focal: dict[str, float] = {}
    outside: dict[str, float] = {}
    # ancestor-inclusive factor product per node, walked from the root
    along_path: dict[str, float] = {hierarchy.root_id: 1.0}
    for node_id in hierarchy.order:
        node = hierarchy.nodes[node_id]
        if node.parent_id is not None:
            c = confirm.get(node_id, 0.0)
            along_path[node_id] = along_path[node.parent_id] * (1.0 - c)
            out = residue / along_path[node_id]
            outside[node_id] = out
            focal[node_id] = c * out

    normalizer = residue + sum(focal[nid] for nid in hierarchy.tree_ids)
    if normalizer < UNDERFLOW:
        raise TotalConflictError("confirming aggregation underflowed to total conflict")

    subtree_focal: dict[str, float] = {}
    for node_id in reversed(hierarchy.order):
        node = hierarchy.nodes[node_id]
        acc = focal.get(node_id, 0.0)
        for child in node.children:
            acc += subtree_focal[child]
        subtree_focal[node_id] = acc
    return ConfirmingDecomposition(focal, outside, residue, normalizer, subtree_focal)


def step2_aggregate_confirming(
    node_masses: NodeMasses, hierarchy: Hierarchy
) -> BeliefState:
    """Aggregate all confirming node masses into one normalized vector."""
    dec = confirming_decomposition(node_masses, hierarchy)
    k = 1.0 / dec.normalizer
    masses = {nid: dec.focal[nid] * k for nid in hierarchy.tree_ids}
    state = BeliefState(
        hierarchy=hierarchy,
        masses=masses,
        theta=dec.residue * k,
        k_history=[KRecord("step2", None, k)],
    )
    return state.check_normalized()


def disconfirm_combination(
    masses: dict[str, float],
    theta: float,
    hierarchy: Hierarchy,
    node_id: str,
    disconfirm_mass: float,
) -> tuple[dict[str, float], float, float]:
    """Combine one non-confirming support (focused on the node's complement)
    into the running vector.  Every new mass is computed from the incoming
    vector, so enumeration order within the combination cannot matter.

    Returns (new masses, new frame mass, applied K).
    """
    if not 0.0 < disconfirm_mass < 1.0:
        raise MassRangeError(f"mass {disconfirm_mass!r} outside the open interval (0, 1)")
    full = hierarchy.full_mask
    target_mask = hierarchy.mask(node_id)
    complement = full & ~target_mask
    keep = 1.0 - disconfirm_mass

    inside = sum(
        m for nid, m in masses.items() if hierarchy.mask(nid) & ~target_mask == 0
    )
    rem = 1.0 - disconfirm_mass * inside
    if rem < UNDERFLOW:
        raise TotalConflictError(
            f"non-confirming combination at {node_id!r} is totally conflicting"
        )
    k = 1.0 / rem

    new_masses: dict[str, float] = {}
    for nid, m in masses.items():
        mask = hierarchy.mask(nid)
        if mask & ~target_mask == 0:
            # inside the disconfirmed set: conflicts with the complement focus
            new_masses[nid] = k * m * keep
        elif mask & target_mask == 0:
            # disjoint: keeps its mass, and receives the displaced share of
            # the union node when that union is represented in the tree
            union = mask | target_mask
            if union == full:
                donor = theta
            else:
                union_node = hierarchy.mask_to_node.get(union)
                donor = masses.get(union_node, 0.0) if union_node is not None else 0.0
            new_masses[nid] = k * (m + donor * disconfirm_mass)
        else:
            # strict superset: loses the displaced share only when the
            # remainder is itself a tree node; otherwise the displaced mass
            # stays on this node as the smallest represented superset
            remainder_mask = mask & ~target_mask
            if remainder_mask in hierarchy.mask_to_node:
                new_masses[nid] = k * m * keep
            else:
                new_masses[nid] = k * m
    if complement in hierarchy.mask_to_node:
        new_theta = k * theta * keep
    else:
        new_theta = k * theta
    return new_masses, new_theta, k


def step3_apply_nonconfirming(
    state: BeliefState, node_masses: NodeMasses, hierarchy: Hierarchy
) -> BeliefState:
    """Fold every node's non-confirming mass into the state, ascending by
    depth with node-id tie-break (the fold order is part of the contract)."""
    masses = dict(state.masses)
    theta = state.theta
    history = list(state.k_history)
    pending = sorted(
        (nid for nid, m in node_masses.disconfirm.items() if m > 0.0),
        key=lambda nid: (hierarchy.depth(nid), nid),
    )
    for nid in pending:
        masses, theta, k = disconfirm_combination(
            masses, theta, hierarchy, nid, node_masses.disconfirm[nid]
        )
        history.append(KRecord("step3", nid, k))
    state = BeliefState(hierarchy=hierarchy, masses=masses, theta=theta, k_history=history)
    return state.check_normalized()


def compute_belief_state(evidence: EvidenceInput, hierarchy: Hierarchy) -> BeliefState:
    """step 1 -> step 2 -> step 3, deterministically."""
    node_masses = step1_node_masses(evidence, hierarchy)
    state = step2_aggregate_confirming(node_masses, hierarchy)
    return step3_apply_nonconfirming(state, node_masses, hierarchy)


def belief(state: BeliefState, node_id: str) -> float:
    """Total mass committed to the node and everything below it."""
    hierarchy = state.hierarchy
    if node_id not in hierarchy.nodes:
        raise UnknownNodeError(
            f"node {node_id!r} is not part of hierarchy {hierarchy.hierarchy_id!r}"
        )
    if node_id == hierarchy.root_id:
        return state.total()
    mask = hierarchy.mask(node_id)
    return sum(
        m for nid, m in state.masses.items() if hierarchy.mask(nid) & ~mask == 0
    )


def subtree_mass(state: BeliefState, node_id: str) -> float:
    """Sum of current masses over the node and every tree node inside it."""
    return belief(state, node_id)

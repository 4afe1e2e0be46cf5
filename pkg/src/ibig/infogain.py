"""Potential belief masses and the information-increment ranking.

Every node's unanswered items define the belief it could still gain or
lose.  For each node that currently carries mass, five hypothetical
single-source resolutions are evaluated; the absolute change each source
node could cause is credited to that source, and the node with the largest
accumulated increment across all hierarchies is asked about next.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .belief import (
    BeliefState,
    ConfirmingDecomposition,
    NodeMasses,
    combine_same_focus,
    confirming_decomposition,
    subtree_mass,
)
from .errors import TotalConflictError
from .kb import CONFIRM, Hierarchy, KnowledgeBase

# equation tags as exposed in increment tables and the explain surfaces
EQ_WFC = "wFC"   # confirming potential elsewhere in the tree
EQ_SIN = "SIN"   # non-confirming potential on a sibling whose union is represented
EQ_IFN = "IFN"   # non-confirming potential on the node itself or a superset
EQ_SN = "SN"     # non-confirming potential on a subset with represented completion
EQ_NC = "NC"     # confirming potential still open on the node itself
EQ_BOOTSTRAP = "bootstrap"  # cold start: no node carries mass yet

ALL_EQUATIONS = (EQ_WFC, EQ_SIN, EQ_IFN, EQ_SN, EQ_NC)

_UNDERFLOW = 1e-300


@dataclass
class PotentialMasses:
    """Folded a-priori masses of the still-unanswered targets, per node."""

    confirm: dict[str, dict[str, float]] = field(default_factory=dict)
    disconfirm: dict[str, dict[str, float]] = field(default_factory=dict)

    def confirm_of(self, hierarchy_id: str, node_id: str) -> float:
        return self.confirm.get(hierarchy_id, {}).get(node_id, 0.0)

    def disconfirm_of(self, hierarchy_id: str, node_id: str) -> float:
        return self.disconfirm.get(hierarchy_id, {}).get(node_id, 0.0)


def potential_masses(kb: KnowledgeBase, answers: dict[str, str]) -> PotentialMasses:
    """Fold the a-priori masses of unanswered items, per node and polarity.

    Any answered item (present, absent, or unknown) leaves the pool; targets
    on a hierarchy root carry no potential because confirming a whole frame
    cannot move belief.
    """
    raw_c: dict[str, dict[str, list[float]]] = {}
    raw_d: dict[str, dict[str, list[float]]] = {}
    for item in kb.items:
        if item.item_id in answers:
            continue
        for target in item.targets:
            hier = kb.hierarchies_by_id.get(target.hierarchy_id)
            if hier is None or target.node_id == hier.root_id:
                continue
            sink = raw_c if target.polarity == CONFIRM else raw_d
            sink.setdefault(target.hierarchy_id, {}).setdefault(
                target.node_id, []
            ).append(target.mass)

    out = PotentialMasses()
    for raw, sink in ((raw_c, out.confirm), (raw_d, out.disconfirm)):
        for hier_id, nodes in raw.items():
            sink[hier_id] = {
                node_id: combine_same_focus(masses) for node_id, masses in nodes.items()
            }
    return out


# ---------------------------------------------------------------------------
# hypothetical confirming aggregation with a single node's mass augmented

def _hypothetical_single_hat(
    dec: ConfirmingDecomposition,
    hierarchy: Hierarchy,
    node_masses: NodeMasses,
    hat_node: str,
    pot: float,
    eval_node: str,
) -> float:
    """Normalized mass ``eval_node`` takes in the confirming aggregation when
    ``hat_node``'s confirming mass is additionally combined with ``pot``.

    ``eval_node`` must be ``hat_node`` itself or a non-superset of it: those
    are the entries whose value actually changes shape.
    """
    observed = node_masses.confirm_of(hat_node)
    hatted = 1.0 - (1.0 - observed) * (1.0 - pot)
    ratio = 1.0 - pot  # (1 - hatted) / (1 - observed)

    inside = dec.subtree_focal[hat_node]
    own = dec.focal.get(hat_node, 0.0)
    hat_focal = hatted * dec.outside[hat_node]
    normalizer = ratio * (dec.normalizer - inside) + (inside - own) + hat_focal
    if normalizer < _UNDERFLOW:
        raise TotalConflictError("hypothetical aggregation underflowed")
    if eval_node == hat_node:
        return hat_focal / normalizer
    return dec.focal[eval_node] * ratio / normalizer


def _state_subtree(state: BeliefState, hierarchy: Hierarchy) -> dict[str, float]:
    """Per node, the current mass on the node and everything below it."""
    sums: dict[str, float] = {}
    for node_id in reversed(hierarchy.order):
        node = hierarchy.nodes[node_id]
        acc = state.masses.get(node_id, 0.0)
        for child in node.children:
            acc += sums[child]
        sums[node_id] = acc
    return sums


def _union_mass(state: BeliefState, hierarchy: Hierarchy, union_mask: int) -> float:
    if union_mask == hierarchy.full_mask:
        return state.theta
    union_node = hierarchy.mask_to_node.get(union_mask)
    if union_node is None:
        return 0.0
    return state.masses.get(union_node, 0.0)


# ---------------------------------------------------------------------------
# the five single-pair increment equations
#
# Each returns 0.0 when its applicability conditions fail; values are
# absolute differences, so contributions are non-negative by construction.

def increment_wfc(
    state: BeliefState,
    node_masses: NodeMasses,
    potentials: PotentialMasses,
    evidence_node: str,
    source_node: str,
) -> float:
    """Confirming potential on a non-superset source draining the evidence node."""
    hierarchy = state.hierarchy
    pot = potentials.confirm_of(hierarchy.hierarchy_id, source_node)
    if pot <= 0.0 or source_node == evidence_node:
        return 0.0
    src, ev = hierarchy.mask(source_node), hierarchy.mask(evidence_node)
    if ev & ~src == 0:  # source is a superset: equation does not apply
        return 0.0
    actual = state.mass(evidence_node)
    dec = confirming_decomposition(node_masses, hierarchy)
    hyp = _hypothetical_single_hat(
        dec, hierarchy, node_masses, source_node, pot, evidence_node
    )
    return abs(actual - hyp)


def increment_nc(
    state: BeliefState,
    node_masses: NodeMasses,
    potentials: PotentialMasses,
    evidence_node: str,
) -> float:
    """Confirming potential still open on the evidence node itself."""
    hierarchy = state.hierarchy
    pot = potentials.confirm_of(hierarchy.hierarchy_id, evidence_node)
    if pot <= 0.0:
        return 0.0
    actual = state.mass(evidence_node)
    dec = confirming_decomposition(node_masses, hierarchy)
    hyp = _hypothetical_single_hat(
        dec, hierarchy, node_masses, evidence_node, pot, evidence_node
    )
    return abs(actual - hyp)


def increment_sin(
    state: BeliefState,
    potentials: PotentialMasses,
    evidence_node: str,
    source_node: str,
) -> float:
    """Non-confirming potential on a disjoint source whose union with the
    evidence node is represented: belief could flow across."""
    hierarchy = state.hierarchy
    pot = potentials.disconfirm_of(hierarchy.hierarchy_id, source_node)
    if pot <= 0.0:
        return 0.0
    src, ev = hierarchy.mask(source_node), hierarchy.mask(evidence_node)
    if src & ev:
        return 0.0
    union = src | ev
    if union != hierarchy.full_mask and union not in hierarchy.mask_to_node:
        return 0.0
    actual = state.mass(evidence_node)
    conflict = pot * subtree_mass(state, source_node)
    k = 1.0 / (1.0 - conflict)
    hyp = k * (actual + _union_mass(state, hierarchy, union) * pot)
    return abs(actual - hyp)


def increment_ifn(
    state: BeliefState,
    potentials: PotentialMasses,
    evidence_node: str,
    source_node: str,
) -> float:
    """Non-confirming potential on the node itself or a superset."""
    hierarchy = state.hierarchy
    pot = potentials.disconfirm_of(hierarchy.hierarchy_id, source_node)
    if pot <= 0.0:
        return 0.0
    src, ev = hierarchy.mask(source_node), hierarchy.mask(evidence_node)
    if ev & ~src != 0:  # source must be a superset (or the node itself)
        return 0.0
    actual = state.mass(evidence_node)
    conflict = pot * subtree_mass(state, source_node)
    k = 1.0 / (1.0 - conflict)
    hyp = k * actual * (1.0 - pot)
    return abs(actual - hyp)


def increment_sn(
    state: BeliefState,
    potentials: PotentialMasses,
    evidence_node: str,
    source_node: str,
    eq4_literal: bool = False,
) -> float:
    """Non-confirming potential on a strict subset whose sibling completion
    is represented: the evidence node would shed the displaced share."""
    hierarchy = state.hierarchy
    pot = potentials.disconfirm_of(hierarchy.hierarchy_id, source_node)
    if pot <= 0.0 or source_node == evidence_node:
        return 0.0
    src, ev = hierarchy.mask(source_node), hierarchy.mask(evidence_node)
    if src & ~ev != 0 or src == ev:  # source must be a strict subset
        return 0.0
    completion = ev & ~src
    if completion not in hierarchy.mask_to_node:
        return 0.0
    actual = state.mass(evidence_node)
    conflict = pot * subtree_mass(state, source_node)
    k = 1.0 / (1.0 - conflict)
    base = state.mass(source_node) if eq4_literal else actual
    hyp = k * base * (1.0 - pot)
    return abs(actual - hyp)


# ---------------------------------------------------------------------------
# table construction and selection

@dataclass
class Contribution:
    source: str     # evidence-bearing node the hypothetical was evaluated on
    equation: str
    value: float


@dataclass
class IncrementTable:
    """Per hierarchy, per candidate node: accumulated increment contributions."""

    per_hierarchy: dict[str, dict[str, list[Contribution]]] = field(default_factory=dict)

    def contributions(self, hierarchy_id: str, node_id: str) -> list[Contribution]:
        return self.per_hierarchy.get(hierarchy_id, {}).get(node_id, [])

    def total(self, hierarchy_id: str, node_id: str) -> float:
        return sum(c.value for c in self.contributions(hierarchy_id, node_id))

    def rows(self, hierarchy_id: str) -> list[tuple[str, float, list[Contribution]]]:
        """(node, total, contributions) sorted by descending total, ties by id."""
        entries = [
            (node_id, sum(c.value for c in contribs), contribs)
            for node_id, contribs in self.per_hierarchy.get(hierarchy_id, {}).items()
        ]
        entries.sort(key=lambda row: (-row[1], row[0]))
        return entries


def build_increment_table(
    kb: KnowledgeBase,
    states: dict[str, BeliefState],
    node_masses: dict[str, NodeMasses],
    potentials: PotentialMasses,
) -> IncrementTable:
    """Evaluate every applicable equation on every hierarchy independently.

    A hierarchy in which no node carries mass yet is ranked by the bootstrap
    rule instead: each node's aggregated mass computed from the confirming
    potentials alone.
    """
    table = IncrementTable()
    for hierarchy in kb.hierarchies:
        hid = hierarchy.hierarchy_id
        state = states[hid]
        masses1 = node_masses[hid]
        pot_c = potentials.confirm.get(hid, {})
        pot_d = potentials.disconfirm.get(hid, {})
        per_node: dict[str, list[Contribution]] = {}

        bearing = [nid for nid in hierarchy.tree_ids if state.masses.get(nid, 0.0) > 0.0]
        if not bearing:
            if pot_c:
                dec = confirming_decomposition(masses1, hierarchy, confirm=pot_c)
                for nid in hierarchy.tree_ids:
                    if pot_c.get(nid, 0.0) > 0.0:
                        value = dec.focal[nid] / dec.normalizer
                        per_node[nid] = [Contribution(nid, EQ_BOOTSTRAP, value)]
            if per_node:
                table.per_hierarchy[hid] = per_node
            continue

        dec = confirming_decomposition(masses1, hierarchy)
        subtree = _state_subtree(state, hierarchy)
        joint = kb.config.eq1_joint
        joint_hyp: dict[str, float] = {}
        if joint:
            joint_hyp = _joint_hypotheticals(hierarchy, masses1, pot_c, bearing)

        candidates = sorted(set(pot_c) | set(pot_d))
        for ev_node in bearing:
            actual = state.masses[ev_node]
            ev_mask = hierarchy.mask(ev_node)
            for src_node in candidates:
                src_mask = hierarchy.mask(src_node)
                pc = pot_c.get(src_node, 0.0)
                pd = pot_d.get(src_node, 0.0)

                if pc > 0.0:
                    if src_node == ev_node:
                        hyp = _hypothetical_single_hat(
                            dec, hierarchy, masses1, src_node, pc, ev_node
                        )
                        _credit(per_node, src_node, ev_node, EQ_NC, abs(actual - hyp))
                    elif ev_mask & ~src_mask != 0:  # source not a superset
                        if joint:
                            _credit(
                                per_node, src_node, ev_node, EQ_WFC,
                                abs(actual - joint_hyp[ev_node]),
                            )
                        else:
                            hyp = _hypothetical_single_hat(
                                dec, hierarchy, masses1, src_node, pc, ev_node
                            )
                            _credit(per_node, src_node, ev_node, EQ_WFC, abs(actual - hyp))

                if pd > 0.0:
                    if ev_mask & ~src_mask == 0:  # superset or the node itself
                        conflict = pd * subtree[src_node]
                        k = 1.0 / (1.0 - conflict)
                        hyp = k * actual * (1.0 - pd)
                        _credit(per_node, src_node, ev_node, EQ_IFN, abs(actual - hyp))
                    elif src_mask & ev_mask == 0:  # disjoint
                        union = src_mask | ev_mask
                        if union == hierarchy.full_mask or union in hierarchy.mask_to_node:
                            conflict = pd * subtree[src_node]
                            k = 1.0 / (1.0 - conflict)
                            hyp = k * (actual + _union_mass(state, hierarchy, union) * pd)
                            _credit(per_node, src_node, ev_node, EQ_SIN, abs(actual - hyp))
                    else:  # strict subset of the evidence node
                        completion = ev_mask & ~src_mask
                        if completion in hierarchy.mask_to_node:
                            conflict = pd * subtree[src_node]
                            k = 1.0 / (1.0 - conflict)
                            base = (
                                state.masses.get(src_node, 0.0)
                                if kb.config.eq4_literal
                                else actual
                            )
                            hyp = k * base * (1.0 - pd)
                            _credit(per_node, src_node, ev_node, EQ_SN, abs(actual - hyp))

        if per_node:
            table.per_hierarchy[hid] = per_node
    return table


def _credit(per_node, src_node, ev_node, equation, value):
    per_node.setdefault(src_node, []).append(Contribution(ev_node, equation, value))


def _joint_hypotheticals(
    hierarchy: Hierarchy,
    masses1: NodeMasses,
    pot_c: dict[str, float],
    bearing: list[str],
) -> dict[str, float]:
    """Alternative all-sources-at-once confirming hypothetical, one aggregation
    per evidence node with every non-superset's potential applied together."""
    out: dict[str, float] = {}
    for ev_node in bearing:
        ev_mask = hierarchy.mask(ev_node)
        hatted = {}
        for nid in hierarchy.tree_ids:
            observed = masses1.confirm_of(nid)
            pot = pot_c.get(nid, 0.0)
            if pot > 0.0 and nid != ev_node and ev_mask & ~hierarchy.mask(nid) != 0:
                hatted[nid] = 1.0 - (1.0 - observed) * (1.0 - pot)
            elif observed > 0.0:
                hatted[nid] = observed
        dec = confirming_decomposition(masses1, hierarchy, confirm=hatted)
        out[ev_node] = dec.focal[ev_node] / dec.normalizer
    return out


def select_next(
    table: IncrementTable, epsilon_stop: float = 1e-6
) -> tuple[str, str] | None:
    """Global argmax over all hierarchies; ties go to the lexicographically
    smallest (hierarchy, node) pair; below the stop threshold, nothing."""
    best: tuple[str, str] | None = None
    best_value = float("-inf")
    for hid in sorted(table.per_hierarchy):
        for node_id in sorted(table.per_hierarchy[hid]):
            value = table.total(hid, node_id)
            if value > best_value:
                best = (hid, node_id)
                best_value = value
    if best is None or best_value < epsilon_stop:
        return None
    return best

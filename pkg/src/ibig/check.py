"""Randomized agreement checks between the hierarchy engine and the exact oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .belief import EvidenceInput, combine_same_focus, compute_belief_state
from .errors import OracleSizeError
from .kb import CONFIRM, KnowledgeBase
from .oracle import (
    DEFAULT_MAX_LEAVES,
    oracle_combine,
    simple_support,
    support_functions_for_evidence,
    vacuous,
)

STEP1_TOL = 1e-12
EXACTNESS_TOL = 1e-9


@dataclass
class OracleCheckSummary:
    trials: int
    seed: int
    max_step1_deviation: float
    max_exactness_deviation: float

    @property
    def ok(self) -> bool:
        return (
            self.max_step1_deviation <= STEP1_TOL
            and self.max_exactness_deviation <= EXACTNESS_TOL
        )


def step1_deviation(masses: list[float]) -> float:
    """|closed form - iterated pairwise combination| for one same-focus list."""
    closed = combine_same_focus(masses)
    frame = 3  # any frame with a proper subset works; the focus is leaf 0
    acc = vacuous(frame)
    for mass in masses:
        acc = oracle_combine([acc, simple_support(frame, 0b001, mass)])
    return abs(closed - acc.mass(0b001)) if masses else abs(closed - 0.0)


def run_oracle_check(
    kb: KnowledgeBase,
    trials: int = 500,
    seed: int = 0,
    max_leaves: int = DEFAULT_MAX_LEAVES,
) -> OracleCheckSummary:
    """Draw random evidence from the KB's own items and compare engine vs oracle.

    Raises OracleSizeError when any frame exceeds the leaf limit.
    """
    for frame in kb.frames:
        if len(frame.leaves) > max_leaves:
            raise OracleSizeError(
                f"frame {frame.hierarchy_id!r} has {len(frame.leaves)} leaves, "
                f"oracle limit is {max_leaves}"
            )
    rng = random.Random(seed)
    pool = [t.mass for item in kb.items for t in item.targets] or [0.3, 0.5, 0.7]

    max_step1 = 0.0
    for _ in range(trials):
        masses = [rng.choice(pool) for _ in range(rng.randint(0, 6))]
        max_step1 = max(max_step1, step1_deviation(masses))

    max_exact = 0.0
    for _ in range(trials):
        chosen = [item for item in kb.items if rng.random() < 0.5]
        for hier in kb.hierarchies:
            evidence = EvidenceInput(hierarchy_id=hier.hierarchy_id)
            for item in chosen:
                for t in item.targets:
                    if (
                        t.polarity == CONFIRM
                        and t.hierarchy_id == hier.hierarchy_id
                        and t.node_id != hier.root_id
                    ):
                        evidence.add(t.node_id, True, item.item_id, t.mass)
            state = compute_belief_state(evidence, hier)
            exact = oracle_combine(
                support_functions_for_evidence(hier, evidence, max_leaves), max_leaves
            )
            for nid in hier.tree_ids:
                dev = abs(state.masses[nid] - exact.mass(hier.mask(nid)))
                max_exact = max(max_exact, dev)
            max_exact = max(max_exact, abs(state.theta - exact.mass(hier.full_mask)))

    return OracleCheckSummary(
        trials=trials,
        seed=seed,
        max_step1_deviation=max_step1,
        max_exactness_deviation=max_exact,
    )

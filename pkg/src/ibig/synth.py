"""Deterministic synthetic knowledge bases for benchmarks and stress tests."""

from __future__ import annotations

import random

from .kb import (
    CONFIRM,
    DISCONFIRM,
    DataItem,
    EvidenceTarget,
    Frame,
    Hierarchy,
    HierarchyNode,
    KnowledgeBase,
)


def build_synthetic_kb(
    n_hierarchies: int = 8,
    nodes_per_hierarchy: int = 300,
    seed: int = 7,
    disconfirm_share: float = 0.25,
) -> KnowledgeBase:
    """Random forest of strict hierarchies with one data item per node.

    Trees are grown by carving a strict subset of a parent's unassigned
    leaves for each new child, which keeps siblings disjoint and subsets
    strict by construction.
    """
    rng = random.Random(seed)
    frames: list[Frame] = []
    hierarchies: list[Hierarchy] = []
    items: list[DataItem] = []

    for h in range(n_hierarchies):
        hid = f"h{h:02d}"
        n_leaves = nodes_per_hierarchy + rng.randint(50, 150)
        leaves = [f"{hid}_leaf{k:04d}" for k in range(n_leaves)]
        frame = Frame(hierarchy_id=hid, leaves=leaves)
        frames.append(frame)

        full = frame.full_mask
        nodes = [HierarchyNode(node_id=f"{hid}_n0000", mask=full, parent_id=None)]
        # per node: leaves not yet given to any child, as a list of bit indices
        unassigned = {nodes[0].node_id: list(range(n_leaves))}
        growable = [nodes[0].node_id]
        while len(nodes) < nodes_per_hierarchy + 1 and growable:
            parent_id = rng.choice(growable)
            pool = unassigned[parent_id]
            if len(pool) < 2:
                growable.remove(parent_id)
                continue
            take = rng.randint(1, max(1, len(pool) // 2))
            rng.shuffle(pool)
            picked, rest = pool[:take], pool[take:]
            unassigned[parent_id] = rest
            if not rest:
                growable.remove(parent_id)
            child_id = f"{hid}_n{len(nodes):04d}"
            mask = 0
            for bit in picked:
                mask |= 1 << bit
            nodes.append(HierarchyNode(node_id=child_id, mask=mask, parent_id=parent_id))
            unassigned[child_id] = sorted(picked)
            if len(picked) >= 2:
                growable.append(child_id)
        hierarchy = Hierarchy(frame, nodes)
        hierarchies.append(hierarchy)

        for node in nodes[1:]:
            item_id = f"item_{node.node_id}"
            targets = [
                EvidenceTarget(hid, node.node_id, CONFIRM, round(rng.uniform(0.05, 0.6), 4))
            ]
            if rng.random() < disconfirm_share:
                targets.append(
                    EvidenceTarget(
                        hid, node.node_id, DISCONFIRM, round(rng.uniform(0.05, 0.5), 4)
                    )
                )
            items.append(
                DataItem(item_id=item_id, prompt=f"finding for {node.node_id}?", targets=targets)
            )

    return KnowledgeBase(frames, hierarchies, items)

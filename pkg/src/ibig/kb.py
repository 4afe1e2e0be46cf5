"""Knowledge-base model: disjoint hypothesis hierarchies, evidence items, JSON I/O.

A knowledge base holds any number of strict hierarchies, each rooted at the
full frame of its own leaf set, with all leaf identifiers globally unique so
the hierarchies stay pairwise disjoint.  Node subsets are bit-indexed masks
over the owning frame's leaves.  The on-disk format is a single UTF-8 JSON
document (extension ``.ibig.json``).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import DuplicateIdError, InvalidKbError, MissingReferenceError, ParseError

CONFIRM = "confirm"
DISCONFIRM = "disconfirm"
POLARITIES = (CONFIRM, DISCONFIRM)


@dataclass
class Frame:
    """Frame of discernment: the mutually exclusive, exhaustive leaf hypotheses."""

    hierarchy_id: str
    leaves: list[str]

    def __post_init__(self):
        self.index = {leaf: i for i, leaf in enumerate(self.leaves)}
        self.full_mask = (1 << len(self.leaves)) - 1 if self.leaves else 0

    def mask_of(self, names: Iterable[str]) -> int:
        mask = 0
        for name in names:
            try:
                mask |= 1 << self.index[name]
            except KeyError:
                raise MissingReferenceError(
                    f"leaf {name!r} is not part of frame {self.hierarchy_id!r}"
                ) from None
        return mask

    def names_of(self, mask: int) -> list[str]:
        return [leaf for i, leaf in enumerate(self.leaves) if mask >> i & 1]


@dataclass
class HierarchyNode:
    """One hypothesis set in a hierarchy; ``mask`` indexes the frame's leaves."""

    node_id: str
    mask: int
    parent_id: str | None
    children: list[str] = field(default_factory=list)
    depth: int = 0


class Hierarchy:
    """A rooted tree of hypothesis sets over one frame.

    Tree structure (single root, acyclic parent pointers, known ids) is
    enforced at construction; semantic rules (strict subsets, sibling
    disjointness, root covering the frame) are left to :func:`validate` so
    they can be reported together.
    """

    def __init__(self, frame: Frame, nodes: list[HierarchyNode]):
        self.hierarchy_id = frame.hierarchy_id
        self.frame = frame
        self.node_list = nodes
        self.nodes: dict[str, HierarchyNode] = {}
        for node in nodes:
            if node.node_id in self.nodes:
                raise DuplicateIdError(
                    f"duplicate node id {node.node_id!r} in hierarchy {self.hierarchy_id!r}"
                )
            self.nodes[node.node_id] = node

        roots = [n.node_id for n in nodes if n.parent_id is None]
        if not roots:
            raise ParseError(f"hierarchy {self.hierarchy_id!r} has no root node")
        if len(roots) > 1:
            raise ParseError(
                f"hierarchy {self.hierarchy_id!r} has multiple roots: {', '.join(roots)}"
            )
        self.root_id = roots[0]

        for node in nodes:
            node.children = []
        for node in nodes:
            if node.parent_id is not None:
                parent = self.nodes.get(node.parent_id)
                if parent is None:
                    raise MissingReferenceError(
                        f"node {node.node_id!r} references missing parent "
                        f"{node.parent_id!r} in hierarchy {self.hierarchy_id!r}"
                    )
                parent.children.append(node.node_id)

        # depth by walk from the root; unreachable nodes mean a parent cycle
        seen = 0
        stack = [(self.root_id, 0)]
        while stack:
            node_id, depth = stack.pop()
            node = self.nodes[node_id]
            node.depth = depth
            seen += 1
            for child in node.children:
                stack.append((child, depth + 1))
        if seen != len(nodes):
            raise ParseError(
                f"hierarchy {self.hierarchy_id!r} contains a parent cycle"
            )

        for node in nodes:
            node.children.sort()
        # canonical enumeration: ascending depth, ties by node id; root first
        self.order = sorted(self.nodes, key=lambda nid: (self.nodes[nid].depth, nid))
        self.tree_ids = [nid for nid in self.order if nid != self.root_id]
        self.mask_to_node = {}
        for nid in self.order:
            self.mask_to_node.setdefault(self.nodes[nid].mask, nid)

    @property
    def full_mask(self) -> int:
        return self.frame.full_mask

    def mask(self, node_id: str) -> int:
        return self.nodes[node_id].mask

    def depth(self, node_id: str) -> int:
        return self.nodes[node_id].depth


@dataclass
class EvidenceTarget:
    """A-priori mass an item commits toward one node when activated."""

    hierarchy_id: str
    node_id: str
    polarity: str  # confirm | disconfirm
    mass: float


@dataclass
class DataItem:
    """An observable finding: a question prompt plus its evidence targets."""

    item_id: str
    prompt: str
    targets: list[EvidenceTarget]


_CONFIG_DEFAULTS = {
    "epsilon_stop": 1e-6,
    "eq4_literal": False,
    "eq1_joint": False,
    "batch": False,
}


@dataclass
class EngineConfig:
    """Engine parameters carried by the KB file's optional ``config`` object."""

    epsilon_stop: float = 1e-6
    eq4_literal: bool = False
    eq1_joint: bool = False
    batch: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        unknown = set(data) - set(_CONFIG_DEFAULTS)
        if unknown:
            raise ParseError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kwargs = {}
        for key, default in _CONFIG_DEFAULTS.items():
            if key not in data:
                continue
            value = data[key]
            if isinstance(default, bool):
                if not isinstance(value, bool):
                    raise ParseError(f"config key {key!r} must be a boolean")
            elif not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ParseError(f"config key {key!r} must be a number")
            kwargs[key] = value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out = {}
        for key, default in _CONFIG_DEFAULTS.items():
            value = getattr(self, key)
            if value != default:
                out[key] = value
        return out


class KnowledgeBase:
    """Immutable-after-load container for frames, hierarchies, items, config."""

    def __init__(
        self,
        frames: list[Frame],
        hierarchies: list[Hierarchy],
        items: list[DataItem],
        config: EngineConfig | None = None,
    ):
        self.frames = frames
        self.hierarchies = hierarchies
        self.items = items
        self.config = config or EngineConfig()
        self.frames_by_id = {f.hierarchy_id: f for f in frames}
        self.hierarchies_by_id = {h.hierarchy_id: h for h in hierarchies}
        self.items_by_id = {i.item_id: i for i in items}

    def hierarchy(self, hierarchy_id: str) -> Hierarchy:
        try:
            return self.hierarchies_by_id[hierarchy_id]
        except KeyError:
            raise MissingReferenceError(f"unknown hierarchy {hierarchy_id!r}") from None

    def fingerprint(self) -> str:
        """Content hash of the canonical serialization."""
        return hashlib.sha256(save(self).encode("utf-8")).hexdigest()

    def semantic_key(self):
        """Canonical structure used for round-trip equality checks."""
        return (
            {f.hierarchy_id: tuple(f.leaves) for f in self.frames},
            {
                h.hierarchy_id: {
                    n.node_id: (n.mask, n.parent_id) for n in h.node_list
                }
                for h in self.hierarchies
            },
            {
                i.item_id: (
                    i.prompt,
                    tuple(
                        sorted(
                            (t.hierarchy_id, t.node_id, t.polarity, t.mass)
                            for t in i.targets
                        )
                    ),
                )
                for i in self.items
            },
            self.config,
        )

    def __eq__(self, other):
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return self.semantic_key() == other.semantic_key()


# ---------------------------------------------------------------------------
# validation

@dataclass
class Violation:
    rule: str
    location: str
    message: str

    def __str__(self):
        return f"{self.rule} at {self.location}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, rule: str, location: str, message: str):
        self.violations.append(Violation(rule, location, message))

    def warn(self, rule: str, location: str, message: str):
        self.warnings.append(Violation(rule, location, message))


def validate(kb: KnowledgeBase) -> ValidationReport:
    """Check every structural rule; the report lists all violations, not the first."""
    report = ValidationReport()

    seen_frames: dict[str, str] = {}
    leaf_owner: dict[str, str] = {}
    for frame in kb.frames:
        loc = f"frame:{frame.hierarchy_id}"
        if frame.hierarchy_id in seen_frames:
            report.add("dup-id", loc, "duplicate frame id")
        seen_frames[frame.hierarchy_id] = loc
        if not frame.leaves:
            report.add("frame-leaves-empty", loc, "frame has no leaves")
        dupes = {l for l in frame.leaves if frame.leaves.count(l) > 1}
        for leaf in sorted(dupes):
            report.add("frame-leaf-dup", loc, f"leaf {leaf!r} listed more than once")
        for leaf in frame.leaves:
            if leaf in leaf_owner and leaf_owner[leaf] != frame.hierarchy_id:
                report.add(
                    "disjointness",
                    loc,
                    f"leaf {leaf!r} already belongs to frame {leaf_owner[leaf]!r}",
                )
            leaf_owner.setdefault(leaf, frame.hierarchy_id)

    hier_seen: set[str] = set()
    for hier in kb.hierarchies:
        loc = f"hierarchy:{hier.hierarchy_id}"
        if hier.hierarchy_id in hier_seen:
            report.add("dup-id", loc, "two hierarchies share one frame")
        hier_seen.add(hier.hierarchy_id)
        if hier.hierarchy_id not in kb.frames_by_id:
            report.add("missing-ref", loc, "hierarchy references a missing frame")

        root = hier.nodes[hier.root_id]
        if root.mask != hier.full_mask:
            report.add(
                "root-frame",
                f"{loc}/node:{root.node_id}",
                "root subset must equal the full frame",
            )
        if len(hier.nodes) == 1:
            report.warn("trivial-hierarchy", loc, "hierarchy has no node beyond the root")

        masks_seen: dict[int, str] = {}
        for nid in hier.order:
            node = hier.nodes[nid]
            nloc = f"{loc}/node:{nid}"
            if node.mask == 0:
                report.add("node-empty", nloc, "node subset is empty")
            if node.mask in masks_seen:
                report.add(
                    "dup-subset", nloc, f"same subset as node {masks_seen[node.mask]!r}"
                )
            else:
                masks_seen[node.mask] = nid
            if node.parent_id is not None:
                parent = hier.nodes[node.parent_id]
                if node.mask & ~parent.mask:
                    report.add("strict-subset", nloc, "child is not a subset of its parent")
                elif node.mask == parent.mask:
                    report.add("strict-subset", nloc, "child subset equals its parent's")
            for a_id, b_id in _pairs(node.children):
                if hier.nodes[a_id].mask & hier.nodes[b_id].mask:
                    report.add(
                        "sibling-disjoint",
                        f"{loc}/node:{a_id}",
                        f"overlaps sibling {b_id!r}",
                    )

    for frame in kb.frames:
        if frame.hierarchy_id not in hier_seen:
            report.warn(
                "unused-frame", f"frame:{frame.hierarchy_id}", "frame has no hierarchy"
            )

    items_seen: set[str] = set()
    for item in kb.items:
        iloc = f"item:{item.item_id}"
        if item.item_id in items_seen:
            report.add("dup-id", iloc, "duplicate item id")
        items_seen.add(item.item_id)
        if not item.targets:
            report.add("item-no-targets", iloc, "item has no evidence targets")
        per_key: set[tuple[str, str, str]] = set()
        for k, target in enumerate(item.targets):
            tloc = f"{iloc}/target:{k}"
            if not 0.0 < target.mass < 1.0:
                report.add(
                    "mass-range",
                    tloc,
                    f"a-priori mass {target.mass!r} outside the open interval (0, 1)",
                )
            if target.polarity not in POLARITIES:
                report.add("polarity", tloc, f"unknown polarity {target.polarity!r}")
                continue
            hier = kb.hierarchies_by_id.get(target.hierarchy_id)
            if hier is None:
                report.add(
                    "missing-ref", tloc, f"unknown hierarchy {target.hierarchy_id!r}"
                )
                continue
            if target.node_id not in hier.nodes:
                report.add("missing-ref", tloc, f"unknown node {target.node_id!r}")
                continue
            key = (target.hierarchy_id, target.node_id, target.polarity)
            if key in per_key:
                report.add(
                    "target-dup",
                    tloc,
                    f"second {target.polarity} target for node {target.node_id!r}",
                )
            per_key.add(key)
            if target.node_id == hier.root_id:
                if target.polarity == DISCONFIRM:
                    report.add(
                        "root-disconfirm",
                        tloc,
                        "disconfirming the root would commit mass to the empty set",
                    )
                else:
                    report.warn(
                        "root-confirm",
                        tloc,
                        "confirming the root is vacuous and contributes nothing",
                    )

    return report


def _pairs(ids: list[str]):
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            yield ids[i], ids[j]


# ---------------------------------------------------------------------------
# JSON document format

def load(document: str) -> KnowledgeBase:
    """Parse a KB document. Raises ParseError / MissingReferenceError / DuplicateIdError."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object")
    unknown = set(data) - {"frames", "hierarchies", "items", "config"}
    if unknown:
        raise ParseError(f"unknown top-level keys: {', '.join(sorted(unknown))}")

    frames: list[Frame] = []
    for k, raw in enumerate(_expect_array(data, "frames")):
        loc = f"frames[{k}]"
        frames.append(
            Frame(
                hierarchy_id=_expect_str(raw, "id", loc),
                leaves=[_as_str(v, f"{loc}.leaves") for v in _expect_array(raw, "leaves", loc)],
            )
        )
    frames_by_id: dict[str, Frame] = {}
    for frame in frames:
        if frame.hierarchy_id in frames_by_id:
            raise DuplicateIdError(f"duplicate frame id {frame.hierarchy_id!r}")
        frames_by_id[frame.hierarchy_id] = frame

    hierarchies: list[Hierarchy] = []
    for k, raw in enumerate(_expect_array(data, "hierarchies")):
        loc = f"hierarchies[{k}]"
        frame_id = _expect_str(raw, "frame", loc)
        frame = frames_by_id.get(frame_id)
        if frame is None:
            raise MissingReferenceError(f"{loc} references missing frame {frame_id!r}")
        nodes = []
        for j, rawnode in enumerate(_expect_array(raw, "nodes", loc)):
            nloc = f"{loc}.nodes[{j}]"
            node_id = _expect_str(rawnode, "id", nloc)
            leaves = rawnode.get("leaves")
            if leaves == "all":
                mask = frame.full_mask
            elif isinstance(leaves, list):
                mask = frame.mask_of(_as_str(v, f"{nloc}.leaves") for v in leaves)
            else:
                raise ParseError(f'{nloc}.leaves must be a list of leaves or "all"')
            parent = rawnode.get("parent")
            if parent is not None and not isinstance(parent, str):
                raise ParseError(f"{nloc}.parent must be an id or null")
            extra = set(rawnode) - {"id", "leaves", "parent"}
            if extra:
                raise ParseError(f"{nloc} unknown keys: {', '.join(sorted(extra))}")
            nodes.append(HierarchyNode(node_id=node_id, mask=mask, parent_id=parent))
        extra = set(raw) - {"frame", "nodes"}
        if extra:
            raise ParseError(f"{loc} unknown keys: {', '.join(sorted(extra))}")
        hierarchies.append(Hierarchy(frame, nodes))
    by_id: set[str] = set()
    for hier in hierarchies:
        if hier.hierarchy_id in by_id:
            raise DuplicateIdError(f"two hierarchies declared for frame {hier.hierarchy_id!r}")
        by_id.add(hier.hierarchy_id)

    items: list[DataItem] = []
    item_ids: set[str] = set()
    for k, raw in enumerate(_expect_array(data, "items")):
        loc = f"items[{k}]"
        item_id = _expect_str(raw, "id", loc)
        if item_id in item_ids:
            raise DuplicateIdError(f"duplicate item id {item_id!r}")
        item_ids.add(item_id)
        targets = []
        for j, rawt in enumerate(_expect_array(raw, "targets", loc)):
            tloc = f"{loc}.targets[{j}]"
            hier_id = _expect_str(rawt, "hierarchy", tloc)
            node_id = _expect_str(rawt, "node", tloc)
            polarity = _expect_str(rawt, "polarity", tloc)
            mass = rawt.get("mass")
            if not isinstance(mass, (int, float)) or isinstance(mass, bool):
                raise ParseError(f"{tloc}.mass must be a number")
            hier = next((h for h in hierarchies if h.hierarchy_id == hier_id), None)
            if hier is None:
                raise MissingReferenceError(f"{tloc} references missing hierarchy {hier_id!r}")
            if node_id not in hier.nodes:
                raise MissingReferenceError(f"{tloc} references missing node {node_id!r}")
            targets.append(EvidenceTarget(hier_id, node_id, polarity, float(mass)))
        extra = set(raw) - {"id", "prompt", "targets"}
        if extra:
            raise ParseError(f"{loc} unknown keys: {', '.join(sorted(extra))}")
        items.append(DataItem(item_id=item_id, prompt=str(raw.get("prompt", "")), targets=targets))

    raw_config = data.get("config", {})
    if not isinstance(raw_config, dict):
        raise ParseError("config must be an object")
    config = EngineConfig.from_dict(raw_config)

    return KnowledgeBase(frames, hierarchies, items, config)


def save(kb: KnowledgeBase) -> str:
    """Serialize a valid KB; refuses when validation reports violations."""
    report = validate(kb)
    if not report.ok:
        head = "; ".join(str(v) for v in report.violations[:3])
        raise InvalidKbError(f"refusing to serialize invalid KB: {head}")
    doc: dict[str, Any] = {
        "frames": [
            {"id": f.hierarchy_id, "leaves": list(f.leaves)} for f in kb.frames
        ],
        "hierarchies": [
            {
                "frame": h.hierarchy_id,
                "nodes": [
                    {
                        "id": n.node_id,
                        "leaves": "all" if n.mask == h.full_mask else h.frame.names_of(n.mask),
                        "parent": n.parent_id,
                    }
                    for n in (h.nodes[nid] for nid in h.order)
                ],
            }
            for h in kb.hierarchies
        ],
        "items": [
            {
                "id": i.item_id,
                "prompt": i.prompt,
                "targets": [
                    {
                        "hierarchy": t.hierarchy_id,
                        "node": t.node_id,
                        "polarity": t.polarity,
                        "mass": t.mass,
                    }
                    for t in i.targets
                ],
            }
            for i in kb.items
        ],
        "config": kb.config.to_dict(),
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def load_file(path) -> KnowledgeBase:
    with open(path, encoding="utf-8") as fh:
        return load(fh.read())


def save_file(kb: KnowledgeBase, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(save(kb))


def _expect_array(data: dict, key: str, where: str = "document") -> list:
    value = data.get(key, [])
    if not isinstance(value, list):
        raise ParseError(f"{where}.{key} must be an array")
    return value


def _expect_str(data, key: str, where: str = "document") -> str:
    if not isinstance(data, dict):
        raise ParseError(f"{where} must be an object")
    value = data.get(key)
    if not isinstance(value, str) or not value:
        raise ParseError(f"{where}.{key} must be a non-empty string")
    return value


def _as_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise ParseError(f"{where} entries must be strings")
    return value

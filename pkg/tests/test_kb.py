"""Knowledge-base model: validation rules, JSON round trips, load errors."""

import json
from pathlib import Path

import pytest

from ibig.errors import (
    DuplicateIdError,
    InvalidKbError,
    MissingReferenceError,
    ParseError,
)
from ibig.kb import (
    CONFIRM,
    DISCONFIRM,
    DataItem,
    EngineConfig,
    EvidenceTarget,
    Frame,
    Hierarchy,
    HierarchyNode,
    KnowledgeBase,
    load,
    save,
    validate,
)

FIXTURES = Path(__file__).parent.parent / "fixtures"
FIXTURE_NAMES = ["kb_aphasia_toy", "single_path", "switching_demo"]


def minimal_kb(with_items=False) -> KnowledgeBase:
    frame = Frame("h1", ["a", "b"])
    hier = Hierarchy(
        frame,
        [
            HierarchyNode("root", 0b11, None),
            HierarchyNode("A", 0b01, "root"),
            HierarchyNode("B", 0b10, "root"),
        ],
    )
    items = []
    if with_items:
        items = [DataItem("i1", "a?", [EvidenceTarget("h1", "A", CONFIRM, 0.5)])]
    return KnowledgeBase([frame], [hier], items)


def rules_of(report):
    return {v.rule for v in report.violations}


class TestValidate:
    def test_minimal_legal_tree_is_clean(self):
        report = validate(minimal_kb())
        assert report.ok and not report.warnings

    def test_shared_leaf_across_frames_is_disjointness_violation(self):
        f1, f2 = Frame("h1", ["a", "b"]), Frame("h2", ["b", "c"])
        h1 = Hierarchy(f1, [HierarchyNode("r1", 0b11, None)])
        h2 = Hierarchy(f2, [HierarchyNode("r2", 0b11, None)])
        report = validate(KnowledgeBase([f1, f2], [h1, h2], []))
        assert "disjointness" in rules_of(report)

    def test_child_equal_to_parent_is_strict_subset_violation(self):
        frame = Frame("h1", ["a", "b"])
        hier = Hierarchy(
            frame,
            [HierarchyNode("root", 0b11, None), HierarchyNode("copy", 0b11, "root")],
        )
        report = validate(KnowledgeBase([frame], [hier], []))
        assert "strict-subset" in rules_of(report)
        assert "dup-subset" in rules_of(report)

    def test_child_escaping_parent_is_strict_subset_violation(self):
        frame = Frame("h1", ["a", "b", "c"])
        hier = Hierarchy(
            frame,
            [
                HierarchyNode("root", 0b111, None),
                HierarchyNode("P", 0b001, "root"),
                HierarchyNode("kid", 0b011, "P"),
            ],
        )
        assert "strict-subset" in rules_of(validate(KnowledgeBase([frame], [hier], [])))

    def test_overlapping_siblings_flagged(self):
        frame = Frame("h1", ["a", "b", "c"])
        hier = Hierarchy(
            frame,
            [
                HierarchyNode("root", 0b111, None),
                HierarchyNode("P", 0b011, "root"),
                HierarchyNode("Q", 0b110, "root"),
            ],
        )
        assert "sibling-disjoint" in rules_of(validate(KnowledgeBase([frame], [hier], [])))

    def test_root_not_covering_frame_flagged(self):
        frame = Frame("h1", ["a", "b"])
        hier = Hierarchy(frame, [HierarchyNode("root", 0b01, None)])
        assert "root-frame" in rules_of(validate(KnowledgeBase([frame], [hier], [])))

    def test_empty_node_flagged(self):
        frame = Frame("h1", ["a", "b"])
        hier = Hierarchy(
            frame,
            [HierarchyNode("root", 0b11, None), HierarchyNode("none", 0b00, "root")],
        )
        assert "node-empty" in rules_of(validate(KnowledgeBase([frame], [hier], [])))

    def test_root_only_hierarchy_warns_but_passes(self):
        frame = Frame("h1", ["a"])
        hier = Hierarchy(frame, [HierarchyNode("root", 0b1, None)])
        report = validate(KnowledgeBase([frame], [hier], []))
        assert report.ok
        assert any(w.rule == "trivial-hierarchy" for w in report.warnings)

    def test_mass_out_of_range_flagged(self):
        kb = minimal_kb()
        for bad in (0.0, 1.0, -0.2, 1.5):
            kb.items = [DataItem("i1", "?", [EvidenceTarget("h1", "A", CONFIRM, bad)])]
            assert "mass-range" in rules_of(validate(kb)), bad

    def test_duplicate_target_polarity_flagged(self):
        kb = minimal_kb()
        kb.items = [
            DataItem(
                "i1",
                "?",
                [
                    EvidenceTarget("h1", "A", CONFIRM, 0.3),
                    EvidenceTarget("h1", "A", CONFIRM, 0.4),
                ],
            )
        ]
        assert "target-dup" in rules_of(validate(kb))

    def test_confirm_and_disconfirm_on_same_node_allowed(self):
        kb = minimal_kb()
        kb.items = [
            DataItem(
                "i1",
                "?",
                [
                    EvidenceTarget("h1", "A", CONFIRM, 0.3),
                    EvidenceTarget("h1", "A", DISCONFIRM, 0.4),
                ],
            )
        ]
        assert validate(kb).ok

    def test_dangling_target_reference_flagged(self):
        kb = minimal_kb()
        kb.items = [DataItem("i1", "?", [EvidenceTarget("h1", "missing", CONFIRM, 0.3)])]
        assert "missing-ref" in rules_of(validate(kb))
        kb.items = [DataItem("i1", "?", [EvidenceTarget("nohier", "A", CONFIRM, 0.3)])]
        assert "missing-ref" in rules_of(validate(kb))

    def test_root_disconfirm_is_error_root_confirm_is_warning(self):
        kb = minimal_kb()
        kb.items = [DataItem("i1", "?", [EvidenceTarget("h1", "root", DISCONFIRM, 0.3)])]
        assert "root-disconfirm" in rules_of(validate(kb))
        kb.items = [DataItem("i1", "?", [EvidenceTarget("h1", "root", CONFIRM, 0.3)])]
        report = validate(kb)
        assert report.ok
        assert any(w.rule == "root-confirm" for w in report.warnings)

    def test_all_violations_reported_not_just_first(self):
        f1, f2 = Frame("h1", ["a", "b"]), Frame("h2", ["b"])
        h1 = Hierarchy(
            f1, [HierarchyNode("r1", 0b11, None), HierarchyNode("copy", 0b11, "r1")]
        )
        h2 = Hierarchy(f2, [HierarchyNode("r2", 0b1, None)])
        kb = KnowledgeBase(
            [f1, f2],
            [h1, h2],
            [DataItem("i1", "?", [EvidenceTarget("h1", "gone", CONFIRM, 2.0)])],
        )
        rules = rules_of(validate(kb))
        assert {"disjointness", "strict-subset", "missing-ref", "mass-range"} <= rules

    def test_fixtures_validate_clean(self):
        for name in FIXTURE_NAMES:
            kb = load((FIXTURES / f"{name}.ibig.json").read_text(encoding="utf-8"))
            report = validate(kb)
            assert report.ok, (name, [str(v) for v in report.violations])


class TestLaminarProperties:
    def test_fixture_node_subsets_form_laminar_family(self):
        for name in FIXTURE_NAMES:
            kb = load((FIXTURES / f"{name}.ibig.json").read_text(encoding="utf-8"))
            for hier in kb.hierarchies:
                masks = [hier.mask(nid) for nid in hier.order]
                for i, a in enumerate(masks):
                    for b in masks[i + 1 :]:
                        meet = a & b
                        assert meet == 0 or meet == a or meet == b

    def test_children_union_within_parent_but_not_necessarily_equal(self):
        kb = load((FIXTURES / "kb_aphasia_toy.ibig.json").read_text(encoding="utf-8"))
        saw_gap = False
        for hier in kb.hierarchies:
            for nid in hier.order:
                node = hier.nodes[nid]
                union = 0
                for child in node.children:
                    union |= hier.mask(child)
                assert union & ~node.mask == 0
                if node.children and union != node.mask:
                    saw_gap = True
        assert saw_gap, "fixture should exercise non-exhaustive children"


class TestLoad:
    def test_minimal_document(self):
        kb = load(
            json.dumps(
                {
                    "frames": [{"id": "h1", "leaves": ["x"]}],
                    "hierarchies": [
                        {"frame": "h1", "nodes": [{"id": "r", "leaves": "all", "parent": None}]}
                    ],
                    "items": [],
                }
            )
        )
        assert len(kb.hierarchies) == 1
        assert kb.hierarchies[0].root_id == "r"
        assert validate(kb).ok

    def test_missing_parent_reference_names_the_id(self):
        doc = {
            "frames": [{"id": "h1", "leaves": ["x", "y"]}],
            "hierarchies": [
                {
                    "frame": "h1",
                    "nodes": [
                        {"id": "r", "leaves": "all", "parent": None},
                        {"id": "n1", "leaves": ["x"], "parent": "n99"},
                    ],
                }
            ],
            "items": [],
        }
        with pytest.raises(MissingReferenceError, match="n99"):
            load(json.dumps(doc))

    def test_missing_target_reference_names_the_id(self):
        doc = {
            "frames": [{"id": "h1", "leaves": ["x"]}],
            "hierarchies": [
                {"frame": "h1", "nodes": [{"id": "r", "leaves": "all", "parent": None}]}
            ],
            "items": [
                {
                    "id": "i1",
                    "prompt": "?",
                    "targets": [
                        {"hierarchy": "h1", "node": "n99", "polarity": "confirm", "mass": 0.5}
                    ],
                }
            ],
        }
        with pytest.raises(MissingReferenceError, match="n99"):
            load(json.dumps(doc))

    def test_duplicate_ids_rejected(self):
        doc = {
            "frames": [{"id": "h1", "leaves": ["x"]}, {"id": "h1", "leaves": ["y"]}],
            "hierarchies": [],
            "items": [],
        }
        with pytest.raises(DuplicateIdError):
            load(json.dumps(doc))

    def test_bad_json_reports_position(self):
        with pytest.raises(ParseError) as err:
            load('{"frames": [,]}')
        assert err.value.line == 1
        assert "line 1" in str(err.value)

    def test_multiple_roots_rejected(self):
        doc = {
            "frames": [{"id": "h1", "leaves": ["x", "y"]}],
            "hierarchies": [
                {
                    "frame": "h1",
                    "nodes": [
                        {"id": "r1", "leaves": "all", "parent": None},
                        {"id": "r2", "leaves": ["x"], "parent": None},
                    ],
                }
            ],
            "items": [],
        }
        with pytest.raises(ParseError, match="multiple roots"):
            load(json.dumps(doc))

    def test_parent_cycle_rejected(self):
        doc = {
            "frames": [{"id": "h1", "leaves": ["x", "y"]}],
            "hierarchies": [
                {
                    "frame": "h1",
                    "nodes": [
                        {"id": "r", "leaves": "all", "parent": None},
                        {"id": "a", "leaves": ["x"], "parent": "b"},
                        {"id": "b", "leaves": ["x"], "parent": "a"},
                    ],
                }
            ],
            "items": [],
        }
        with pytest.raises(ParseError, match="cycle"):
            load(json.dumps(doc))

    def test_unknown_config_key_rejected(self):
        doc = {
            "frames": [{"id": "h1", "leaves": ["x"]}],
            "hierarchies": [
                {"frame": "h1", "nodes": [{"id": "r", "leaves": "all", "parent": None}]}
            ],
            "items": [],
            "config": {"epsilom_stop": 1e-4},
        }
        with pytest.raises(ParseError, match="epsilom_stop"):
            load(json.dumps(doc))

    def test_config_values_parsed(self):
        doc = {
            "frames": [{"id": "h1", "leaves": ["x"]}],
            "hierarchies": [
                {"frame": "h1", "nodes": [{"id": "r", "leaves": "all", "parent": None}]}
            ],
            "items": [],
            "config": {"epsilon_stop": 0.001, "eq4_literal": True, "batch": True},
        }
        kb = load(json.dumps(doc))
        assert kb.config == EngineConfig(epsilon_stop=0.001, eq4_literal=True, batch=True)


class TestSave:
    def test_round_trip_fixed_point_on_all_fixtures(self):
        for name in FIXTURE_NAMES:
            text = (FIXTURES / f"{name}.ibig.json").read_text(encoding="utf-8")
            kb = load(text)
            once = save(kb)
            again = save(load(once))
            assert once == again, name
            assert load(once) == kb, name

    def test_unicode_prompt_survives_round_trip(self):
        kb = load((FIXTURES / "kb_aphasia_toy.ibig.json").read_text(encoding="utf-8"))
        prompt = kb.items_by_id["impaired_repetition"].prompt
        assert "beeinträchtigt" in prompt and "„Küchenuhr“" in prompt
        assert load(save(kb)).items_by_id["impaired_repetition"].prompt == prompt

    def test_refuses_invalid_kb(self):
        f1, f2 = Frame("h1", ["a"]), Frame("h2", ["a"])
        kb = KnowledgeBase(
            [f1, f2],
            [Hierarchy(f1, [HierarchyNode("r1", 0b1, None)]),
             Hierarchy(f2, [HierarchyNode("r2", 0b1, None)])],
            [],
        )
        with pytest.raises(InvalidKbError):
            save(kb)

    def test_config_round_trips(self):
        kb = minimal_kb()
        kb.config = EngineConfig(epsilon_stop=1e-4, eq1_joint=True)
        assert load(save(kb)).config == kb.config

"""Consultation sessions: answer ingestion, recomputation, question selection.

A session is a deterministic function of the knowledge base and the answers
given so far.  After every answer the belief state of every hierarchy is
recomputed from scratch, the increment table is rebuilt, and the next
question is selected globally; a change of hierarchy between consecutive
selections is logged as a switch event.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .belief import (
    BeliefState,
    EvidenceInput,
    NodeMasses,
    belief,
    compute_belief_state,
    step1_node_masses,
)
from .errors import (
    DuplicateAnswerError,
    InvalidKbError,
    SessionFinishedError,
    UnknownItemError,
)
from .fmt import round12
from .infogain import (
    IncrementTable,
    PotentialMasses,
    build_increment_table,
    potential_masses,
    select_next,
)
from .kb import CONFIRM, KnowledgeBase, validate

PRESENT = "present"
ABSENT = "absent"
UNKNOWN = "unknown"
ANSWER_VALUES = (PRESENT, ABSENT, UNKNOWN)

ACTIVE = "active"
FINISHED = "finished"


@dataclass
class Answer:
    item_id: str
    value: str
    seq: int
    timestamp: float = 0.0


@dataclass
class ReportRow:
    node_id: str
    is_frame: bool
    mass: float
    belief: float
    pot_confirm: float
    pot_disconfirm: float


class Session:
    """Single-writer consultation over an immutable knowledge base."""

    def __init__(self, kb: KnowledgeBase):
        report = validate(kb)
        if not report.ok:
            head = "; ".join(str(v) for v in report.violations[:3])
            raise InvalidKbError(f"knowledge base fails validation: {head}")
        self.kb = kb
        self.answers: dict[str, Answer] = {}
        self.trace: list[dict] = []
        self.status = ACTIVE
        self.selected: tuple[str, str] | None = None
        self.states: dict[str, BeliefState] = {}
        self.node_masses: dict[str, NodeMasses] = {}
        self.potentials: PotentialMasses = PotentialMasses()
        self.table: IncrementTable = IncrementTable()
        self._pinned: tuple[str, str] | None = None
        self._recompute()
        self._select(initial=True)

    # ------------------------------------------------------------------
    @property
    def step(self) -> int:
        return len(self.answers)

    def _evidence(self) -> dict[str, EvidenceInput]:
        evidence = {
            h.hierarchy_id: EvidenceInput(hierarchy_id=h.hierarchy_id)
            for h in self.kb.hierarchies
        }
        for answer in sorted(self.answers.values(), key=lambda a: a.seq):
            if answer.value == UNKNOWN:
                continue
            wanted = CONFIRM if answer.value == PRESENT else "disconfirm"
            item = self.kb.items_by_id[answer.item_id]
            for target in item.targets:
                if target.polarity != wanted:
                    continue
                hier = self.kb.hierarchies_by_id[target.hierarchy_id]
                if target.node_id == hier.root_id:
                    continue  # vacuous by construction, flagged at validation
                evidence[target.hierarchy_id].add(
                    target.node_id, wanted == CONFIRM, answer.item_id, target.mass
                )
        return evidence

    def _recompute(self):
        evidence = self._evidence()
        answered = {a.item_id: a.value for a in self.answers.values()}
        self.states = {}
        self.node_masses = {}
        for hier in self.kb.hierarchies:
            hid = hier.hierarchy_id
            masses1 = step1_node_masses(evidence[hid], hier)
            self.node_masses[hid] = masses1
            self.states[hid] = compute_belief_state(evidence[hid], hier)
        self.potentials = potential_masses(self.kb, answered)
        self.table = build_increment_table(
            self.kb, self.states, self.node_masses, self.potentials
        )

    def _select(self, initial: bool = False):
        previous = self.selected
        choice = select_next(self.table, self.kb.config.epsilon_stop)

        if (
            self.kb.config.batch
            and not initial
            and self._pinned is not None
            and self._unknown_items(*self._pinned)
        ):
            # batch mode keeps collecting the pinned node until it runs dry
            choice = self._pinned

        if choice is None:
            self.status = FINISHED
            self.selected = None
            self._pinned = None
            reason = "exhausted" if not self._remaining_items() else "epsilon_stop"
            self._emit({"event": "finished", "step": self.step, "reason": reason})
            return

        if previous is not None and previous[0] != choice[0]:
            self._emit(
                {
                    "event": "switched",
                    "step": self.step,
                    "from": previous[0],
                    "to": choice[0],
                }
            )
        self.selected = choice
        self._pinned = choice
        self._emit(
            {
                "event": "selected",
                "step": self.step,
                "hierarchy": choice[0],
                "node": choice[1],
                "max_increment": round12(self.table.total(*choice)),
                "items": self._unknown_items(*choice),
            }
        )

    def _emit(self, event: dict):
        self.trace.append(event)

    def _remaining_items(self) -> list[str]:
        return [i.item_id for i in self.kb.items if i.item_id not in self.answers]

    def _unknown_items(self, hierarchy_id: str, node_id: str) -> list[str]:
        """Unanswered items targeting the node, by descending a-priori mass."""
        rows = []
        for item in self.kb.items:
            if item.item_id in self.answers:
                continue
            masses = [
                t.mass
                for t in item.targets
                if t.hierarchy_id == hierarchy_id and t.node_id == node_id
            ]
            if masses:
                rows.append((-max(masses), item.item_id))
        rows.sort()
        return [item_id for _key, item_id in rows]

    # ------------------------------------------------------------------
    def submit_answer(self, item_id: str, value: str) -> None:
        if self.status != ACTIVE:
            raise SessionFinishedError("session is finished")
        if item_id not in self.kb.items_by_id:
            raise UnknownItemError(f"unknown item {item_id!r}")
        if item_id in self.answers:
            raise DuplicateAnswerError(f"item {item_id!r} was already answered")
        if value not in ANSWER_VALUES:
            raise UnknownItemError(f"answer value must be one of {ANSWER_VALUES}")
        self.answers[item_id] = Answer(
            item_id=item_id, value=value, seq=len(self.answers), timestamp=time.time()
        )
        self._recompute()
        self._emit(
            {
                "event": "answered",
                "step": self.step,
                "item": item_id,
                "value": value,
                "k_values": {
                    hid: [
                        {"stage": rec.stage, "node": rec.node_id, "k": round12(rec.k)}
                        for rec in self.states[hid].k_history
                    ]
                    for hid in sorted(self.states)
                },
            }
        )
        self._select()

    def next_question(self) -> tuple[str, str, list[str]] | None:
        if self.selected is None:
            return None
        hid, node_id = self.selected
        return hid, node_id, self._unknown_items(hid, node_id)

    def report(self) -> dict[str, list[ReportRow]]:
        """Per hierarchy: every node ranked by belief, then mass, then id."""
        out: dict[str, list[ReportRow]] = {}
        for hier in self.kb.hierarchies:
            hid = hier.hierarchy_id
            state = self.states[hid]
            rows = []
            for node_id in hier.order:
                rows.append(
                    ReportRow(
                        node_id=node_id,
                        is_frame=node_id == hier.root_id,
                        mass=state.mass(node_id),
                        belief=belief(state, node_id),
                        pot_confirm=self.potentials.confirm_of(hid, node_id),
                        pot_disconfirm=self.potentials.disconfirm_of(hid, node_id),
                    )
                )
            rows.sort(key=lambda r: (-r.belief, -r.mass, r.node_id))
            out[hid] = rows
        return out


def start_session(kb: KnowledgeBase) -> Session:
    return Session(kb)


def run_script(session: Session, script: list[dict]) -> Session:
    """Replay {"item", "value"} entries in order; stops early when finished."""
    for k, entry in enumerate(script):
        if session.status == FINISHED:
            break
        item = entry.get("item")
        value = entry.get("value")
        if not isinstance(item, str) or value not in ANSWER_VALUES:
            raise UnknownItemError(f"script entry {k} is malformed: {entry!r}")
        session.submit_answer(item, value)
    return session

"""Serialized views of session state shared by the CLI and the HTTP API.

Every numeric field is accompanied by a ``*_str`` twin rendered with the
12-significant-digit formatter; display layers show the strings verbatim and
never recompute masses.
"""

from __future__ import annotations

from .fmt import sig12


def question_payload(session) -> dict | None:
    question = session.next_question()
    if question is None:
        return None
    hierarchy_id, node_id, items = question
    return {
        "hierarchy": hierarchy_id,
        "node": node_id,
        "max_increment": session.table.total(hierarchy_id, node_id),
        "max_increment_str": sig12(session.table.total(hierarchy_id, node_id)),
        "items": [
            {
                "id": item_id,
                "prompt": session.kb.items_by_id[item_id].prompt,
            }
            for item_id in items
        ],
    }


def report_payload(session) -> dict:
    report = session.report()
    return {
        "status": session.status,
        "answers": len(session.answers),
        "hierarchies": [
            {
                "hierarchy": hid,
                "rows": [
                    {
                        "node": row.node_id,
                        "frame": row.is_frame,
                        "mass": row.mass,
                        "mass_str": sig12(row.mass),
                        "belief": row.belief,
                        "belief_str": sig12(row.belief),
                        "pot_confirm": row.pot_confirm,
                        "pot_confirm_str": sig12(row.pot_confirm),
                        "pot_disconfirm": row.pot_disconfirm,
                        "pot_disconfirm_str": sig12(row.pot_disconfirm),
                    }
                    for row in report[hid]
                ],
            }
            for hid in sorted(report)
        ],
    }


def increments_payload(session) -> dict:
    table = session.table
    hierarchies = []
    for hier in session.kb.hierarchies:
        hid = hier.hierarchy_id
        rows = []
        for node_id, total, contribs in table.rows(hid):
            rows.append(
                {
                    "node": node_id,
                    "total": total,
                    "total_str": sig12(total),
                    "contributions": [
                        {
                            "source": c.source,
                            "equation": c.equation,
                            "value": c.value,
                            "value_str": sig12(c.value),
                        }
                        for c in contribs
                    ],
                }
            )
        hierarchies.append({"hierarchy": hid, "rows": rows})
    return {"step": session.step, "hierarchies": hierarchies}

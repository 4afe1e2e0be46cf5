#!/usr/bin/env python3
"""Regenerate the golden trace/report files for the shipped fixtures.

Run from the repository root after any intentional engine change, then review
the diff before committing.  Golden values were spot-checked against the
exact oracle and by hand before the first freeze.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from ibig.cli import trace_jsonl  # noqa: E402
from ibig.kb import load  # noqa: E402
from ibig.session import start_session  # noqa: E402
from ibig.views import increments_payload, report_payload  # noqa: E402

FIXTURES = ROOT / "fixtures"
GOLDEN = FIXTURES / "golden"

CASES = [
    ("kb_aphasia_toy", "aphasia_toy_case1"),
    ("single_path", "single_path"),
    ("switching_demo", "switching_demo"),
]


def main() -> None:
    GOLDEN.mkdir(exist_ok=True)
    for kb_name, case in CASES:
        kb = load((FIXTURES / f"{kb_name}.ibig.json").read_text(encoding="utf-8"))
        script = json.loads((FIXTURES / f"{case}.script.json").read_text(encoding="utf-8"))

        session = start_session(kb)
        if case == "switching_demo":
            (GOLDEN / f"{case}.explain0.json").write_text(
                json.dumps(increments_payload(session), indent=2) + "\n", encoding="utf-8"
            )
        for entry in script:
            if session.status == "finished":
                break
            session.submit_answer(entry["item"], entry["value"])

        (GOLDEN / f"{case}.trace.jsonl").write_text(trace_jsonl(session), encoding="utf-8")
        (GOLDEN / f"{case}.report.json").write_text(
            json.dumps(report_payload(session), indent=2) + "\n", encoding="utf-8"
        )
        print(f"froze {case}: {len(session.trace)} events, status {session.status}")


if __name__ == "__main__":
    main()

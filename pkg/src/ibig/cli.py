"""Command-line interface: validate, consult, oracle-check, explain, serve.

Exit codes: 0 ok, 1 domain violation, 2 malformed input, 3 capability limit.
All numbers in textual output use 12 significant digits so scripted runs are
byte-reproducible across platforms.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import session as sess
from .check import EXACTNESS_TOL, STEP1_TOL, run_oracle_check
from .errors import KbError, OracleSizeError, ParseError, SessionError
from .fmt import sig12
from .kb import KnowledgeBase, load, validate
from .views import increments_payload, report_payload

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2
EXIT_CAPABILITY = 3


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OracleSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (KbError, SessionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ibig",
        description="Evidential consultation over competing hypothesis hierarchies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a knowledge base against all rules")
    p.add_argument("kb", type=Path)
    p.add_argument("--out", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("consult", help="run a consultation, scripted or interactive")
    p.add_argument("kb", type=Path)
    p.add_argument("--script", type=Path, help="JSON array of {item, value} answers")
    p.add_argument("--interactive", action="store_true")
    p.add_argument("--batch", action="store_true", help="collect a whole node before re-selecting")
    p.add_argument("--out", choices=("text", "json"), default="text")
    p.add_argument("--trace", type=Path, help="write the event trace to this JSONL file")
    p.set_defaults(func=cmd_consult)

    p = sub.add_parser("oracle-check", help="compare the engine against exact combination")
    p.add_argument("kb", type=Path)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-leaves", type=int, default=12)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("explain", help="dump the increment table at one consultation step")
    p.add_argument("kb", type=Path)
    p.add_argument("--script", type=Path, required=True)
    p.add_argument("--step", type=int, required=True)
    p.add_argument("--out", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("serve", help="serve the consultation HTTP API")
    p.add_argument("kb", type=Path)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--cors", help="allowed browser origin for the UI")
    p.add_argument("--ui", type=Path, help="static UI bundle to mount under /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def _read_kb(path: Path) -> KnowledgeBase:
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    return load(path.read_text(encoding="utf-8"))


def _read_script(path: Path) -> list[dict]:
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    try:
        script = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid script JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(script, list):
        raise ParseError("script must be a JSON array of {item, value} objects")
    return script


# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    kb = _read_kb(args.kb)
    report = validate(kb)
    if args.out == "json":
        print(
            json.dumps(
                {
                    "ok": report.ok,
                    "violations": [v.__dict__ for v in report.violations],
                    "warnings": [v.__dict__ for v in report.warnings],
                },
                indent=2,
            )
        )
    else:
        for v in report.violations:
            print(f"violation: {v}")
        for v in report.warnings:
            print(f"warning: {v}")
        print("OK" if report.ok else f"{len(report.violations)} violation(s)")
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_consult(args) -> int:
    kb = _read_kb(args.kb)
    if args.batch:
        kb.config.batch = True
    session = sess.start_session(kb)

    if args.script:
        script = _read_script(args.script)
        for k, entry in enumerate(script):
            if session.status == sess.FINISHED:
                break
            item = entry.get("item") if isinstance(entry, dict) else None
            value = entry.get("value") if isinstance(entry, dict) else None
            if not isinstance(item, str) or value not in sess.ANSWER_VALUES:
                raise ParseError(f"script entry {k} is malformed: {entry!r}")
            if item not in kb.items_by_id:
                print(f"error: script references unknown item {item!r}", file=sys.stderr)
                return EXIT_DOMAIN
            session.submit_answer(item, value)
    elif args.interactive:
        _interactive_loop(session)
    # with neither flag, report the initial state of an untouched session

    if args.trace:
        args.trace.write_text(trace_jsonl(session), encoding="utf-8")
    if args.out == "json":
        print(json.dumps({"report": report_payload(session), "trace": session.trace}, indent=2))
    else:
        print(report_text(session))
    return EXIT_OK


def _interactive_loop(session) -> None:
    print("answer with p(resent) / a(bsent) / u(nknown); EOF stops", file=sys.stderr)
    mapping = {"p": sess.PRESENT, "a": sess.ABSENT, "u": sess.UNKNOWN}
    while session.status == sess.ACTIVE:
        question = session.next_question()
        if question is None:
            break
        hierarchy_id, node_id, items = question
        print(f"\n[{hierarchy_id}] {node_id}")
        asked = items if session.kb.config.batch else items[:1]
        for item_id in asked:
            if session.status != sess.ACTIVE:
                break
            prompt = session.kb.items_by_id[item_id].prompt
            while True:
                try:
                    raw = input(f"  {item_id}: {prompt} [p/a/u] ").strip().lower()
                except EOFError:
                    return
                value = mapping.get(raw[:1])
                if value:
                    session.submit_answer(item_id, value)
                    break
                print("  please answer p, a, or u")


def trace_jsonl(session) -> str:
    return "".join(json.dumps(event, sort_keys=True) + "\n" for event in session.trace)


def report_text(session) -> str:
    lines = [f"status: {session.status}  answers: {len(session.answers)}"]
    report = session.report()
    for hid in sorted(report):
        lines.append(f"hierarchy {hid}")
        lines.append("  node                 mass          belief        pot+         pot-")
        for row in report[hid]:
            marker = "*" if row.is_frame else " "
            lines.append(
                f"  {row.node_id:<18}{marker} {sig12(row.mass):<13} {sig12(row.belief):<13} "
                f"{sig12(row.pot_confirm):<12} {sig12(row.pot_disconfirm)}"
            )
    return "\n".join(lines)


def cmd_oracle_check(args) -> int:
    kb = _read_kb(args.kb)
    summary = run_oracle_check(
        kb, trials=args.trials, seed=args.seed, max_leaves=args.max_leaves
    )
    print(
        f"trials: {summary.trials}  seed: {summary.seed}\n"
        f"step-1 closed form vs oracle: max deviation {sig12(summary.max_step1_deviation)}"
        f" (tolerance {sig12(STEP1_TOL)})\n"
        f"confirming-only engine vs oracle: max deviation "
        f"{sig12(summary.max_exactness_deviation)} (tolerance {sig12(EXACTNESS_TOL)})"
    )
    print("OK" if summary.ok else "DEVIATION EXCEEDS TOLERANCE")
    return EXIT_OK if summary.ok else EXIT_DOMAIN


def cmd_explain(args) -> int:
    kb = _read_kb(args.kb)
    script = _read_script(args.script)
    if not 0 <= args.step <= len(script):
        raise ParseError(
            f"step {args.step} out of range: script supports steps 0..{len(script)}"
        )
    session = sess.start_session(kb)
    for entry in script[: args.step]:
        if session.status == sess.FINISHED:
            break
        session.submit_answer(entry["item"], entry["value"])

    payload = increments_payload(session)
    if args.out == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(f"increment table after {args.step} answer(s)")
        for hier in payload["hierarchies"]:
            print(f"hierarchy {hier['hierarchy']}")
            if not hier["rows"]:
                print("  (no nonzero increments)")
            for row in hier["rows"]:
                print(f"  {row['node']:<18} total {row['total_str']}")
                for c in row["contributions"]:
                    print(
                        f"    {c['equation']:<10} from {c['source']:<16} {c['value_str']}"
                    )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    kb = _read_kb(args.kb)
    report = validate(kb)
    if not report.ok:
        for v in report.violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_DOMAIN
    app = create_app(kb, cors_origin=args.cors, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

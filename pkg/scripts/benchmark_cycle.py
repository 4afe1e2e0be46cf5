#!/usr/bin/env python3
"""Time one full recompute-and-select cycle on the 8x300 synthetic KB.

The acceptance budget is one second per cycle; this script prints the
measured numbers so CI logs keep a timing record.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ibig.session import start_session  # noqa: E402
from ibig.synth import build_synthetic_kb  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--hierarchies", type=int, default=8)
    parser.add_argument("--nodes", type=int, default=300)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--warmup-per-hierarchy", type=int, default=8)
    parser.add_argument("--cycles", type=int, default=5)
    args = parser.parse_args()

    t0 = time.perf_counter()
    kb = build_synthetic_kb(args.hierarchies, args.nodes, seed=args.seed)
    print(
        f"built KB: {args.hierarchies} hierarchies x {args.nodes} nodes, "
        f"{len(kb.items)} items in {time.perf_counter() - t0:.2f}s"
    )

    session = start_session(kb)
    per_hierarchy: dict[str, int] = {}
    for item in kb.items:
        hid = item.targets[0].hierarchy_id
        if per_hierarchy.get(hid, 0) < args.warmup_per_hierarchy:
            per_hierarchy[hid] = per_hierarchy.get(hid, 0) + 1
            session.submit_answer(item.item_id, "present")
    print(f"warmed up with {len(session.answers)} answers")

    timings = []
    pending = (i.item_id for i in kb.items if i.item_id not in session.answers)
    for _ in range(args.cycles):
        item_id = next(pending)
        start = time.perf_counter()
        session.submit_answer(item_id, "present")
        timings.append(time.perf_counter() - start)

    for k, t in enumerate(timings):
        print(f"cycle {k}: {t * 1000:.1f} ms")
    print(
        f"median {statistics.median(timings) * 1000:.1f} ms, "
        f"max {max(timings) * 1000:.1f} ms (budget 1000 ms)"
    )


if __name__ == "__main__":
    main()

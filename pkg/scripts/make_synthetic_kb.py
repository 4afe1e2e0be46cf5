#!/usr/bin/env python3
"""Write a synthetic stress-test knowledge base to a .ibig.json file."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ibig.kb import save  # noqa: E402
from ibig.synth import build_synthetic_kb  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", type=Path, help="output path (.ibig.json)")
    parser.add_argument("--hierarchies", type=int, default=8)
    parser.add_argument("--nodes", type=int, default=300)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    kb = build_synthetic_kb(args.hierarchies, args.nodes, seed=args.seed)
    args.out.write_text(save(kb), encoding="utf-8")
    print(f"wrote {args.out}: {len(kb.hierarchies)} hierarchies, {len(kb.items)} items")


if __name__ == "__main__":
    main()

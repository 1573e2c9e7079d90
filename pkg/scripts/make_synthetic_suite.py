#!/usr/bin/env python3
"""Write the 4-class synthetic shape suite as points files plus a training
manifest consumable by ``pcxai train``."""
import argparse
from pathlib import Path

from pcxai import write_points
from pcxai.synthetic import CLASS_NAMES, make_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="data/suite")
    ap.add_argument("--per-class", type=int, default=50)
    ap.add_argument("--points", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, (cloud, cls) in enumerate(make_suite(args.per_class, args.points, args.seed)):
        name = f"{CLASS_NAMES[cls]}_{i:04d}.pts"
        write_points(cloud, out / name)
        lines.append(f"{name} {cls}")
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} clouds + manifest.txt to {out}")


if __name__ == "__main__":
    main()

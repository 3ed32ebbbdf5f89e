"""Run every shipped scenario and record sha256 sums of its outputs.

Usage: python3 scripts/update_checksums.py [--check]
"""
import argparse
import hashlib
import sys
import tempfile
from pathlib import Path

from qrepeater.cli import run_scenario
from qrepeater.scenario import SCENARIO_DIR

CHECKSUMS = SCENARIO_DIR / "CHECKSUMS.sha256"


def output_sums() -> list[str]:
    lines = []
    for scn in sorted(SCENARIO_DIR.glob("*.scn")):
        with tempfile.TemporaryDirectory() as tmp:
            if run_scenario(scn, tmp) != 0:
                raise SystemExit(f"{scn.name} failed")
            for f in sorted(Path(tmp).iterdir()):
                digest = hashlib.sha256(f.read_bytes()).hexdigest()
                lines.append(f"{digest}  {scn.stem}/{f.name}")
    return lines


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true", help="compare instead of writing")
    args = ap.parse_args()
    lines = output_sums()
    if args.check:
        expected = CHECKSUMS.read_text().splitlines()
        bad = sorted(set(lines) ^ set(expected))
        for b in bad:
            print("mismatch:", b)
        return 1 if bad else 0
    CHECKSUMS.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} sums to {CHECKSUMS}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

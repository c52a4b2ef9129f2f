"""Run the acceptance suite and print one line per criterion.

Exit status is pytest's: 0 when every criterion passes.
"""
from __future__ import annotations

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fast", action="store_true", help="skip the size-7 engine/oracle comparison")
    args = ap.parse_args()
    cmd = [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
           str(ROOT / "tests" / "test_acceptance.py")]
    if args.fast:
        cmd += ["-m", "not slow"]
    res = subprocess.run(cmd, cwd=ROOT, capture_output=True, text=True, check=False)
    lines = [ln for ln in res.stdout.splitlines() if ln.lstrip(".F").startswith("CRITERION")]
    for ln in lines:
        print(ln.lstrip(".F"))
    if res.returncode != 0:
        print(res.stdout[-4000:], file=sys.stderr)
    return res.returncode


if __name__ == "__main__":
    sys.exit(main())

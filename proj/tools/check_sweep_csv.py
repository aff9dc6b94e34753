#!/usr/bin/env python3
"""Re-validate a sweep CSV without rerunning anything.

Checks the header, row order, and for every accepted row
error + 2 * std_err <= error_bound and total_depth <= depth_bound.
"""
import argparse
import csv
import math
import sys

HEADER = ["d", "m", "seed", "variant", "error", "std_err", "error_bound",
          "total_depth", "depth_bound", "retries", "accepted", "C_factor"]


def check(path, margin):
    problems = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADER:
            return [f"unexpected header {header}"]
        prev = None
        accepted = 0
        rows = 0
        for lineno, row in enumerate(reader, start=2):
            rows += 1
            if len(row) != len(HEADER):
                problems.append(f"line {lineno}: {len(row)} fields")
                continue
            rec = dict(zip(HEADER, row))
            key = (int(rec["d"]), int(rec["m"]), int(rec["seed"]))
            if prev is not None and key <= prev:
                problems.append(f"line {lineno}: rows out of order")
            prev = key
            if rec["variant"] not in ("L2", "H1"):
                problems.append(f"line {lineno}: variant {rec['variant']}")
            nums = {k: float(rec[k]) for k in ("error", "std_err", "error_bound", "depth_bound", "C_factor")}
            if not all(math.isfinite(v) for v in nums.values()):
                problems.append(f"line {lineno}: non-finite value")
                continue
            if rec["accepted"] not in ("0", "1"):
                problems.append(f"line {lineno}: accepted must be 0 or 1")
                continue
            if rec["accepted"] == "1":
                accepted += 1
                if nums["error"] + margin * nums["std_err"] > nums["error_bound"]:
                    problems.append(f"line {lineno}: error {nums['error']} exceeds bound {nums['error_bound']}")
                if int(rec["total_depth"]) > nums["depth_bound"]:
                    problems.append(f"line {lineno}: depth {rec['total_depth']} exceeds {nums['depth_bound']}")
        if rows == 0:
            problems.append("no data rows")
        print(f"{path}: {rows} rows, {accepted} accepted, {len(problems)} problems")
    return problems


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("--margin", type=float, default=2.0, help="std_err multiplier added to the error")
    args = ap.parse_args()
    problems = check(args.csv, args.margin)
    for p in problems:
        print(p, file=sys.stderr)
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Independent row counts for an OSDG-CD release file.

Prints JSON: {"rows", "per_sdg", "agreement_mismatches", "invalid_rows"}.
Uses only the csv module so it shares no code with the C++ loader.
"""
import csv
import json
import sys
from collections import Counter


def main(path):
    with open(path, newline="", encoding="utf-8-sig") as f:
        header = f.readline()
        delimiter = "\t" if header.count("\t") > header.count(",") else ","
        f.seek(0)
        reader = csv.DictReader(f, delimiter=delimiter)
        rows = 0
        per_sdg = Counter()
        mismatches = 0
        invalid = 0
        for rec in reader:
            rows += 1
            try:
                sdg = int(rec["sdg"])
                pos = int(rec["labels_positive"])
                neg = int(rec["labels_negative"])
                stored = float(rec["agreement"])
            except (KeyError, TypeError, ValueError):
                invalid += 1
                continue
            if not 1 <= sdg <= 17 or pos < 0 or neg < 0 or pos + neg < 1:
                invalid += 1
                continue
            per_sdg[sdg] += 1
            if abs(abs(pos - neg) / (pos + neg) - stored) > 1e-9:
                mismatches += 1
    json.dump({"rows": rows,
               "per_sdg": {str(k): per_sdg[k] for k in sorted(per_sdg)},
               "agreement_mismatches": mismatches,
               "invalid_rows": invalid}, sys.stdout)
    print()


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit("usage: osdg_cd_counts.py <osdg-cd.csv>")
    main(sys.argv[1])

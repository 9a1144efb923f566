"""Regenerate ``src/eigenprob/data/australian.csv`` from the KEEL copy.

The only offline source of the 690-row Statlog Australian Credit file is the
``keel-ds`` wheel (``keel_ds/data/balanced/raw/australian.dat``). That copy
has had its decimal points removed from the real-valued columns (``22.08``
became ``2208.0``). Column A2 (age, true range 13.75..80.25) can be repaired
exactly because each digit count maps onto a disjoint range. Columns A3 and
A7 cannot be repaired unambiguously and are kept as the digit strings read as
integers. A10, A13, A14 and all categorical columns are intact.

Usage::

    pip download keel-ds --no-deps -d /tmp/keel
    python tools/build_australian.py /tmp/keel/keel_ds-*.whl
"""

import csv
import sys
import zipfile
from pathlib import Path

MEMBER = "keel_ds/data/balanced/raw/australian.dat"
NAMES = [f"A{i}" for i in range(1, 15)] + ["Class"]
CONTINUOUS = {"A2", "A3", "A7", "A10", "A13", "A14"}
AGE_RANGE = (13.75, 80.25)


def repair_age(raw: float) -> float:
    for k in range(3):
        value = raw / 10**k
        if AGE_RANGE[0] <= value <= AGE_RANGE[1]:
            return round(value, 2)
    raise ValueError(f"age {raw} has no valid decimal placement")


def fmt(value: float) -> str:
    return repr(int(value)) if float(value).is_integer() else repr(value)


def main(wheel: str) -> None:
    text = zipfile.ZipFile(wheel).read(MEMBER).decode()
    rows = [line.split(",") for line in text.splitlines() if line and not line.startswith("@")]
    out = Path(__file__).resolve().parents[1] / "src" / "eigenprob" / "data" / "australian.csv"
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(NAMES)
        for row in rows:
            cells = []
            for name, cell in zip(NAMES, row):
                value = float(cell)
                if name == "A2":
                    value = repair_age(value)
                cells.append(fmt(value) if name in CONTINUOUS else str(int(value)))
            writer.writerow(cells)
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main(sys.argv[1])

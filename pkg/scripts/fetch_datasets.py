#!/usr/bin/env python3
"""Fetch the benchmark datasets into ./data (none are bundled).

The package's benchmark harness and the dataset-bound acceptance tests
read user-supplied CSV files; this script downloads and converts them
where an accessible source exists, and otherwise prints exactly what to
provide.  Re-running is safe: existing files are left alone.

Expected files and schemas
--------------------------
data/boston.csv
    506 rows, header:
    crim,zn,indus,chas,nox,rm,age,dis,rad,tax,ptratio,b,lstat,medv
    Target column: medv.

data/concrete.csv
    1030 rows, header:
    cement,slag,ash,water,superplasticizer,coarse_agg,fine_agg,age,strength
    Target column: strength.

data/cats_series.csv
    Single column "value", 5000 rows; the 100 missing values (positions
    981-1000, 1981-2000, 2981-3000, 3981-4000, 4981-5000, 1-based) left
    empty or "NaN".

data/cats_truth.csv
    Single column "value", 100 rows: the true values of the five gaps,
    in block order.
"""

import argparse
import csv
import sys
import urllib.request
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

BOSTON_URL = "http://lib.stat.cmu.edu/datasets/boston"
BOSTON_HEADER = ["crim", "zn", "indus", "chas", "nox", "rm", "age", "dis",
                 "rad", "tax", "ptratio", "b", "lstat", "medv"]
CONCRETE_URL = (
    "https://archive.ics.uci.edu/static/public/165/"
    "concrete+compressive+strength.zip"
)
CONCRETE_HEADER = ["cement", "slag", "ash", "water", "superplasticizer",
                   "coarse_agg", "fine_agg", "age", "strength"]


def fetch(url, timeout=60):
    with urllib.request.urlopen(url, timeout=timeout) as response:
        return response.read()


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def fetch_boston():
    out = DATA_DIR / "boston.csv"
    if out.exists():
        print(f"{out} already present")
        return
    # Statlib serves 22 lines of description, then each record split
    # over two physical lines (11 values + 3 values).
    text = fetch(BOSTON_URL).decode()
    values = []
    for line in text.splitlines()[22:]:
        values.extend(float(tok) for tok in line.split())
    if len(values) % 14:
        raise RuntimeError("unexpected token count in statlib response")
    rows = [values[i : i + 14] for i in range(0, len(values), 14)]
    if len(rows) != 506:
        raise RuntimeError(f"expected 506 records, got {len(rows)}")
    write_rows(out, BOSTON_HEADER, rows)


def fetch_concrete():
    out = DATA_DIR / "concrete.csv"
    if out.exists():
        print(f"{out} already present")
        return
    import io
    import zipfile

    blob = fetch(CONCRETE_URL)
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        xls_name = next(n for n in zf.namelist() if n.lower().endswith(".xls"))
        payload = zf.read(xls_name)
    try:
        import pandas as pd

        frame = pd.read_excel(io.BytesIO(payload))
    except ImportError as exc:
        raise RuntimeError(
            "converting the .xls needs pandas+xlrd; install them or "
            "convert manually to data/concrete.csv (see module docstring)"
        ) from exc
    if frame.shape != (1030, 9):
        raise RuntimeError(f"expected 1030x9 table, got {frame.shape}")
    write_rows(out, CONCRETE_HEADER, frame.values.tolist())


def fetch_cats():
    series = DATA_DIR / "cats_series.csv"
    truth = DATA_DIR / "cats_truth.csv"
    if series.exists() and truth.exists():
        print(f"{series} and {truth} already present")
        return
    print(
        "no stable public mirror is known for the 5000-point gap-filling\n"
        "competition series; obtain the data (4900 given values plus the\n"
        "100 withheld truth values) and write:\n"
        f"  {series}  - column 'value', 5000 rows, gaps empty/NaN\n"
        f"  {truth}   - column 'value', 100 rows in block order",
        file=sys.stderr,
    )


def check():
    import numpy as np

    from dgcn import bench, timeseries

    status = 0
    for name, target, shape in (("boston.csv", "medv", (506, 13)),
                                ("concrete.csv", "strength", (1030, 8))):
        path = DATA_DIR / name
        if not path.exists():
            print(f"MISSING {path}")
            status = 1
            continue
        data = bench.load_csv(path, target)
        ok = (data.n, data.n_v) == shape
        print(f"{'OK     ' if ok else 'BAD    '} {path}: N={data.n} n_v={data.n_v}")
        status |= 0 if ok else 1
    path = DATA_DIR / "cats_series.csv"
    if path.exists():
        series = timeseries.read_series_csv(path)
        n_missing = int((~np.isfinite(series)).sum())
        ok = series.size == 5000 and n_missing == 100
        print(f"{'OK     ' if ok else 'BAD    '} {path}: "
              f"{series.size} values, {n_missing} missing")
        status |= 0 if ok else 1
    else:
        print(f"MISSING {path}")
        status = 1
    return status


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--only", choices=["boston", "concrete", "cats"])
    parser.add_argument("--check", action="store_true",
                        help="validate already-present files and exit")
    args = parser.parse_args(argv)
    DATA_DIR.mkdir(exist_ok=True)
    if args.check:
        return check()
    jobs = {"boston": fetch_boston, "concrete": fetch_concrete,
            "cats": fetch_cats}
    selected = [args.only] if args.only else list(jobs)
    failures = 0
    for name in selected:
        try:
            jobs[name]()
        except Exception as exc:  # network errors are expected offline
            print(f"could not fetch {name}: {exc}", file=sys.stderr)
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Build the tabular benchmark CSVs under data/ from public PyPI-hosted copies.

The UCI/ODDS originals are not downloadable from every build host, so this
script pulls the raw files out of packages that bundle them verbatim:

  abalone     UCI abalone.data        (common-datasets 0.3.6)
  arrhythmia  UCI arrhythmia.data     (anomalybench 0.6.2)
  thyroid     UCI thyroid0387 table   (meddatasets 0.1.0)

Each output CSV has a header row and a final `label` column with values
`normal` / `abnormal`. Usage: python3 tools/prepare_datasets.py [out_dir]
"""

import csv
import io
import sys
import tarfile
import urllib.request
import zipfile
from pathlib import Path

SOURCES = {
    "abalone": (
        "https://files.pythonhosted.org/packages/18/3a/40b047ada8a934b4f78dae951518494116852caef21090dd33e1562b9c40/"
        "common_datasets-0.3.6-py3-none-any.whl",
        "common_datasets/data/classification/abalone/abalone.data.txt",
    ),
    "arrhythmia": (
        "https://files.pythonhosted.org/packages/05/d9/fd8df26aa2ca10224a992bb71c322a24f039c92156cc532f542e063954a0/"
        "anomalybench-0.6.2-py3-none-any.whl",
        "anomalybench/benchmarks/arrhythmia.data",
    ),
    "thyroid": (
        "https://files.pythonhosted.org/packages/00/25/b51ba2991e9d7bc106ea61e991d3f1acac5081dcebc2c28e2e87a70c80d0/"
        "meddatasets-0.1.0.tar.gz",
        "meddatasets-0.1.0/meddatasets/data/thyroidDF.csv",
    ),
}


def fetch_member(url, member):
    blob = urllib.request.urlopen(url, timeout=120).read()
    if url.endswith(".whl"):
        return zipfile.ZipFile(io.BytesIO(blob)).read(member).decode()
    with tarfile.open(fileobj=io.BytesIO(blob)) as tf:
        return tf.extractfile(member).read().decode()


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"{path}: {len(rows)} rows, {len(header) - 1} features, "
          f"{sum(r[-1] == 'abnormal' for r in rows)} abnormal")


def build_abalone(text):
    # Rings 8/9/10 are normal, rings 3 and 21 abnormal; sex coded M=0, F=1, I=2.
    sex_code = {"M": "0", "F": "1", "I": "2"}
    rows = []
    for line in text.strip().splitlines():
        f = line.strip().split(",")
        rings = int(f[8])
        if rings in (8, 9, 10):
            label = "normal"
        elif rings in (3, 21):
            label = "abnormal"
        else:
            continue
        rows.append([sex_code[f[0]]] + f[1:8] + [label])
    header = ["sex", "length", "diameter", "height", "whole_weight",
              "shucked_weight", "viscera_weight", "shell_weight", "label"]
    return header, rows


def build_arrhythmia(text):
    # Classes 3,4,5,7,8,9,14,15 form the abnormal set. Columns containing any
    # missing value are removed (279 -> 274 features).
    raw = [line.strip().split(",") for line in text.strip().splitlines()]
    n_feat = len(raw[0]) - 1
    keep = [j for j in range(n_feat) if all(r[j] != "?" for r in raw)]
    abnormal = {3, 4, 5, 7, 8, 9, 14, 15}
    rows = []
    for r in raw:
        label = "abnormal" if int(r[-1]) in abnormal else "normal"
        rows.append([r[j] for j in keep] + [label])
    header = [f"f{j}" for j in keep] + ["label"]
    return header, rows


def build_thyroid(text):
    # Six continuous attributes. Primary hypothyroid (F) is abnormal;
    # negative (-) and compensated hypothyroid (G) are normal. Rows with a
    # missing attribute or an implausible age are dropped.
    cols = ["age", "TSH", "T3", "TT4", "T4U", "FTI"]
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        target = rec["target"]
        if target == "F":
            label = "abnormal"
        elif target in ("-", "G"):
            label = "normal"
        else:
            continue
        if any(rec[c] == "" for c in cols) or float(rec["age"]) > 120:
            continue
        rows.append([rec[c] for c in cols] + [label])
    return cols + ["label"], rows


BUILDERS = {"abalone": build_abalone, "arrhythmia": build_arrhythmia,
            "thyroid": build_thyroid}


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data")
    out.mkdir(parents=True, exist_ok=True)
    for name, (url, member) in SOURCES.items():
        header, rows = BUILDERS[name](fetch_member(url, member))
        write_csv(out / f"{name}.csv", header, rows)


if __name__ == "__main__":
    main()

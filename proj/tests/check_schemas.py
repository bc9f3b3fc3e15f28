#!/usr/bin/env python3
"""Run each CLI command on small inputs and validate the JSON it writes."""

import argparse
import copy
import json
import random
import subprocess
import sys
from pathlib import Path

import jsonschema
from referencing import Registry, Resource

SCHEMA_FILES = ["manifest", "report", "estimates", "summary", "depth-summary", "scenario"]


def load_registry(schema_dir):
    schemas = {}
    resources = []
    for name in SCHEMA_FILES:
        doc = json.loads((schema_dir / f"{name}.v1.json").read_text())
        jsonschema.Draft202012Validator.check_schema(doc)
        schemas[name] = doc
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return schemas, Registry().with_resources(resources)


def write_csv(path, rows, header):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join("NA" if v is None else repr(v) for v in r) + "\n")


def make_inputs(work):
    rng = random.Random(7)
    rows = [[rng.gauss(0, 1) for _ in range(4)] for _ in range(80)]
    rows[3][1] = 9.0
    rows[11][2] = -8.5
    rows[20] = [5.0, 5.0, -5.0, 5.0]
    rows[30][0] = None
    write_csv(work / "mixed.csv", rows, ["w", "x", "y", "z"])
    write_csv(work / "pair.csv", [r[:2] for r in rows], ["w", "x"])

    (work / "grid.json").write_text(json.dumps({
        "seed": 11,
        "replicates": 2,
        "methods": ["MLE", "GY-UBF", "HS-UBPF"],
        "filter": {"directions": 200},
        "scenarios": [
            {"kind": "cellwise", "p": 3, "n": 40, "eps_cell": 0.1, "k": [2, 6]},
            {"kind": "casewise", "p": 3, "n": 40, "eps_case": 0.1, "k": 4, "sigma0": "random"},
            {"kind": "clean", "p": 3, "n": 40},
        ],
    }))
    (work / "sn.json").write_text(json.dumps({
        "type": "sn-injection",
        "outlier_count": 3,
        "base_n": 40,
        "seeds": 2,
        "reference_size": 5000,
        "directions": 500,
        "centers": [[-0.2, -0.25]],
    }))


class Checker:
    def __init__(self, cli, work, schemas, registry):
        self.cli = cli
        self.work = work
        self.schemas = schemas
        self.registry = registry
        self.failures = 0

    def run(self, *args):
        proc = subprocess.run([self.cli, *args], cwd=self.work, capture_output=True, text=True)
        if proc.returncode != 0:
            raise RuntimeError(f"{' '.join(args)} exited {proc.returncode}: {proc.stderr.strip()}")

    def validator(self, name):
        return jsonschema.Draft202012Validator(self.schemas[name], registry=self.registry)

    def check(self, label, name, doc, expect_valid=True):
        errors = sorted(self.validator(name).iter_errors(doc), key=lambda e: list(e.absolute_path))
        ok = (not errors) == expect_valid
        detail = "" if ok else (errors[0].message if errors else "unexpectedly valid")
        print(f"{'PASS' if ok else 'FAIL'} {label}{': ' + detail if detail else ''}")
        self.failures += 0 if ok else 1

    def check_file(self, label, name, path):
        self.check(label, name, json.loads((self.work / path).read_text()))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--schemas", required=True, type=Path)
    ap.add_argument("--work-dir", required=True, type=Path)
    args = ap.parse_args()

    work = args.work_dir.resolve()
    work.mkdir(parents=True, exist_ok=True)
    schemas, registry = load_registry(args.schemas.resolve())
    make_inputs(work)
    c = Checker(str(Path(args.cli).resolve()), work, schemas, registry)

    c.check_file("grid scenario input", "scenario", "grid.json")
    c.check_file("sn-injection scenario input", "scenario", "sn.json")
    c.check("scenario with an unknown kind is rejected", "scenario",
            {"scenarios": [{"kind": "bursty", "p": 2}]}, expect_valid=False)

    c.run("filter", "mixed.csv", "-o", "f.csv", "--report", "report_hs.json", "--directions", "300")
    c.check_file("filter report (hs)", "report", "report_hs.json")
    c.run("filter", "mixed.csv", "-o", "g.csv", "--report", "report_gy.json", "--method", "gy", "--stages", "u,b")
    c.check_file("filter report (gy, u,b)", "report", "report_gy.json")
    c.run("filter", "pair.csv", "-o", "p.csv", "--report", "report_seq.json", "--sequence", "1", "2",
          "--directions", "300")
    c.check_file("filter report (sequence)", "report", "report_seq.json")

    report = json.loads((work / "report_hs.json").read_text())
    broken = copy.deepcopy(report)
    del broken["totals"]
    c.check("report without totals is rejected", "report", broken, expect_valid=False)
    broken = copy.deepcopy(report)
    broken["manifest"]["inputs"][0]["sha256"] = "xyz"
    c.check("report with a malformed checksum is rejected", "report", broken, expect_valid=False)

    c.run("estimate", "mixed.csv", "-o", "est.json", "--directions", "300")
    c.check_file("estimates (two-step)", "estimates", "est.json")
    c.run("estimate", "mixed.csv", "-o", "est_raw.json", "--no-filter")
    c.check_file("estimates (no filter)", "estimates", "est_raw.json")

    c.run("depth", "mixed.csv", "-o", "d.csv", "--summary", "depth.json", "--directions", "300")
    c.check_file("depth summary", "depth-summary", "depth.json")

    c.run("simulate", "grid.json", "--results", "grid.csv", "--summary", "grid_summary.json")
    c.check_file("grid summary", "summary", "grid_summary.json")
    c.run("simulate", "sn.json", "--results", "sn.csv", "--summary", "sn_summary.json")
    c.check_file("sn-injection summary", "summary", "sn_summary.json")

    print(f"{c.failures} schema check(s) failed" if c.failures else "all schema checks passed")
    return 1 if c.failures else 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except RuntimeError as e:
        print(f"FAIL {e}")
        sys.exit(1)

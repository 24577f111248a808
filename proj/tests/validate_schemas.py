#!/usr/bin/env python3
"""Runs the noonsim pipeline and validates every JSON document against schemas/."""

import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource

SMALL_CONFIG = {
    "schema_version": 1,
    "model": {"visibility": 0.989, "eta_t": 0.8026, "eta_r": 0.7941, "xi": 0.00155},
    "source": {"pair_prob": 0.0046, "seed": 11},
    "experiment": {"k": 2000, "s": 30, "phases": "0:2pi:24", "events_per_phase": 20000,
                   "bootstrap_resamples": 1000},
}


def load_registry(schema_dir):
    resources = []
    schemas = {}
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(doc)
        resource = Resource.from_contents(doc)
        resources.append((doc["$id"], resource))
        schemas[path.name.removesuffix(".schema.json")] = doc
    return Registry().with_resources(resources), schemas


def main():
    noonsim, schema_dir, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    registry, schemas = load_registry(schema_dir)

    def run(*args):
        result = subprocess.run([noonsim, *args], capture_output=True, text=True)
        if result.returncode != 0:
            sys.exit(f"noonsim {' '.join(args)} failed ({result.returncode}): {result.stderr}")

    cfg = work / "config.json"
    cfg.write_text(json.dumps(SMALL_CONFIG))
    run("simulate", "--config", str(cfg), "--out", str(work / "scan.csv"))
    run("calibrate", "--scan", str(work / "scan.csv"), "--config", str(cfg),
        "--out", str(work / "calib.json"))
    run("calibrate", "--scan", str(work / "scan.csv"), "--xi", "0.00155", "--xi-err", "1e-5",
        "--out", str(work / "calib_fixed.json"))
    run("fisher", "--calib", str(work / "calib.json"), "--phases", "0:pi:100",
        "--out", str(work / "fisher.csv"))
    run("estimate", "--calib", str(work / "calib.json"), "--config", str(cfg),
        "--phi-true", "1.2", "--out", str(work / "est.json"))
    run("estimate", "--calib", str(work / "calib.json"), "--config", str(cfg),
        "--phi-true", "0.6", "--bootstrap", "0", "--out", str(work / "est_nob.json"))
    run("report", "--scan", str(work / "scan.csv"), "--calib", str(work / "calib.json"),
        "--fisher", str(work / "fisher.csv"), "--estimate", str(work / "est.json"),
        "--estimate", str(work / "est_nob.json"), "--config", str(cfg),
        "--out", str(work / "report.json"))

    checks = [
        ("config", cfg),
        ("config", schema_dir.parent / "configs" / "reference.json"),
        ("scan_metadata", work / "scan.csv.meta.json"),
        ("calibration", work / "calib.json"),
        ("calibration", work / "calib_fixed.json"),
        ("estimate", work / "est.json"),
        ("estimate", work / "est_nob.json"),
        ("report", work / "report.json"),
    ]
    failures = 0
    for name, path in checks:
        doc = json.loads(path.read_text())
        validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        if name != "config" and "schema_version" not in doc:
            errors.append("schema_version missing")
        for e in errors:
            failures += 1
            where = "/".join(map(str, getattr(e, "path", [])))
            print(f"{path.name}: {where}: {getattr(e, 'message', e)}")
        print(f"{'ok  ' if not errors else 'FAIL'} {path.name} against {name}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

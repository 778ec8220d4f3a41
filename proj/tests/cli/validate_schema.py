#!/usr/bin/env python3
"""Runs a set of CLI commands and validates every JSON document against the shipped schema."""

import json
import subprocess
import sys

import jsonschema

cli, schema_path = sys.argv[1], sys.argv[2]
schema = json.load(open(schema_path))
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)

runs = [
    ["catalog"],
    ["curvature", "--metric", "perturbed-torus", "--at", "0.1,0.2,0.3,0.4", "--t", "1"],
    ["curvature", "--metric", "nope", "--at", "0,0,0,0"],
    ["deform", "--metric", "euclidean", "--f", "0.3*sin(x1+x2)", "--k", "1", "--report", "curvature", "--at", "1,0,0,0"],
    ["deform", "--metric", "euclidean", "--f", "0.3*sin(x1)*cos(x2)", "--report", "bach-error", "--at", "0.4,0.7,0,0"],
    ["deform", "--metric", "conformal-flat", "--f", "0.3*sin(x1)", "--report", "identity", "--grid", "6"],
    ["conformal", "--metric", "perturbed-torus", "--factor", "0.1*sin(x1)", "--check", "bach", "--at", "1,2,3,4"],
    ["conformal", "--metric", "conformal-flat", "--factor", "1+0.3*sin(x2)", "--t", "2", "--check", "covariance",
     "--at", "1,2,3,4"],
    ["conformal", "--metric", "perturbed-torus", "--factor", "1+0.2*sin(x1)", "--check", "laws", "--at", "1,2,3,4"],
    ["eigen", "--metric", "perturbed-torus", "--t", "1", "--grid", "4", "--fields"],
    ["normalize", "--metric", "perturbed-torus", "--param", "eps=0.1", "--t", "0.01", "--grid", "4x4x4x4"],
    ["construct", "--metric", "flat-ball", "--t", "1", "--balls", "1", "--radius", "0.5", "--nu", "1",
     "--k-candidates", "50", "--grid", "24x4x4x4"],
    ["verify", "--suite", "profile"],
]

failures = 0
for args in runs:
    proc = subprocess.run([cli, *args], capture_output=True, text=True)
    try:
        doc = json.loads(proc.stdout)
    except json.JSONDecodeError:
        print("no JSON from", args, proc.stderr)
        failures += 1
        continue
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
    for e in errors:
        print(" ".join(args[:1]), "/".join(map(str, e.path)), e.message[:200])
    failures += bool(errors)
    print(f"{'ok  ' if not errors else 'FAIL'} exit={proc.returncode} {' '.join(args)}")
sys.exit(1 if failures else 0)

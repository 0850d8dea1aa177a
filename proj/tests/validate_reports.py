"""Runs the falq binary and validates its JSON reports against docs/schemas."""

import json
import pathlib
import struct
import subprocess
import sys
import tempfile

import jsonschema
import numpy as np
from referencing import Registry, Resource


def write_fatf(path, m):
    m = np.ascontiguousarray(m, dtype="<f8")
    header = b"FATF" + struct.pack("<HBB", 1, 0, 2) + struct.pack("<QQ", *m.shape)
    path.write_bytes(header + m.tobytes())


def load_schemas(schema_dir):
    schemas = {}
    resources = []
    for p in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(p.read_text())
        jsonschema.Draft202012Validator.check_schema(doc)
        schemas[p.name] = doc
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return schemas, Registry().with_resources(resources)


def run(falq, *args):
    proc = subprocess.run([falq, *map(str, args)], capture_output=True, text=True)
    if proc.returncode != 0:
        raise SystemExit(f"falq {' '.join(map(str, args))} exited {proc.returncode}: {proc.stderr}")
    return proc.stdout


def main():
    falq, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    schemas, registry = load_schemas(schema_dir)

    def check(name, doc, label):
        validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        for e in errors:
            print(f"{label}: {'/'.join(map(str, e.path))}: {e.message}")
        print(f"{label}: {'ok' if not errors else 'INVALID'}")
        return not errors

    ok = True
    rng = np.random.default_rng(0)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        write_fatf(tmp / "a.fatf", rng.standard_normal((16, 16)))
        write_fatf(tmp / "b.fatf", rng.standard_normal((12, 9)))
        write_fatf(tmp / "calib.fatf", np.abs(rng.standard_normal((16, 9))))

        rep = json.loads(run(falq, "compress", tmp / "a.fatf", "-o", tmp / "a.falq"))
        ok &= check("compress_report.schema.json", rep, "compress")

        rep = json.loads(run(falq, "compress", tmp / "a.fatf", "--calib", tmp / "calib.fatf",
                             "-o", tmp / "c.falq", "--rank", "3"))
        ok &= check("compress_report.schema.json", rep, "compress --calib")

        rep = json.loads(run(falq, "compress", tmp / "a.fatf", tmp / "b.fatf", "--allow-odd",
                             "-o", tmp / "out", "--jobs", "2"))
        ok &= check("compress_report.schema.json", rep, "compress (two inputs)")

        rep = json.loads(run(falq, "budget", "--bq", "2", "--bl", "16", "--rank", "256"))
        ok &= check("budget_report.schema.json", rep, "budget")

        rep = json.loads(run(falq, "budget", "--container", tmp / "a.falq"))
        ok &= check("budget_report.schema.json", rep, "budget --container")

        for experiment in ("domains", "tail_ratio", "ablation"):
            spec = tmp / f"{experiment}.json"
            spec.write_text(json.dumps({"experiment": experiment, "rows": 16, "cols": 16, "n_seeds": 2,
                                        "rank": 4}))
            run(falq, "bench", "--spec", spec, "--json", tmp / "summary.json", "-o", tmp / "bench.csv")
            rep = json.loads((tmp / "summary.json").read_text())
            ok &= check("bench_summary.schema.json", rep, f"bench {experiment}")

    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

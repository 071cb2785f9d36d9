"""Runs every CLI subcommand on small inputs and checks the emitted files."""

import argparse
import filecmp
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

RUNS = [
    ["simulate", "--t1", "2000", "--samples", "200"],
    ["simulate", "--t1", "2000", "--method", "explicit"],
    ["manifold", "--n", "50"],
    ["equilibria"],
    ["fold"],
    ["cycle"],
    ["converge-eps", "--eps", "0.0025,0.005"],
    ["period-scan", "--tau", "0.17,0.34"],
    ["branch", "--p", "0.025", "--from", "0.3", "--to", "1.5", "--steps", "60"],
    ["hopf", "--p", "0.015", "--from", "0.9", "--to", "1.0", "--steps", "40"],
    ["cusp", "--p-min", "0.005", "--p-max", "0.05", "--np", "20", "--nct", "40", "--oracle-cells", "20",
     "--oracle-samples", "100000"],
    ["onset", "--ct-min", "0.95", "--ct-max", "0.965", "--ct-step", "0.005"],
    ["taumax-scan", "--tau-tilde", "100,120,200,1000,3000,10000"],
    ["blowup-verify"],
]

EXPECTED_COLUMNS = {
    "trajectory": ["t", "h", "c"],
    "orbit": ["t", "h", "c"],
    "critical_manifold_R2": ["C", "zeta", "lambda", "branch"],
    "equilibria_R2": ["root_m", "C_star", "h_star", "stable"],
    "eps_convergence": ["eps", "period", "floquet", "hausdorff"],
}

failures = []


def fail(msg):
    failures.append(msg)
    print("FAIL", msg)


def check_csv(path):
    lines = path.read_text().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    if not meta or not meta[0].startswith("# schema: "):
        fail(f"{path.name}: missing schema line")
        return
    schema = meta[0][len("# schema: "):]
    if not any(l.startswith("# convention: ") for l in meta):
        fail(f"{path.name}: missing convention line")
    if not any(l.startswith("# fingerprint: ") for l in meta):
        fail(f"{path.name}: missing fingerprint line")
    body = [l for l in lines if not l.startswith("#")]
    header = body[0].split(",")
    if schema in EXPECTED_COLUMNS and header != EXPECTED_COLUMNS[schema]:
        fail(f"{path.name}: columns {header} for schema {schema}")
    for row in body[1:]:
        if len(row.split(",")) != len(header):
            fail(f"{path.name}: ragged row {row}")
            break


def run(cli, args, out):
    return subprocess.run([cli, "--out-dir", str(out)] + args, capture_output=True, text=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--schema", required=True)
    ap.add_argument("--params", required=True)
    a = ap.parse_args()
    schema = json.loads(pathlib.Path(a.schema).read_text())

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        for k, args in enumerate(RUNS):
            out = tmp / f"run{k}"
            r = run(a.cli, args, out)
            sub = args[0]
            report = out / f"{sub}.json"
            if not report.exists():
                fail(f"{sub}: no report ({r.stderr.strip()})")
                continue
            doc = json.loads(report.read_text())
            try:
                jsonschema.validate(doc, schema)
            except jsonschema.ValidationError as e:
                fail(f"{sub}: schema violation {e.message}")
            gated_ok = all(c["pass"] for c in doc["checks"] if c["gated"])
            if (r.returncode == 0) != gated_ok or doc["pass"] != gated_ok:
                fail(f"{sub}: exit {r.returncode} but gated checks pass={gated_ok}")
            listed = set(doc["outputs"])
            present = {p.name for p in out.iterdir()}
            if listed != present:
                fail(f"{sub}: listed {sorted(listed)} present {sorted(present)}")
            for name in listed:
                if name.endswith(".csv"):
                    check_csv(out / name)
            print(f"ok {sub} exit={r.returncode}")

        # byte-identical reruns
        for args in (["cycle"], ["cusp", "--np", "20", "--nct", "40", "--oracle-cells", "5"], ["blowup-verify"]):
            d1, d2 = tmp / "det1", tmp / "det2"
            run(a.cli, args, d1)
            run(a.cli, args, d2)
            cmp = filecmp.dircmp(d1, d2)
            if cmp.diff_files or cmp.left_only or cmp.right_only:
                fail(f"{args[0]}: outputs differ between runs {cmp.diff_files}")

        # the shipped parameter file gives the built-in defaults
        d1, d2 = tmp / "cfg1", tmp / "cfg2"
        run(a.cli, ["fold"], d1)
        subprocess.run([a.cli, "--params", a.params, "--out-dir", str(d2), "fold"], capture_output=True)
        j1 = json.loads((d1 / "fold.json").read_text())
        j2 = json.loads((d2 / "fold.json").read_text())
        if j1["fingerprint"] != j2["fingerprint"] or j1["results"] != j2["results"]:
            fail("shipped default.params differs from the built-in defaults")

        # --timing adds wall time, --json prints the report
        r = subprocess.run([a.cli, "--out-dir", str(tmp / "t"), "--timing", "--json", "fold"], capture_output=True,
                           text=True)
        if "wall_time_s" not in json.loads(r.stdout):
            fail("--timing/--json: no wall time in stdout report")

        # errors
        bad = tmp / "bad.params"
        bad.write_text("tier = dimensional\n[dimensional]\nV_s_hat = 3\n")
        r = subprocess.run([a.cli, "--params", str(bad), "--out-dir", str(tmp / "e"), "fold"], capture_output=True,
                           text=True)
        if r.returncode != 2 or "bad.params:3:" not in r.stderr:
            fail(f"bad config: exit {r.returncode}, stderr {r.stderr.strip()}")
        r = subprocess.run([a.cli, "--convention", "other", "fold"], capture_output=True, text=True)
        if r.returncode == 0:
            fail("invalid convention accepted")
        r = subprocess.run([a.cli], capture_output=True, text=True)
        if r.returncode == 0:
            fail("missing subcommand accepted")

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

"""Acceptance criteria at their pinned tolerances.

The full verification harness is run twice through the command line with the
default configuration.  Criteria 1 to 11 read the records of the first report;
criterion 12 requires the two ``report.json`` files to be byte-identical.
Each criterion prints one PASS/FAIL line, collected in the terminal summary.
"""

import json
import os
import subprocess
import sys

import pytest

from circumext.verify import CRITERIA, criterion_status

ACCEPTANCE_LINES = []


def _launch(out):
    env = dict(os.environ, OMP_NUM_THREADS="1", OPENBLAS_NUM_THREADS="1", MKL_NUM_THREADS="1")
    cmd = [sys.executable, "-m", "circumext", "verify", "--suite", "all", "--seed", "7", "--fan", "128",
           "--grid", "256", "--pairs", "500", "--out", str(out)]
    return subprocess.Popen(cmd, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True, env=env)


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("acceptance")
    procs = [(_launch(base / f"run{i}"), base / f"run{i}") for i in (1, 2)]
    results = []
    for p, out in procs:
        stdout, stderr = p.communicate()
        results.append((p.returncode, out / "report.json", stdout, stderr))
    return results


def _report(runs):
    code, path, _, stderr = runs[0]
    assert path.exists(), stderr
    return json.loads(path.read_text())


def _emit(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(runs, number):
    records = _report(runs)["records"]
    ok, found = criterion_status(records, number)
    detail = "; ".join(f"{r['paper_ref']} = {r['worst_observed']:.3g} (tol {r['tolerance']:.3g})" for r in found)
    _emit(number, ok, detail)
    assert ok, json.dumps(found, indent=2)


def test_criterion_12_determinism(runs):
    (c1, p1, _, e1), (c2, p2, _, e2) = runs
    same = p1.exists() and p2.exists() and p1.read_bytes() == p2.read_bytes()
    _emit(12, same and c1 == c2, f"report.json byte-identical across two runs (exit codes {c1}, {c2})")
    assert same, (e1, e2)


def test_full_run_exit_code(runs):
    code, _, stdout, stderr = runs[0]
    assert code == 0, stdout[-4000:] + stderr[-4000:]

"""Exit criteria at their stated tolerances, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line; the lines are also
collected and repeated in the pytest terminal summary.
"""

import subprocess
import sys

import pytest

from pei import acceptance

LINES: list[str] = []


def report(cid: str, name: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {cid}: {name} ({detail})"
    LINES.append(line)
    print(line)


@pytest.mark.parametrize("check", acceptance.CHECKS, ids=lambda c: f"criterion_{c.id}")
def test_criterion(check):
    res = acceptance.run_check(check)
    report(check.id, check.name, res.passed and res.within_budget,
           f"margin={res.margin:.3g}, {res.elapsed:.2f}s of {check.budget:.0f}s budget, "
           f"{res.details}")
    assert res.within_budget, f"took {res.elapsed:.1f}s, budget {check.budget}s"
    assert res.passed, res.details


def _verify_json() -> bytes:
    proc = subprocess.run([sys.executable, "-m", "pei", "verify"], capture_output=True)
    assert proc.returncode == 0, proc.stderr.decode()
    return proc.stdout


def test_criterion_9_deterministic_verify():
    first, second = _verify_json(), _verify_json()
    same = first == second
    report("9", "two verify runs with the same seed give byte-identical JSON", same,
           f"{len(first)} bytes")
    assert same

"""Re-emit acceptance criterion PASS/FAIL lines past pytest's capture."""

import sys


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for line in report.capstdout.splitlines():
        if line.startswith("criterion "):
            sys.stderr.write("\n" + line)

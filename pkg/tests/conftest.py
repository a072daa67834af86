import dataclasses

import numpy as np
import pytest

import qreadout as qr


@pytest.fixture
def quiet_sim():
    """Simulator with no noise, no decay, no preparation errors."""
    return dataclasses.replace(
        qr.SimConfig(),
        noise_sigma=0.0,
        decay_rates={},
        prep_error_prob={0: 0.0, 1: 0.0, 2: 0.0},
    )


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion at the end of the run."""
    import re

    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid and "::" in nodeid:
                name = nodeid.split("::")[-1]
                if not re.match(r"test_c\d+_", name):
                    continue
                verdict = "PASS" if status == "passed" else "FAIL"
                lines.append((name, f"{verdict}  {name}"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)

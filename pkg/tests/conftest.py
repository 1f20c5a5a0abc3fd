import os

import pytest

_REPORT_PATH = os.path.join(os.path.dirname(__file__), os.pardir, "validation_report.txt")


@pytest.fixture(scope="session")
def report():
    """Collects one-line findings; written to validation_report.txt at session end."""
    lines = []
    yield lines.append
    with open(os.path.abspath(_REPORT_PATH), "w") as fh:
        fh.write("validation report\n")
        for line in lines:
            fh.write(line.rstrip() + "\n")

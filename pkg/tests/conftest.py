"""Shared test oracles.

The Taylor-series exponential here is deliberately naive: it is the
independent check for the production propagators, so it must not share
any code path with them.
"""

from __future__ import annotations

import numpy as np


def taylor_expm(matrix: np.ndarray, t: float, terms: int = 60) -> np.ndarray:
    """e^{-i*matrix*t} summed term by term: sum_k (-i*matrix*t)^k / k!."""
    a = -1j * t * np.asarray(matrix, dtype=np.complex128)
    result = np.eye(a.shape[0], dtype=np.complex128)
    term = np.eye(a.shape[0], dtype=np.complex128)
    for k in range(1, terms + 1):
        term = term @ a / k
        result = result + term
    return result


# One verdict line per acceptance criterion, echoed at the end of the
# run so they are visible whether or not the individual tests pass.
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

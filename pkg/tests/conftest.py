"""Shared pytest plumbing: an acceptance-criterion recorder.

Acceptance tests call record_acceptance(...) so every criterion prints one
PASS/FAIL line in the terminal summary, whatever order pytest ran them in.
"""

_ACCEPTANCE_LINES = {}


def record_acceptance(criterion, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    _ACCEPTANCE_LINES[str(criterion)] = f"criterion {criterion}: {status} - {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[key])

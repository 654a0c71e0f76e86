"""Collects one result line per acceptance criterion and prints them at the end."""

ACCEPTANCE = {}


def record(number, title, passed, detail, elapsed, budget):
    ACCEPTANCE[number] = (title, passed, detail, elapsed, budget)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail, elapsed, budget = ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        tr.write_line(f"[{status}] {number}. {title}: {detail} ({elapsed:.2f} s, budget {budget} s)")

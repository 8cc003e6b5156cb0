from __future__ import annotations

from pathlib import Path

import pytest

import mpsim


@pytest.fixture(scope="session")
def models_dir() -> Path:
    return Path(mpsim.__file__).parent / "models"


@pytest.fixture
def criterion(record_property):
    """Label an acceptance test; ``note(text)`` adds measured values to its summary line."""

    def start(number: int, title: str):
        record_property("criterion", number)
        record_property("title", title)

        def note(text: str):
            record_property("detail", text)

        return note

    return start


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = {}
            for key, value in getattr(rep, "user_properties", []):
                if key == "detail" and key in props:
                    value = props[key] + "; " + value
                props[key] = value
            if "criterion" not in props:
                continue
            n = props["criterion"]
            status = "PASS" if outcome == "passed" else "FAIL"
            # a failing teardown or setup overrides an earlier pass
            if rows.get(n, ("PASS",))[0] == "FAIL":
                continue
            rows[n] = (status, props.get("title", ""), props.get("detail", ""))
    if not rows:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(rows):
        status, title, detail = rows[n]
        line = f"criterion {n:>2}: {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)

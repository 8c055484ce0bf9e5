"""Acceptance bookkeeping: one summary line per criterion after the run.

Tests tagged ``@pytest.mark.acceptance("AC<n>", "title")`` are grouped by
criterion id.  A criterion passes when every test carrying its id passed.
Measured values attached with ``record_property`` are echoed on the line.
"""
import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(id, title): test belongs to an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not (rep.when == "call" or rep.failed or rep.skipped):
        return
    cid, title = marker.args
    entry = _RESULTS.setdefault(cid, {"title": title, "ok": True, "ran": 0, "notes": []})
    entry["ran"] += 1
    if not rep.passed:
        entry["ok"] = False
    entry["notes"].extend(f"{k}={v}" for k, v in item.user_properties)


def _order(cid):
    digits = "".join(ch for ch in cid if ch.isdigit())
    return int(digits) if digits else 0


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=_order):
        r = _RESULTS[cid]
        status = "PASS" if r["ok"] else "FAIL"
        notes = "  " + "; ".join(r["notes"]) if r["notes"] else ""
        tr.write_line(f"{status}  {cid:<5} {r['title']} ({r['ran']} checks){notes}")

"""Collects acceptance-criterion outcomes and prints one line per criterion."""
import pytest

_RESULTS: dict[int, dict] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _RESULTS.setdefault(number, {"title": title, "ok": True, "details": []})
    if call.when == "call" or call.excinfo is not None:
        if call.excinfo is not None:
            entry["ok"] = False
        entry["ran"] = True


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        entry = _RESULTS.setdefault(marker.args[0], {"title": marker.args[1], "ok": True, "details": []})
        entry["details"].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        e = _RESULTS[number]
        status = "PASS" if e["ok"] and e.get("ran") else "FAIL"
        detail = "; ".join(e["details"])
        terminalreporter.write_line(f"[{status}] criterion {number}: {e['title']}" + (f" ({detail})" if detail else ""))

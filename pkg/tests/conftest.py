from __future__ import annotations

import pytest

# criterion id -> (title, list of outcomes)
_ACCEPTANCE: dict[str, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        cid, title = marker.args
        entry = _ACCEPTANCE.setdefault(cid, (title, []))
        entry[1].append("skip" if report.skipped else ("pass" if report.passed else "fail"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=lambda c: int(c.lstrip("AC"))):
        title, results = _ACCEPTANCE[cid]
        if "fail" in results:
            status = "FAIL"
        elif "skip" in results:
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"{cid} {status}  {title}")


@pytest.fixture(scope="session")
def lexicon():
    from vqtc.parser import default_lexicon

    return default_lexicon()

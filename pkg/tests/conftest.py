import pytest

_acceptance: dict[int, tuple[str, str, float]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        _acceptance[number] = (status, title, getattr(item, "elapsed", rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        status, title, elapsed = _acceptance[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}  [{elapsed:.2f} s]")

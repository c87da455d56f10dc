import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (title, [passed flags], [details])
_CRITERIA: dict[int, tuple[str, list, list]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (report.when == "call" or report.failed):
        return
    number, title = marker.args
    _, flags, details = _CRITERIA.setdefault(number, (title, [], []))
    flags.append(report.passed)
    details.extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, flags, details = _CRITERIA[number]
        verdict = "PASS" if all(flags) else "FAIL"
        line = f"criterion {number}: {verdict}  {title}"
        if details:
            line += "  [" + "; ".join(details) + "]"
        terminalreporter.write_line(line)

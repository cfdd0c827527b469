"""Per-criterion PASS/FAIL summary for the acceptance suite."""

from collections import defaultdict

_results = defaultdict(list)
_labels = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, label = mark.args
            _labels[number] = label
            item.user_properties.append(("criterion", number))


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _results[number].append((report.nodeid.split("::")[-1], report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        checks = _results[number]
        failed = [name for name, ok in checks if not ok]
        status = "FAIL" if failed else "PASS"
        detail = f" (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {number}: {status} {_labels[number]} "
                      f"[{len(checks) - len(failed)}/{len(checks)} checks]{detail}")

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance verdict lines after the test summary."""
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        line = "[acceptance] criterion %d: %s" % (n, "PASS" if ok else "FAIL")
        if detail:
            line += " (%s)" % detail
        terminalreporter.write_line(line)

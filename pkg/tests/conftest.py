def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(verdicts):
        terminalreporter.write_line(verdicts[n])
    missing = [n for n in range(1, 11) if n not in verdicts]
    for n in missing:
        terminalreporter.write_line(f"AC{n:<2} FAIL  (did not report; errored before the check)")

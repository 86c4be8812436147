from hypothesis import HealthCheck, settings

settings.register_profile("lab", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props and (rep.when == "call" or rep.failed):
                lines.append((props["criterion"], "PASS" if rep.passed else "FAIL",
                              props.get("summary", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for number, verdict, summary in sorted(lines):
            terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {summary}")

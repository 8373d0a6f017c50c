from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    # one criterion may span several tests; any failure marks it FAIL
    if report.when == "call" or report.outcome == "failed":
        label = _label_of(report)
        if label and _ACCEPTANCE.get(label) != "FAIL":
            _ACCEPTANCE[label] = "PASS" if report.passed else "FAIL"


def _label_of(report):
    for key in report.keywords:
        if key.startswith("AC") and key[2:].isdigit():
            return key
    return None


def pytest_configure(config):
    for n in range(1, 10):
        config.addinivalue_line("markers", f"AC{n}: acceptance criterion {n}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s[2:])):
        terminalreporter.write_line(f"{label}: {_ACCEPTANCE[label]}")

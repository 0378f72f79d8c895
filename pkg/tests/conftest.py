import pytest


def pytest_addoption(parser):
    parser.addoption("--slow", action="store_true", default=False,
                     help="run the slow tier (large valuation peaks, full fixture counts)")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: only runs with --slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--slow"):
        return
    skip = pytest.mark.skip(reason="needs --slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def slow(request):
    return request.config.getoption("--slow")


# acceptance criteria register their outcome here; printed at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title, secs, detail = ACCEPTANCE[n]
        line = f"criterion {n:2d}: {status}  {title}  ({secs:.1f} s)"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)

import pytest

_results = []


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    outcome = "PASS" if call.excinfo is None else "FAIL"
    _results.append((marker.args[0], marker.args[1], outcome, call.duration))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for cid, title, outcome, duration in sorted(_results, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{outcome}] {cid:<4} {title} ({duration:.2f}s)")


@pytest.fixture
def couplet():
    from profilepriv.graph import make_graph
    import math

    return make_graph([("a", (0.8, 0.2)), ("b", (0.2, 0.8))], [("a", "b")], math.log(2))


@pytest.fixture
def categorical_chain():
    from profilepriv.experiments import CATEGORICAL_CHAIN_PROFILES
    from profilepriv.graph import chain_graph

    return chain_graph(CATEGORICAL_CHAIN_PROFILES, 0.5)

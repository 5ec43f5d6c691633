import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_connected_graph(rng, n, extra):
    """Random spanning tree plus ``extra`` random chords."""
    from unfold.graphs import NeighborGraph

    order = rng.permutation(n)
    edges = {(min(a, b), max(a, b)) for a, b in
             ((order[t], order[rng.integers(t)]) for t in range(1, n))}
    while len(edges) < min(n - 1 + extra, n * (n - 1) // 2):
        i, j = rng.choice(n, 2, replace=False)
        edges.add((min(i, j), max(i, j)))
    return NeighborGraph.from_edges(n, sorted(edges))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for the acceptance summary; returns ``ok``."""
    def emit(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

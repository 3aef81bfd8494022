import numpy as np
import pytest
from hypothesis import strategies as st

from grl_probe.graph import Graph

ACCEPTANCE = pytest.StashKey[list]()


@st.composite
def graphs(draw, min_nodes=1, max_nodes=30, connected=False):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), max_size=3 * n, unique=True)) if pairs else []
    if connected:
        chosen = list(chosen) + [(i, i + 1) for i in range(n - 1)]
    return Graph(n, chosen)


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return Graph(n, np.stack([iu[keep], ju[keep]], axis=1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)`` prints and keeps one PASS/FAIL line."""
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def record(n, ok, detail=""):
        line = f"CRITERION {n} {'PASS' if ok else 'FAIL'} {detail}".rstrip()
        request.config.stash[ACCEPTANCE].append(line)
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        else:
            print(line)
        return ok
    return record

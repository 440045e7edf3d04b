from pathlib import Path

import numpy as np
import pytest

from clusterfx.data import ClusterRecord, StudyData
from clusterfx.oracles import random_study

FIXTURES = Path(__file__).parent / "fixtures"
PACKAGE_FIXTURES = Path(__file__).resolve().parents[1] / "src" / "clusterfx" / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def ordinal_fixture():
    return PACKAGE_FIXTURES / "ordinal_prepost.csv"


def random_studies(n, seed, T_choices=(1, 2, 3), **kwargs):
    rng = np.random.default_rng(seed)
    return [random_study(rng, T=int(rng.choice(T_choices)), **kwargs) for _ in range(n)]


def study(T, cells):
    """StudyData with one single-period cluster per observation list.

    ``cells`` maps ``(group, period)`` to a list of clusters (lists of values).
    """
    clusters = []
    for (g, l), groups in cells.items():
        for i, obs in enumerate(groups):
            pre, post = (obs, ()) if l == 1 else ((), obs)
            clusters.append(ClusterRecord(g, f"{g}-{l}-{i}", pre, post))
    return StudyData(T, tuple(clusters))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

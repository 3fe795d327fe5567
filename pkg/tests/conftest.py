import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cyclecut.graph import Graph, gen_petersen


@pytest.fixture(scope="session")
def petersen() -> Graph:
    return gen_petersen()


@pytest.fixture
def k4() -> Graph:
    return Graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])


@pytest.fixture
def c6() -> Graph:
    return Graph(6, [(i, (i + 1) % 6) for i in range(6)])

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from covha.characters import enumerate_characters
from covha.covariant import CovariantContext
from covha.groups import cyclic, subgroup_closure


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def z4_ctx():
    """G = Z4, H = {0, 2}, xi(2) = -1."""
    g = cyclic(4)
    h = subgroup_closure(g, [2])
    return CovariantContext.build(g, h, enumerate_characters(h)[1])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])

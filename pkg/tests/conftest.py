import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from sdof.channel import ChannelSpec, channel_from_profile, reduce_to_parallel  # noqa: E402
from sdof.linalg import RankProfile  # noqa: E402


def toy_spec(n_e=1):
    """Three transmit antennas, two per receiver, one shared input coordinate."""
    h1 = np.array([[1, 0, 0], [0, 1, 0]], dtype=complex)
    h2 = np.array([[0, 1, 0], [0, 0, 1]], dtype=complex)
    return ChannelSpec(3, 2, 2, n_e, h1, h2)


def wide_spec(n_e=1, seed=11):
    """Profile r1 = r2 = 4, r0 = 5 (so s = 3) with generic mixing."""
    return channel_from_profile(RankProfile(4, 4, 5), n_e, seed=seed)


@pytest.fixture
def toy():
    return toy_spec()


@pytest.fixture
def toy_pc():
    return reduce_to_parallel(toy_spec())


@pytest.fixture
def wide():
    return wide_spec()


@pytest.fixture
def wide_pc():
    return reduce_to_parallel(wide_spec())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from thriftybp.analysis import construct_optimal_thrifty
from thriftybp.dag import make_complete_binary_tree, make_pyramid


@pytest.fixture(scope="session")
def t2():
    return make_complete_binary_tree(2)


@pytest.fixture(scope="session")
def t3():
    return make_complete_binary_tree(3)


@pytest.fixture(scope="session")
def pyr3():
    return make_pyramid(3)


@pytest.fixture(scope="session")
def thrifty_t2(t2):
    b, _ = construct_optimal_thrifty(t2, 2)
    return b

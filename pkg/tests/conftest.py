import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import NaiveFactorizer

from ffrmf.polyfield import irreducible_table, make_field


@pytest.fixture(scope="session")
def field2():
    return make_field(2)


@pytest.fixture(scope="session")
def field3():
    return make_field(3)


@pytest.fixture(scope="session")
def table2(field2):
    # deep enough for every q = 2 brute-force check in the suite
    return irreducible_table(field2, 13)


@pytest.fixture(scope="session")
def table3(field3):
    return irreducible_table(field3, 8)


@pytest.fixture(scope="session")
def naive2():
    return NaiveFactorizer(2, 8)


@pytest.fixture(scope="session")
def naive3():
    return NaiveFactorizer(3, 8)

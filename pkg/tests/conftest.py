import pytest

from hybamr.elements import TreeShape
from hybamr.oracle import enumerate_tree


@pytest.fixture(scope="session")
def pyramid_tree4():
    return enumerate_tree(TreeShape.PYRAMID, 4)


@pytest.fixture(scope="session")
def trees3():
    return {s: enumerate_tree(s, 3) for s in TreeShape}

import math

import pytest

from tisim import load_builtin

R2 = 1 / math.sqrt(2)


@pytest.fixture(scope="session")
def qle():
    return load_builtin("qle-single")


@pytest.fixture(scope="session")
def qle_dual():
    return load_builtin("qle-dual-source")


@pytest.fixture(scope="session")
def ifm_object():
    return load_builtin("ifm-with-object")


@pytest.fixture(scope="session")
def ifm_empty():
    return load_builtin("ifm-no-object")


@pytest.fixture(scope="session")
def maudlin():
    return load_builtin("maudlin-contingent")

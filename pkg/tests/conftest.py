from fractions import Fraction

import pytest

from floralperc import ModelParams


@pytest.fixture(scope="session")
def params():
    return ModelParams(Fraction(1, 10))

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import polyvm


@pytest.fixture
def vm():
    return polyvm.VM()

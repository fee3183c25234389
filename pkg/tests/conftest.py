# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import os
import sys

import pytest

_src = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src')
if _src not in sys.path:
    sys.path.insert(0, _src)

from bwptools import utils  # noqa: E402
from bwptools.model import NetworkParams  # noqa: E402

# --------------------------------------------------------------------------------------------------


@pytest.fixture
def fig1_params():
    # R = 0.1, W = 1, alpha = 4 at the quoted optimum intensity
    return NetworkParams(lam=0.0584, alpha=4.0, rate=0.1, bandwidth=1.0)


@pytest.fixture
def fig2_params():
    return NetworkParams(lam=1.0, alpha=3.0, rate=0.25, bandwidth=1.0)


@pytest.fixture
def unit_theta_params():
    # R = W gives theta = 1 at N = 1
    return NetworkParams(lam=0.1, alpha=4.0, rate=1.0, bandwidth=1.0)


@pytest.fixture(autouse=True)
def loud():
    # The quiet switch is module state; every test starts verbose
    utils.setQuiet(False)
    yield
    utils.setQuiet(False)

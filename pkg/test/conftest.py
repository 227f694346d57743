# Copyright 2020 The Medscore Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import os
import sys

import numpy as np
import pytest

# Workaround to safely import the medscore package and its config
currentdir = os.path.dirname(os.path.realpath(__file__))
parentdir = os.path.dirname(currentdir)
sys.path.append(parentdir)

from medscore.models import utils  # noqa


def numeric_gradient(f, x, h=1e-5):
    """Central differences of a scalar (or array valued) f at x."""
    x = np.asarray(x, dtype=float)
    columns = []
    for r in range(len(x)):
        step = np.zeros_like(x)
        step[r] = h * max(1.0, abs(x[r]))
        columns.append((np.asarray(f(x + step)) - np.asarray(f(x - step)))
                       / (2 * step[r]))
    return np.stack(columns)


@pytest.fixture
def gradient():
    return numeric_gradient


@pytest.fixture
def rng():
    return np.random.default_rng(20200101)


@pytest.fixture
def foodexp():
    if not utils.has_dataset('foodexp'):
        pytest.skip('food expenditure data are not bundled')
    return utils.load_foodexp()


@pytest.fixture
def endometrial():
    if not utils.has_dataset('endometrial'):
        pytest.skip('endometrial data are not bundled')
    return utils.load_endometrial()

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

import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from medscore.core import oracle, solvers
from medscore.errors import (FinitenessWarning, InputError,
                             SupportOverflowError)
from medscore.models import utils
from medscore.models.binary import BinaryModel

# ############################################################################
# suite: exact oracle
# description: enumerated median unbiased estimates of logistic designs
# ############################################################################

HIRJI_S = (16, 12)
HIRJI_EXACT = [-4.489, -3.885, -2.876, -2.141, -1.517, -0.953, -0.421,
               0.104, 0.641, 1.220, 1.899, 2.851, 3.430]
HIRJI_MBR = [-6.077, -3.909, -2.900, -2.150, -1.520, -0.955, -0.421,
             0.103, 0.640, 1.217, 1.885, 2.778, 4.966]
HIRJI_MLE = [-np.inf, -4.537, -3.239, -2.361, -1.654, -1.032, -0.453,
             0.114, 0.695, 1.325, 2.068, 3.103, np.inf]


@pytest.fixture(scope='module')
def hirji_table():
    return oracle.oracle_table(oracle.hirji_design(), HIRJI_S)


def test_hirji_support(hirji_table):
    assert hirji_table['t'].tolist() == list(range(1, 14))


def test_hirji_exact(hirji_table):
    assert_allclose(hirji_table['exact'], HIRJI_EXACT, atol=1e-3)


def test_hirji_estimates(hirji_table):
    assert_allclose(hirji_table['mbr'], HIRJI_MBR, atol=5e-4)
    assert_allclose(hirji_table['mle'], HIRJI_MLE, atol=5e-4)
    assert hirji_table['mbr_converged'].all()


def test_hirji_extremes(monkeypatch):
    design = oracle.hirji_design()
    model = design.model(design.outcome(1, HIRJI_S))
    assert model.divergent_components()[design.interest] == -1
    mbr = solvers.fit(model, 'median-br')
    assert mbr.converged
    assert mbr.estimates[design.interest] == pytest.approx(-6.077, abs=5e-4)

    model = design.model(design.outcome(13, HIRJI_S))
    assert model.divergent_components()[design.interest] == 1
    with pytest.warns(FinitenessWarning):
        mle = solvers.fit(model, 'mle')
    assert mle.diverged
    assert mle.estimates[design.interest] == np.inf

    # the scoring path alone, without the check on the data
    monkeypatch.setattr(BinaryModel, 'divergent_components',
                        lambda self: None)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        mle = solvers.fit(model, 'mle')
    assert mle.diverged or not mle.converged
    assert not mle.diverged or not np.all(mle.finite)


def test_hirji_median_closer_than_mle(hirji_table):
    inner = hirji_table.iloc[1:-1]
    assert np.all(inner['mbr_deviation'] <= inner['mle_deviation'])


def test_simple_design_sweep():
    design = oracle.simple_design()
    assert design.support_size == 32
    table = oracle.oracle_table(design)
    assert len(table) == 32
    assert np.all(np.diff(table['exact']) > 0)
    assert np.isinf(table['mle'].iloc[0]) and np.isinf(table['mle'].iloc[-1])
    assert np.all(np.isfinite(table['mbr']))
    inner = table.iloc[1:-1]
    closer = inner['mbr_deviation'] < inner['mle_deviation']
    assert closer.all()
    assert inner['mbr_deviation'].median() < inner['mle_deviation'].median()


def test_symmetric_design_centre():
    design = oracle.EnumerableDesign([[-1.0], [1.0]], 1, 0)
    assert oracle.exact_median_unbiased(design, 0.0) == pytest.approx(
        0.0, abs=1e-8)
    upper = oracle.exact_median_unbiased(design, 1.0)
    lower = oracle.exact_median_unbiased(design, -1.0)
    assert upper == pytest.approx(-lower, abs=1e-7)
    assert upper > 0


def test_probabilities_sum_to_one():
    design = oracle.hirji_design()
    for theta in (-2.0, 0.0, 1.5):
        probs = design.probabilities(theta, HIRJI_S)
        assert probs.sum() == pytest.approx(1.0)
        assert probs.index.tolist() == list(range(1, 14))
    probs = oracle.simple_design(2).probabilities(0.3)
    assert probs.sum() == pytest.approx(1.0)


def test_outcome_matches_statistics():
    design = oracle.hirji_design()
    y = design.outcome(5, HIRJI_S)
    assert y @ design.X[:, 2] == 5
    assert_allclose(y @ design.X[:, :2], HIRJI_S)


def test_conditioning_checks():
    design = oracle.hirji_design()
    with pytest.raises(InputError):
        design.distribution()
    with pytest.raises(InputError):
        design.distribution([16])
    with pytest.raises(InputError):
        design.distribution([40, 12])
    with pytest.raises(InputError):
        oracle.exact_conditional_median_unbiased(design, 20, HIRJI_S)


def test_single_point_support():
    design = oracle.EnumerableDesign([[0.0], [0.0]], 1, 0)
    with pytest.raises(InputError):
        oracle.exact_median_unbiased(design, 0.0)
    design = oracle.EnumerableDesign([[1.0, 1.0]], 3, 1, conditioning=(0,))
    with pytest.raises(InputError):
        oracle.exact_conditional_median_unbiased(design, 2.0, [2.0])


def test_support_overflow():
    design = oracle.EnumerableDesign(np.ones((4, 1)), 9, 0, max_support=100)
    assert design.support_size == 10 ** 4
    with pytest.raises(SupportOverflowError):
        design.outcomes


def test_design_validation():
    with pytest.raises(InputError):
        oracle.EnumerableDesign([[1.0]], 0, 0)
    with pytest.raises(InputError):
        oracle.EnumerableDesign([[1.0]], 1, 1)
    with pytest.raises(InputError):
        oracle.EnumerableDesign.from_dict({'rows': [[1.0]], 'trials': 1})


def test_bundled_designs_load():
    document = utils.load_document(utils.resolve_path('@hirji'))
    design = oracle.EnumerableDesign.from_dict(document)
    reference = oracle.hirji_design()
    assert_allclose(design.X, reference.X)
    assert design.trials.tolist() == reference.trials.tolist()
    assert design.conditioning == reference.conditioning
    assert tuple(document['s']) == HIRJI_S

    document = utils.load_document(utils.resolve_path('@simple'))
    design = oracle.EnumerableDesign.from_dict(document)
    assert_allclose(design.X[:, 0], oracle.SIMPLE_COVARIATES)
    assert design.support_size == 32

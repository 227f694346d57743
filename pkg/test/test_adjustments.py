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

import numpy as np
import pytest
from numpy.testing import assert_allclose

from medscore.core import adjustments, numerics
from medscore.errors import SingularInformationError
from medscore.models.base import CumulantBundle, cumulant_bundle, \
    log_likelihood
from medscore.models.beta import BetaRegressionModel
from medscore.models.binary import BinaryModel
from medscore.models.gamma import GammaStrataModel
from medscore.models.normal import NormalModel
from medscore.models.skew_normal import SkewNormalModel

# ############################################################################
# suite: adjustments
# description: profile cumulants, median and Firth adjustments
# ############################################################################


def _normal(n=10, s=12.0, mu=0.0):
    """A sample whose sum of squares about mu is exactly s."""
    z = np.linspace(-1.0, 1.0, n)
    return mu + z * np.sqrt(s / np.sum(z ** 2))


def test_normal_known_mean_bundle():
    model = NormalModel(_normal(), known_mean=0.0)
    bundle = cumulant_bundle(model, [1.0])
    assert bundle.score[0] == pytest.approx(1.0)
    assert bundle.info[0, 0] == pytest.approx(5.0)
    assert log_likelihood(model, [1.0]) == pytest.approx(
        -5 * np.log(2 * np.pi) - 6.0)


def test_logistic_single_observation():
    for y in (0, 1):
        b = BinaryModel(np.ones((1, 1)), [y]).cumulant_bundle([0.0])
        assert b.score[0] == pytest.approx(y - 0.5)
        assert b.info[0, 0] == pytest.approx(0.25)
        assert b.nu3[0, 0, 0] == pytest.approx(0.0, abs=1e-16)
        assert b.numix[0, 0, 0] == pytest.approx(0.0, abs=1e-16)


def test_skew_normal_third_cumulant_at_zero():
    b = SkewNormalModel(np.ones(4)).cumulant_bundle([0.0])
    assert b.info[0, 0] == pytest.approx(8 / np.pi, rel=1e-9)
    assert b.nu3[0, 0, 0] == pytest.approx(0.0, abs=1e-10)


def test_median_score_vanishes_at_closed_form():
    y = _normal()
    model = NormalModel(y, known_mean=0.0)
    psi = 12.0 / (10 - 2 / 3)
    bundle = model.cumulant_bundle([psi])
    assert adjustments.median_score(bundle)[0] == pytest.approx(0.0,
                                                                abs=1e-12)


def test_normal_profile_cumulants():
    y = _normal(mu=0.4)
    model = NormalModel(y)
    psi = 1.7
    b = model.cumulant_bundle([np.mean(y), psi])
    k = adjustments.profile_cumulants(b, 1)
    assert k.kappa1 == pytest.approx(-1 / (2 * psi))
    assert k.kappa2 == pytest.approx(10 / (2 * psi ** 2))
    assert k.kappa3 == pytest.approx(10 / psi ** 3)
    assert_allclose(k.gamma, [0.0])


def test_firth_normal_variance():
    y = _normal(mu=0.4)
    model = NormalModel(y)
    psi = 12.0 / 9
    b = model.cumulant_bundle([np.mean(y), psi])
    assert_allclose(adjustments.firth_score(b), 0.0, atol=1e-12)


def test_firth_is_the_jeffreys_penalty(rng, gradient):
    X = np.column_stack((np.ones(12), rng.normal(size=12)))
    model = BinaryModel(X, rng.integers(0, 2, size=12))
    theta = np.array([0.3, -0.4])

    def log_det(th):
        return np.linalg.slogdet(model.score_and_info(th)[1])[1]

    b = model.cumulant_bundle(theta)
    assert_allclose(adjustments.firth_score(b),
                    b.score + 0.5 * gradient(log_det, theta), rtol=1e-6)


def test_median_adjustment_shapes(rng):
    X = np.column_stack((np.ones(15), rng.uniform(-1, 1, size=15)))
    model = BetaRegressionModel(X, rng.uniform(0.1, 0.9, size=15))
    b = model.cumulant_bundle([0.2, 0.5, 6.0])
    adj = adjustments.median_adjustment(b)
    assert adj.M.shape == adj.M1.shape == adj.kappa2.shape == (3,)
    assert_allclose(adj.M1 * adj.kappa2, adj.M)
    assert_allclose(adjustments.median_score(b, adj),
                    b.score + b.info @ adj.M1)


@pytest.mark.parametrize('family', ['gamma', 'binary'])
def test_median_adjustment_matches_profile_cumulants(rng, family):
    if family == 'gamma':
        model = GammaStrataModel(rng.gamma(2.0, 1.0, size=(6, 4)))
        theta = model.default_start()
    else:
        X = np.column_stack((np.ones(30), rng.normal(size=(30, 2))))
        model = BinaryModel(X, rng.integers(0, 2, size=30), link='cloglog')
        theta = np.array([0.2, -0.4, 0.3])
    b = model.cumulant_bundle(theta)
    adj = adjustments.median_adjustment(b)
    for r in range(model.dimension):
        k = adjustments.profile_cumulants(b, r)
        assert adj.kappa2[r] == pytest.approx(k.kappa2, rel=1e-10)
        assert adj.M[r] == pytest.approx(
            -k.kappa1 + k.kappa3 / (6 * k.kappa2), rel=1e-8, abs=1e-12)


def test_diagonal_nuisance_block():
    model = GammaStrataModel(np.array([[1.0, 2.0], [0.5, 0.7],
                                       [3.0, 1.1]]))
    b = model.cumulant_bundle([1.2, 0.8, 1.5, 0.6])
    idx = np.array([1, 2, 3])
    assert_allclose(adjustments.nuisance_inverse(b.info, idx),
                    np.linalg.inv(b.info[np.ix_(idx, idx)]), rtol=1e-12)


def test_sensitivity_matrix_is_diagonal(rng):
    X = np.column_stack((np.ones(25), rng.normal(size=(25, 2))))
    model = BinaryModel(X, rng.integers(0, 2, size=25), link='probit')
    b = model.cumulant_bundle([0.1, 0.5, -0.3])
    H = adjustments.sensitivity_matrix(b)
    expected = 1 / np.diag(numerics.inverse_spd(b.info))
    assert_allclose(np.diag(H), expected, rtol=1e-8)
    off = H - np.diag(np.diag(H))
    assert np.max(np.abs(off)) <= 1e-6 * np.max(np.abs(expected))


def _bundle(info):
    p = len(info)
    return CumulantBundle(np.zeros(p), np.asarray(info, dtype=float),
                          np.zeros((p, p, p)), np.zeros((p, p, p)))


def test_non_positive_kappa2():
    with pytest.raises(SingularInformationError) as err:
        adjustments.profile_cumulants(_bundle([[-1.0]]), 0)
    assert err.value.pivot == 0


def test_singular_nuisance_block():
    info = [[2.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 1.0]]
    with pytest.raises(SingularInformationError):
        adjustments.profile_cumulants(_bundle(info), 0)

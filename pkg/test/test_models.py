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

from medscore import models
from medscore.core import adjustments, numerics, solvers
from medscore.errors import DomainError, InputError
from medscore.models.base import ModelSpec
from medscore.models.beta import BetaRegressionModel
from medscore.models.binary import BinaryModel
from medscore.models.gamma import GammaStrataModel
from medscore.models.matched import MatchedTablesModel
from medscore.models.normal import NormalModel
from medscore.models.reparam import ReparameterizedModel, parse_transform
from medscore.models.skew_normal import SkewNormalModel

# ############################################################################
# suite: models
# description: score, information and third order tensors of every model
# ############################################################################


def _binary(rng, link):
    X = np.column_stack((np.ones(20), rng.normal(size=(20, 2))))
    return BinaryModel(X, rng.integers(0, 4, size=20), trials=3, link=link)


def _beta(rng):
    X = np.column_stack((np.ones(15), rng.uniform(-1, 1, size=15)))
    return BetaRegressionModel(X, rng.uniform(0.1, 0.9, size=15))


CASES = {
    'normal-known': (lambda rng: NormalModel(rng.normal(size=12), 0.0),
                     [1.3]),
    'normal': (lambda rng: NormalModel(rng.normal(size=12)), [0.2, 1.3]),
    'skew-normal': (lambda rng: SkewNormalModel(rng.normal(size=10)), [2.0]),
    'logit': (lambda rng: _binary(rng, 'logit'), [0.2, -0.5, 0.3]),
    'probit': (lambda rng: _binary(rng, 'probit'), [0.2, -0.5, 0.3]),
    'cloglog': (lambda rng: _binary(rng, 'cloglog'), [0.2, -0.5, 0.3]),
    'gamma': (lambda rng: GammaStrataModel(rng.gamma(2.0, size=(3, 4))),
              [1.7, 0.5, 1.2, 2.0]),
    'beta': (_beta, [0.3, -0.2, 5.0]),
    'matched': (lambda rng: MatchedTablesModel(
        [1, 0, 1, 1], [1, 2, 0, 3], 3), [0.4, -0.3, 0.1, 0.2, -0.5]),
    'log-psi': (lambda rng: ReparameterizedModel(
        NormalModel(rng.normal(size=12)), {'psi': 'log'}), [0.2, 0.3]),
    'sqrt-shape': (lambda rng: ReparameterizedModel(
        GammaStrataModel(rng.gamma(2.0, size=(2, 3))), {0: 'sqrt'}),
        [1.3, 0.5, 1.5]),
}


@pytest.fixture(params=sorted(CASES))
def case(request, rng):
    build, theta = CASES[request.param]
    return request.param, build(rng), np.array(theta)


def test_score_is_the_gradient(case, gradient):
    _, model, theta = case
    score, _ = model.score_and_info(theta)
    assert_allclose(score, gradient(model.log_likelihood, theta),
                    rtol=1e-5, atol=1e-6)


def test_bundle_matches_score_and_info(case):
    _, model, theta = case
    bundle = model.cumulant_bundle(theta)
    score, info = model.score_and_info(theta)
    assert_allclose(bundle.score, score, rtol=1e-12)
    assert_allclose(bundle.info, info, rtol=1e-12)
    assert bundle.is_finite()


def test_tensor_symmetries(case):
    _, model, theta = case
    b = model.cumulant_bundle(theta)
    assert_allclose(b.info, b.info.T, atol=1e-12)
    for axes in ((0, 2, 1), (1, 0, 2), (2, 1, 0)):
        assert_allclose(b.nu3, b.nu3.transpose(axes), atol=1e-10)
    assert_allclose(b.numix, b.numix.transpose(0, 2, 1), atol=1e-10)


def test_bartlett_identity(case, gradient):
    """d i_st / d theta_r = nu_{s,rt} + nu_{t,rs} + nu_{r,s,t}"""
    name, model, theta = case
    b = model.cumulant_bundle(theta)
    derivative = gradient(lambda th: model.score_and_info(th)[1], theta)
    expected = (np.einsum('srt->rst', b.numix)
                + np.einsum('trs->rst', b.numix) + b.nu3)
    atol = 1e-4 if name == 'skew-normal' else 1e-6
    assert_allclose(derivative, expected, rtol=1e-5, atol=atol)


def test_kappa2_is_partial_information(case):
    _, model, theta = case
    bundle = model.cumulant_bundle(theta)
    inverse = numerics.inverse_spd(bundle.info)
    for r in range(model.dimension):
        kappa2 = adjustments.profile_cumulants(bundle, r).kappa2
        assert kappa2 == pytest.approx(1 / inverse[r, r], rel=1e-8)


def test_irls_step_matches_generic_step(rng):
    model = _binary(rng, 'probit')
    theta = np.array([0.1, 0.4, -0.2])
    bundle = model.cumulant_bundle(theta)
    shift = adjustments.median_adjustment(bundle).M1
    assert_allclose(model.scoring_step(theta, bundle, shift),
                    ModelSpec.scoring_step(model, theta, bundle, shift),
                    rtol=1e-10, atol=1e-10)


def test_logit_at_zero_has_no_median_adjustment():
    X = np.array([[1.0, -1.0], [1.0, 1.0], [1.0, -2.0], [1.0, 2.0]])
    model = BinaryModel(X, [0, 1, 1, 0])
    theta = np.zeros(2)
    bundle = model.cumulant_bundle(theta)
    assert_allclose(bundle.nu3, 0.0, atol=1e-15)
    assert_allclose(bundle.score, X.T @ (np.array([0, 1, 1, 0]) - 0.5))
    adjustment = adjustments.median_adjustment(bundle)
    assert_allclose(adjustment.M, 0.0, atol=1e-15)
    assert_allclose(model.scoring_step(theta, bundle, adjustment.M1),
                    model.scoring_step(theta, bundle, np.zeros(2)))


def test_canonical_median_score_is_a_penalised_score(gradient):
    model = BinaryModel(np.array([[-0.56], [-0.23], [0.071], [0.129],
                                  [1.559]]), [0, 1, 0, 1, 1])
    theta = np.array([0.7])

    def log_info(th):
        return np.log(model.score_and_info(th)[1][0, 0])

    bundle = model.cumulant_bundle(theta)
    penalised = bundle.score[0] + gradient(log_info, theta)[0] / 6
    assert adjustments.median_score(bundle)[0] == pytest.approx(
        penalised, rel=1e-6)


def test_binary_validation():
    X = np.ones((3, 1))
    with pytest.raises(InputError):
        BinaryModel(X, [0, 1])
    with pytest.raises(InputError):
        BinaryModel(X, [0, 2, 1])
    with pytest.raises(InputError):
        BinaryModel(X, [0, 1, 1], link='log')
    with pytest.warns(RuntimeWarning):
        BinaryModel(np.ones((3, 2)), [0, 1, 1])


def test_normal_needs_observations():
    with pytest.raises(InputError):
        NormalModel([1.0, 2.0])
    with pytest.raises(InputError):
        NormalModel([1.0], known_mean=0.0)
    with pytest.raises(DomainError):
        NormalModel([1.0, 2.0, 4.0]).cumulant_bundle([0.0, -1.0])


def test_skew_normal_at_zero():
    y = np.array([-0.4, 0.3, 1.2, -1.1, 0.8])
    model = SkewNormalModel(y)
    bundle = model.cumulant_bundle([0.0])
    assert bundle.info[0, 0] == pytest.approx(2 * len(y) / np.pi, rel=1e-9)
    assert adjustments.median_adjustment(bundle).M[0] == pytest.approx(
        0.0, abs=1e-9)


@pytest.mark.parametrize('theta', [0.5, 3.0, 10.0])
def test_skew_normal_moment_symmetry(theta):
    model = SkewNormalModel([1.0])
    assert model.moment(2, 2, -theta) == pytest.approx(
        model.moment(2, 2, theta), rel=1e-8)
    assert model.moment(3, 3, -theta) == pytest.approx(
        -model.moment(3, 3, theta), rel=1e-8)


def test_skew_normal_positive_sample_diverges():
    model = SkewNormalModel([0.3, 1.4, 0.2, 2.2, 0.9, 0.05, 1.7, 0.6])
    with pytest.warns(Warning):
        mle = solvers.fit(model, 'mle')
    assert mle.estimates[0] == np.inf
    assert not mle.finite[0]
    median = solvers.fit(model, 'median-br')
    assert median.converged
    assert np.isfinite(median.estimates[0]) and median.estimates[0] > 0


def test_gamma_formulas():
    y = np.array([[0.5, 1.2, 2.0], [3.1, 0.7, 1.5]])
    model = GammaStrataModel(y)
    psi, lam = 1.8, np.array([0.9, 1.4])
    b = model.cumulant_bundle(np.r_[psi, lam])
    m, q = 3, 2
    info = np.zeros((3, 3))
    info[0, 0] = m * q * numerics.polygamma(1, psi)
    info[0, 1:] = info[1:, 0] = -m / lam
    info[1:, 1:] = np.diag(m * psi / lam ** 2)
    assert_allclose(b.info, info, rtol=1e-10)
    assert b.info[1, 2] == 0
    assert b.nu3[0, 0, 0] == pytest.approx(
        m * q * numerics.polygamma(2, psi), rel=1e-10)
    assert_allclose(b.nu3[[1, 2], [1, 2], 0], m / lam ** 2, rtol=1e-10)
    assert_allclose(b.nu3[[1, 2], [1, 2], [1, 2]], -2 * m * psi / lam ** 3,
                    rtol=1e-10)
    assert b.nu3[1, 2, 0] == 0
    assert_allclose(b.numix, 0.0)


def test_gamma_profile_information():
    model = GammaStrataModel(np.ones((4, 5)))
    psi = np.e
    bundle = model.cumulant_bundle(np.r_[psi, [0.5, 1.0, 2.0, 3.0]])
    kappa2 = adjustments.profile_cumulants(bundle, 0).kappa2
    expected = 5 * 4 * (numerics.polygamma(1, psi) - 1 / psi)
    assert kappa2 == pytest.approx(expected, rel=1e-10)


def test_gamma_arrow_solve(rng):
    model = GammaStrataModel(rng.gamma(2.0, size=(5, 3)))
    theta = np.r_[1.5, rng.uniform(0.5, 2.0, size=5)]
    bundle = model.cumulant_bundle(theta)
    assert_allclose(model.scoring_step(theta, bundle, np.zeros(6)),
                    ModelSpec.scoring_step(model, theta, bundle,
                                           np.zeros(6)), rtol=1e-10)


def test_gamma_validation():
    with pytest.raises(InputError):
        GammaStrataModel([[1.0], [2.0]])
    with pytest.raises(InputError):
        GammaStrataModel([[1.0, -2.0]])


def test_beta_uniform_log_likelihood():
    model = BetaRegressionModel(np.ones((1, 1)), [0.37])
    assert model.log_likelihood([0.0, 2.0]) == pytest.approx(0.0, abs=1e-14)


def test_beta_mixed_tensor_zeros(rng):
    model = _beta(rng)
    b = model.cumulant_bundle([0.3, -0.2, 5.0])
    assert_allclose(b.numix[:, 2, 2], 0.0, atol=1e-12)


def test_beta_rejects_boundary_responses():
    with pytest.raises(InputError):
        BetaRegressionModel(np.ones((2, 1)), [0.0, 0.5])
    with pytest.raises(InputError):
        BetaRegressionModel(np.ones((2, 1)), [0.5, 0.5], link='identity')


@pytest.mark.parametrize('link', ['logit', 'probit', 'cloglog'])
def test_beta_links(rng, link, gradient):
    X = np.column_stack((np.ones(10), rng.uniform(-1, 1, size=10)))
    model = BetaRegressionModel(X, rng.uniform(0.2, 0.8, size=10), link=link)
    theta = np.array([-0.2, 0.4, 8.0])
    assert_allclose(model.score_and_info(theta)[0],
                    gradient(model.log_likelihood, theta), rtol=1e-5,
                    atol=1e-6)


def test_beta_log_link_domain():
    model = BetaRegressionModel(np.ones((2, 1)), [0.2, 0.3], link='log')
    assert model.in_domain([-1.0, 3.0])
    assert not model.in_domain([0.5, 3.0])


def test_balanced_conditional_mle():
    for t in (2, 5, 7):
        model = MatchedTablesModel.balanced(10, 3, t)
        rho = np.exp(model.conditional_mle())
        assert rho == pytest.approx((t / 10) / (1 - t / 10), rel=1e-8)


def test_symmetric_tables_have_unit_odds_ratio():
    with pytest.warns(RuntimeWarning):
        model = MatchedTablesModel.balanced(300, 1, 150)
    assert np.exp(model.conditional_mle()) == pytest.approx(1.0, abs=1e-8)


def test_conditional_mle_at_the_support_end():
    assert MatchedTablesModel.balanced(6, 3, 6).conditional_mle() == np.inf
    assert MatchedTablesModel.balanced(6, 3, 0).conditional_mle() == -np.inf


def test_matched_tables_design():
    model = MatchedTablesModel([1, 0], [2, 1], 3)
    assert model.labels == ('psi', 'lambda1', 'lambda2')
    assert_allclose(model.trials, [1, 1, 3, 3])
    assert_allclose(model.cases, [1, 0])
    assert_allclose(model.controls, [2, 1])
    with pytest.raises(InputError):
        MatchedTablesModel.balanced(4, 2, 1)


def test_reparameterized_labels_and_bounds():
    model = ReparameterizedModel(NormalModel([0.1, 0.5, 2.0]),
                                 {'psi': 'log'})
    assert model.labels == ('mu', 'log(psi)')
    assert model.bounds(1) == (-np.inf, np.inf)
    assert_allclose(model.forward([0.0, 0.0]), [0.0, 1.0])


@pytest.mark.parametrize('name,kind', [('log', 'log'), ('sqrt', 'sqrt'),
                                       ('square', 'sqrt'),
                                       ('scale:2.5', 'scale2.5')])
def test_parse_transform(name, kind):
    assert parse_transform(name).name == kind


def test_parse_unknown_transform():
    with pytest.raises(InputError):
        parse_transform('cube')


def test_from_config_builds_every_family(foodexp):
    assert isinstance(models.from_config(
        {'family': 'normal', 'y': [1.0, 2.0, 4.0]}), NormalModel)
    assert isinstance(models.from_config(
        {'family': 'skew-normal', 'n': 5}), SkewNormalModel)
    gamma = models.from_config({'family': 'gamma-strata', 'q': 3, 'm': 2})
    assert gamma.dimension == 4
    matched = models.from_config({'family': 'matched-tables', 'q': 4,
                                  'm': 3, 't': 2})
    assert matched.tables == 4
    beta = models.from_config({'family': 'beta', 'data': '@foodexp',
                               'response': 'share',
                               'covariates': 'income,persons'})
    assert beta.labels == ('(Intercept)', 'income', 'persons', 'phi')
    wrapped = models.from_config({'family': 'normal', 'n': 5,
                                  'transforms': {'psi': 'log'}})
    assert isinstance(wrapped, ReparameterizedModel)


def test_from_config_unknown_family():
    with pytest.raises(InputError) as err:
        models.from_config({'family': 'poisson'})
    assert err.value.field == 'family'


def test_simulated_models_keep_the_design(rng):
    for name in ('logit', 'gamma', 'beta', 'matched', 'log-psi'):
        build, theta = CASES[name]
        model = build(rng)
        draw = model.simulate(np.array(theta), rng)
        assert type(draw) is type(model)
        assert draw.labels == model.labels

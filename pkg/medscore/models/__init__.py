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

"""
The built-in models and their registry. Every model is reachable by its
family name, from_config builds one out of a parsed JSON or YAML document
or out of console flags.
"""

import numpy as np

from medscore import constants
from medscore.errors import InputError
from medscore.models import utils
from medscore.models.base import CumulantBundle, ModelSpec  # noqa: F401
from medscore.models.beta import BetaRegressionModel
from medscore.models.binary import BinaryModel
from medscore.models.gamma import GammaStrataModel
from medscore.models.matched import MatchedTablesModel
from medscore.models.normal import NormalModel
from medscore.models.reparam import ReparameterizedModel
from medscore.models.skew_normal import SkewNormalModel

MODELS = {model.family: model for model in (
    BinaryModel, BetaRegressionModel, GammaStrataModel, NormalModel,
    SkewNormalModel, MatchedTablesModel)}


def reparameterize(model, transforms):
    """model in new coordinates, transforms maps labels to 'log' etc."""
    if not transforms:
        return model
    return ReparameterizedModel(model, transforms)


def _columns(value):
    if value is None:
        return []
    if isinstance(value, str):
        return [c.strip() for c in value.split(',') if c.strip()]
    return list(value)


def _frame(config, columns):
    if config.get('data') is None:
        return None
    return utils.read_csv(config['data'], columns)


def _sample(config, family):
    """A vector of observations, the response column or inline y."""
    frame = _frame(config, [config['response']]) \
        if config.get('response') and config.get('data') else None
    if frame is not None:
        return frame[config['response']].to_numpy()
    if config.get('y') is not None:
        return np.asarray(config['y'], dtype=float)
    if config.get('n') is not None:
        # a template for simulation, its data is replaced on every draw
        return np.zeros(int(config['n']))
    raise InputError('{} needs data, y or n'.format(family), field='data')


def _regression(config, family):
    covariates = _columns(config.get('covariates'))
    response = config.get('response')
    trials = config.get('trials')
    wanted = covariates + ([response] if response else []) + \
        ([trials] if isinstance(trials, str) else [])
    frame = _frame(config, wanted)
    if frame is None:
        X = np.asarray(config.get('X'), dtype=float)
        if X.ndim != 2:
            raise InputError('{} needs data and covariates or X'
                             .format(family), field='covariates')
        labels = config.get('labels')
        y = config.get('y')
    else:
        X, labels = utils.design_matrix(frame, covariates,
                                        config.get('intercept', True))
        y = frame[response].to_numpy() if response else None
    if isinstance(trials, str):
        trials = frame[trials].to_numpy()
    return X, labels, y, trials


def _binary(config):
    X, labels, y, trials = _regression(config, 'binary')
    if y is None:
        y = np.zeros(X.shape[0])
    return BinaryModel(X, y, trials=trials,
                       link=config.get('link', constants.LINK_LOGIT),
                       labels=labels)


def _beta(config):
    X, labels, y, _ = _regression(config, 'beta')
    if y is None:
        y = np.full(X.shape[0], 0.5)
    return BetaRegressionModel(X, y,
                               link=config.get('link', constants.LINK_LOGIT),
                               labels=labels)


def _gamma(config):
    if config.get('data') is not None:
        strata = config.get('strata', 'stratum')
        frame = utils.read_csv(config['data'], [strata, config['response']])
        groups = [g[config['response']].to_numpy()
                  for _, g in frame.groupby(strata, sort=True)]
        if len({len(g) for g in groups}) != 1:
            raise InputError('every stratum needs the same number of '
                             'observations', field=strata)
        return GammaStrataModel(np.vstack(groups))
    if config.get('y') is not None:
        return GammaStrataModel(config['y'])
    if config.get('q') is not None and config.get('m') is not None:
        return GammaStrataModel(np.ones((int(config['q']), int(config['m']))))
    raise InputError('gamma-strata needs data, y or q and m', field='data')


def _matched(config):
    if config.get('m') is None:
        raise InputError('matched-tables needs m', field='m')
    m = int(config['m'])
    frame = _frame(config, ['case', 'controls'])
    if frame is not None:
        return MatchedTablesModel(frame['case'], frame['controls'], m)
    if config.get('t') is not None:
        return MatchedTablesModel.balanced(int(config['q']), m,
                                           int(config['t']))
    if config.get('q') is not None:
        q = int(config['q'])
        return MatchedTablesModel(np.zeros(q), np.zeros(q), m)
    raise InputError('matched-tables needs data or q', field='data')


BUILDERS = {
    BinaryModel.family: _binary,
    BetaRegressionModel.family: _beta,
    GammaStrataModel.family: _gamma,
    NormalModel.family: lambda c: NormalModel(
        _sample(c, 'normal'), known_mean=c.get('known_mean')),
    SkewNormalModel.family: lambda c: SkewNormalModel(
        _sample(c, 'skew-normal')),
    MatchedTablesModel.family: _matched,
}


def from_config(config):
    """
    Build a model from a mapping with at least the key family.

    Args:
        config (dict): family, plus data / response / covariates /
            intercept / trials / link for the regressions, known_mean for
            the normal model, q and m for the stratified models, and
            optionally transforms mapping labels to reparameterizations

    Returns:
        ModelSpec: the model

    Raises:
        InputError: for unknown families or incomplete settings
    """
    family = config.get('family')
    if family not in BUILDERS:
        raise InputError('unknown model {!r}, expected one of {}'.format(
            family, ', '.join(sorted(BUILDERS))), field='family')
    return reparameterize(BUILDERS[family](config),
                          config.get('transforms'))

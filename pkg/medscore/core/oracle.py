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
Exact median unbiased estimation in small logistic designs by enumerating
every outcome. For a sufficient statistic T of the interest coefficient,
optionally conditioned on the statistics S of the other coefficients,

    theta_*  solves P(T <= t | s) = 1/2,
    theta_** solves P(T >= t | s) = 1/2,

and the estimate is their midpoint, or whichever is finite at an end of
the support.
"""

import functools
import logging
import warnings

import numpy as np
import pandas as pd
from scipy import special

from medscore import CONFIG, constants
from medscore.core import solvers
from medscore.core.numerics import expand_bracket, find_root
from medscore.errors import InputError, SupportOverflowError
from medscore.models.binary import BinaryModel

log = logging.getLogger(__name__)

ROOT_TOL = 1e-8
BRACKET = (-30.0, 30.0)
DECIMALS = 9

# covariates of the simple logistic regression through the origin
SIMPLE_COVARIATES = (-0.560, -0.230, 0.071, 0.129, 1.559)


class EnumerableDesign:
    """
    Rows of a grouped logistic design with their numbers of trials. The
    interest statistic is t = sum_i X[i, interest] y_i and the conditioning
    statistics are s_j = sum_i X[i, j] y_i for j in conditioning.
    """

    def __init__(self, X, trials, interest, conditioning=(), labels=None,
                 name=None, max_support=None):
        self.X = np.atleast_2d(np.asarray(X, dtype=float))
        self.trials = np.broadcast_to(
            np.asarray(trials, dtype=int), (self.X.shape[0],)).copy()
        if np.any(self.trials < 1):
            raise InputError('trials must be positive', field='trials')
        p = self.X.shape[1]
        if not 0 <= interest < p or any(not 0 <= j < p for j in conditioning):
            raise InputError('statistic columns outside the design',
                             field='interest')
        self.interest = int(interest)
        self.conditioning = tuple(int(j) for j in conditioning)
        self.labels = list(labels or ['x{}'.format(j + 1) for j in range(p)])
        self.name = name
        self.max_support = max_support or CONFIG['EXACT_MAX_SUPPORT']

    @classmethod
    def from_dict(cls, data):
        """
        Build a design from a parsed YAML or JSON document with the keys
        rows, trials, interest and optionally conditioning and labels.
        """
        try:
            return cls(data['rows'], data['trials'], data['interest'],
                       data.get('conditioning', ()), data.get('labels'),
                       data.get('name'))
        except KeyError as err:
            raise InputError('design is missing {}'.format(err),
                             field=str(err.args[0])) from None

    @property
    def support_size(self):
        return int(np.prod(self.trials.astype(float) + 1))

    @functools.cached_property
    def outcomes(self):
        """
        Every outcome vector with its sufficient statistics and the log
        number of Bernoulli sequences it stands for.

        Raises:
            SupportOverflowError: when the support exceeds the cap
        """
        if self.support_size > self.max_support:
            raise SupportOverflowError(
                'support of {} outcomes exceeds the cap of {}'.format(
                    self.support_size, self.max_support))
        grids = np.meshgrid(*[np.arange(m + 1) for m in self.trials],
                            indexing='ij')
        Y = np.stack([g.ravel() for g in grids], axis=1)
        frame = pd.DataFrame({
            't': np.round(Y @ self.X[:, self.interest], DECIMALS),
            'logw': np.sum(special.gammaln(self.trials + 1)
                           - special.gammaln(Y + 1)
                           - special.gammaln(self.trials - Y + 1), axis=1),
        })
        for k, j in enumerate(self.conditioning):
            frame['s{}'.format(k)] = np.round(Y @ self.X[:, j], DECIMALS)
        self._Y = Y
        return frame

    def _keys(self):
        return ['s{}'.format(k) for k in range(len(self.conditioning))]

    def distribution(self, s_obs=None):
        """
        Log counts of every value of t, restricted to outcomes with the
        conditioning statistics equal to s_obs.

        Returns:
            pandas.DataFrame: columns t, logc and row (a representative
            outcome index), sorted by t
        """
        frame = self.outcomes
        keys = self._keys()
        if keys:
            if s_obs is None:
                raise InputError('conditioning statistics are required',
                                 field='s')
            s_obs = np.round(np.atleast_1d(np.asarray(s_obs, dtype=float)),
                             DECIMALS)
            if len(s_obs) != len(keys):
                raise InputError('expected {} conditioning statistics'
                                 .format(len(keys)), field='s')
            mask = np.all(frame[keys].to_numpy() == s_obs, axis=1)
            frame = frame[mask]
            if frame.empty:
                raise InputError('no outcome has s = {}'.format(
                    s_obs.tolist()), field='s')
        grouped = frame.reset_index().groupby('t', sort=True).agg(
            logc=('logw', special.logsumexp), row=('index', 'first'))
        return grouped.reset_index()

    def probabilities(self, theta, s_obs=None):
        """P(T = t | s) under the interest coefficient theta."""
        dist = self.distribution(s_obs)
        logp = dist['logc'].to_numpy() + theta * dist['t'].to_numpy()
        return pd.Series(np.exp(logp - special.logsumexp(logp)),
                         index=dist['t'])

    def outcome(self, t_obs, s_obs=None):
        """The first enumerated outcome with T = t (and S = s)."""
        dist = self.distribution(s_obs)
        match = dist[np.isclose(dist['t'], t_obs, atol=10 ** -DECIMALS)]
        if match.empty:
            raise InputError('t = {} is not in the support'.format(t_obs),
                             field='t')
        return self._Y[int(match['row'].iloc[0])]

    def model(self, y):
        return BinaryModel(self.X, y, trials=self.trials,
                           link=constants.LINK_LOGIT, labels=self.labels)

    def __repr__(self):
        return '<EnumerableDesign {} rows, support {}>'.format(
            self.X.shape[0], self.support_size)


def simple_design(m=1):
    """Five point logistic regression through the origin, m trials a row."""
    return EnumerableDesign(np.array(SIMPLE_COVARIATES)[:, None], m, 0,
                            labels=['theta'], name='simple-m{}'.format(m))


def hirji_design():
    """
    Two age groups crossed with two treatments, patients grouped by
    (age, treatment) pattern; the interest is the treatment coefficient
    given the total and the age group statistic.
    """
    X = np.array([[1, 1, 1],
                  [1, 1, 0],
                  [1, 0, 1],
                  [1, 0, 0]], dtype=float)
    return EnumerableDesign(X, [9, 11, 6, 4], interest=2,
                            conditioning=(0, 1),
                            labels=['intercept', 'age', 'treatment'],
                            name='hirji')


def _log_tail(dist, t_obs, theta, lower):
    logp = dist['logc'].to_numpy() + theta * dist['t'].to_numpy()
    t = dist['t'].to_numpy()
    side = t <= t_obs + 10 ** -DECIMALS if lower else \
        t >= t_obs - 10 ** -DECIMALS
    return special.logsumexp(logp[side]) - special.logsumexp(logp)


def _median_root(dist, t_obs, lower):
    def equation(theta):
        return _log_tail(dist, t_obs, theta, lower) - np.log(0.5)
    lo, hi = expand_bracket(equation, *BRACKET)
    return find_root(equation, lo, hi, tol=ROOT_TOL)


def _median_unbiased(dist, t_obs):
    t = dist['t'].to_numpy()
    if not np.any(np.isclose(t, t_obs, atol=10 ** -DECIMALS)):
        raise InputError('t = {} is not in the support'.format(t_obs),
                         field='t')
    at_min = t_obs <= t.min() + 10 ** -DECIMALS
    at_max = t_obs >= t.max() - 10 ** -DECIMALS
    if at_min and at_max:
        raise InputError('the support of t is a single point', field='t')
    # P(T <= t) is decreasing in theta and P(T >= t) increasing
    theta_lower = np.inf if at_max else _median_root(dist, t_obs, True)
    theta_upper = -np.inf if at_min else _median_root(dist, t_obs, False)
    if at_min:
        return theta_lower
    if at_max:
        return theta_upper
    return 0.5 * (theta_lower + theta_upper)


def exact_median_unbiased(design, t_obs):
    return _median_unbiased(design.distribution(), t_obs)


def exact_conditional_median_unbiased(design, t_obs, s_obs):
    return _median_unbiased(design.distribution(s_obs), t_obs)


def oracle_row(design, t_obs, s_obs=None, options=None):
    """
    The exact estimate next to the maximum likelihood and median bias
    reduced estimates of the interest coefficient at t.
    """
    exact = exact_conditional_median_unbiased(design, t_obs, s_obs) \
        if design.conditioning else exact_median_unbiased(design, t_obs)
    model = design.model(design.outcome(t_obs, s_obs))
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        mle = solvers.fit(model, constants.METHOD_MLE, options)
        mbr = solvers.fit(model, constants.METHOD_MEDIAN, options)
    row = {
        't': float(t_obs),
        'exact': float(exact),
        'mle': float(mle.estimates[design.interest]),
        'mbr': float(mbr.estimates[design.interest]),
        'mbr_converged': bool(mbr.converged),
    }
    row['mle_deviation'] = abs(row['mle'] - row['exact'])
    row['mbr_deviation'] = abs(row['mbr'] - row['exact'])
    return row


def oracle_table(design, s_obs=None, options=None):
    """oracle_row over the whole (conditional) support of t."""
    rows = []
    for t in design.distribution(s_obs)['t']:
        rows.append(oracle_row(design, t, s_obs, options))
        log.debug('oracle row %s', rows[-1])
    return pd.DataFrame(rows)

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
q matched 2x2 tables, each with one case y_a1 ~ Bi(1, p_a1) and m controls
y_a2 ~ Bi(m, p_a2), logit(p_a1) = lambda_a + psi and logit(p_a2) =
lambda_a. The model is a grouped logistic regression on an expanded design
with a case indicator and one intercept per table, parameter (psi,
lambda_1, ..., lambda_q). Results are usually read on the odds ratio scale
rho = exp(psi).
"""

import logging
import warnings

import numpy as np
import pandas as pd
from scipy import special

from medscore import constants
from medscore.core import solvers
from medscore.core.numerics import expand_bracket, find_root
from medscore.errors import InputError
from medscore.models.binary import BinaryModel

log = logging.getLogger(__name__)

# the cumulant tensors are dense in q + 1 dimensions
DENSE_TABLES_LIMIT = 150


class MatchedTablesModel(BinaryModel):
    family = 'matched-tables'

    def __init__(self, cases, controls, m):
        cases = np.asarray(cases, dtype=float).ravel()
        controls = np.asarray(controls, dtype=float).ravel()
        if m < 1:
            raise InputError('each table needs at least one control',
                             field='m')
        if cases.shape != controls.shape:
            raise InputError('cases and controls must pair up', field='data')
        if np.any((cases != 0) & (cases != 1)):
            raise InputError('cases must be 0 or 1', field='cases')
        q = len(cases)
        if q > DENSE_TABLES_LIMIT:
            warnings.warn('{} tables give dense tensors of {} entries'
                          .format(q, (q + 1) ** 3), RuntimeWarning,
                          stacklevel=2)
        X = np.zeros((2 * q, q + 1))
        X[:q, 0] = 1.0
        X[np.arange(q), 1 + np.arange(q)] = 1.0
        X[q + np.arange(q), 1 + np.arange(q)] = 1.0
        super().__init__(
            X, np.concatenate((cases, controls)),
            trials=np.concatenate((np.ones(q), np.full(q, m))),
            link=constants.LINK_LOGIT,
            labels=['psi'] + ['lambda{}'.format(a + 1) for a in range(q)])
        self.m = int(m)
        self.tables = q

    @classmethod
    def balanced(cls, q, m, t):
        """
        q tables sharing the total s = (m + 1) / 2 (m odd), t of them with
        an exposed case.
        """
        if m % 2 != 1:
            raise InputError('balanced tables need an odd m', field='m')
        if not 0 <= t <= q:
            raise InputError('t must lie between 0 and q', field='t')
        s = (m + 1) // 2
        cases = np.r_[np.ones(t), np.zeros(q - t)]
        return cls(cases, s - cases, m)

    @property
    def cases(self):
        return self.y[:self.tables]

    @property
    def controls(self):
        return self.y[self.tables:]

    def conditional_probabilities(self, psi):
        """P(y_a1 = 1 | s_a) under odds ratio exp(psi), per table."""
        s = self.cases + self.controls
        inner = (s >= 1) & (s <= self.m)
        prob = (s > self.m).astype(float)
        prob[inner] = special.expit(_log_binom(self.m, s[inner] - 1)
                                    - _log_binom(self.m, s[inner]) + psi)
        return prob

    def conditional_mle(self):
        """
        Maximiser of the conditional likelihood of psi given the table
        totals, infinite when t sits at an end of its conditional support.
        """
        t = float(np.sum(self.cases))
        lower = float(np.sum(self.conditional_probabilities(-np.inf)))
        upper = float(np.sum(self.conditional_probabilities(np.inf)))
        if t <= lower:
            return -np.inf
        if t >= upper:
            return np.inf

        def equation(psi):
            return float(np.sum(self.conditional_probabilities(psi))) - t
        lo, hi = expand_bracket(equation, -1.0, 1.0)
        return find_root(equation, lo, hi)

    def describe(self):
        out = super().describe()
        out.update(tables=self.tables, m=self.m)
        return out


def _log_binom(n, k):
    return (special.gammaln(n + 1) - special.gammaln(k + 1)
            - special.gammaln(n - k + 1))


def odds_ratio_sweep(q, m, ts=None, options=None):
    """
    Odds ratio estimates of balanced tables for every count t of exposed
    cases: conditional maximum likelihood, maximum likelihood, Firth and
    the median modified profile score.

    Returns:
        pandas.DataFrame: one row per t
    """
    rows = []
    for t in (range(1, q) if ts is None else ts):
        model = MatchedTablesModel.balanced(q, m, t)
        row = {'t': t, 'rho_C': np.exp(model.conditional_mle())}
        for method in (constants.METHOD_MLE, constants.METHOD_FIRTH):
            fit = solvers.fit(model, method, options)
            row['rho_' + method] = float(np.exp(fit.estimates[0]))
        profile = solvers.profile_median_fit(model, 0, options)
        row['rho_' + constants.METHOD_MEDIAN_PROFILE] = \
            float(np.exp(profile.estimate))
        log.info('balanced tables q=%d m=%d t=%d: %s', q, m, t, row)
        rows.append(row)
    return pd.DataFrame(rows)

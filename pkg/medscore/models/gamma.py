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
q independent gamma samples of size m with a common shape psi and stratum
rates lambda_a, parameter (psi, lambda_1, ..., lambda_q).
"""

import numpy as np
from scipy import special

from medscore.core.numerics import polygamma
from medscore.errors import InputError, SingularInformationError
from medscore.models.base import ModelSpec, CumulantBundle, frozen


class GammaStrataModel(ModelSpec):
    family = 'gamma-strata'

    def __init__(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] < 2:
            raise InputError('each stratum needs at least two observations',
                             field='data')
        if not np.all(np.isfinite(y)) or np.any(y <= 0):
            raise InputError('gamma observations must be positive',
                             field='data')
        self.y = frozen(y)
        self.log_sum = float(np.sum(np.log(y)))
        self.sums = frozen(np.sum(y, axis=1))
        super().__init__(['psi'] + ['lambda{}'.format(a + 1)
                                    for a in range(y.shape[0])])

    @property
    def strata(self):
        return self.y.shape[0]

    @property
    def size(self):
        return self.y.shape[1]

    def bounds(self, r):
        return 0.0, np.inf

    def _log_likelihood(self, theta):
        psi, lam = theta[0], theta[1:]
        m = self.size
        return (m * psi * np.sum(np.log(lam)) + (psi - 1) * self.log_sum
                - lam @ self.sums - m * self.strata * special.gammaln(psi))

    def _parts(self, theta):
        psi, lam = theta[0], theta[1:]
        m, q = self.size, self.strata
        score = np.concatenate((
            [self.log_sum + m * np.sum(np.log(lam)) - m * q * polygamma(0, psi)],
            m * psi / lam - self.sums))
        return psi, lam, m, q, score

    def score_and_info(self, theta):
        psi, lam, m, q, score = self._parts(self.check(theta))
        info = np.diag(np.concatenate(([m * q * polygamma(1, psi)],
                                       m * psi / lam ** 2)))
        info[0, 1:] = info[1:, 0] = -m / lam
        return score, info

    def _cumulant_bundle(self, theta):
        score, info = self.score_and_info(theta)
        psi, lam, m, q, _ = self._parts(theta)
        p = q + 1
        nu3 = np.zeros((p, p, p))
        nu3[0, 0, 0] = m * q * polygamma(2, psi)
        a = np.arange(1, p)
        nu3[a, a, a] = -2 * m * psi / lam ** 3
        nu3[0, a, a] = nu3[a, 0, a] = nu3[a, a, 0] = m / lam ** 2
        # the rates enter linearly in the natural parameter
        return CumulantBundle(score, info, nu3, np.zeros((p, p, p)))

    def scoring_step(self, theta, bundle, adjustment):
        return theta + adjustment + self._solve_arrow(bundle.info,
                                                      bundle.score)

    @staticmethod
    def _solve_arrow(info, b):
        """
        Solve with an information matrix whose nuisance block is diagonal,
        through the Schur complement of that block.
        """
        d = np.diag(info)[1:]
        c = info[1:, 0]
        schur = info[0, 0] - c @ (c / d)
        if not schur > 0:
            raise SingularInformationError(
                'information is not positive definite', pivot=0)
        x0 = (b[0] - c @ (b[1:] / d)) / schur
        return np.concatenate(([x0], (b[1:] - c * x0) / d))

    def default_start(self):
        """Rates from the stratum means and a moment start for the shape."""
        means = self.sums / self.size
        s = np.log(means) - np.mean(np.log(self.y), axis=1)
        s = max(float(np.mean(s)), 1e-8)
        psi = (3 - s + np.sqrt((s - 3) ** 2 + 24 * s)) / (12 * s)
        return np.concatenate(([psi], psi / means))

    def constrained_fit(self, r, value, start=None):
        if r != 0:
            return None
        return np.concatenate(([value], value * self.size / self.sums))

    def simulate(self, theta, rng):
        theta = self.check(theta)
        y = rng.gamma(theta[0], 1.0 / theta[1:, None],
                      size=(self.strata, self.size))
        return GammaStrataModel(y)

    def describe(self):
        out = super().describe()
        out.update(strata=self.strata, size=self.size)
        return out

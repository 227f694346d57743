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

from medscore.errors import InputError
from medscore.models.base import ModelSpec, CumulantBundle, frozen


class NormalModel(ModelSpec):
    """
    Normal sample parameterised by the variance psi. With a known mean the
    only parameter is psi, otherwise the parameter is (mu, psi).
    """
    family = 'normal'

    def __init__(self, y, known_mean=None):
        self.y = frozen(y).ravel()
        self.known_mean = None if known_mean is None else float(known_mean)
        needed = 2 if self.known_mean is not None else 3
        if len(self.y) < needed:
            raise InputError('the normal model needs at least {} observations'
                             .format(needed), field='data')
        super().__init__(('psi',) if self.known_mean is not None
                         else ('mu', 'psi'))

    @property
    def n(self):
        return len(self.y)

    def bounds(self, r):
        return (0.0, np.inf) if self.labels[r] == 'psi' else (-np.inf, np.inf)

    def _split(self, theta):
        if self.known_mean is not None:
            return self.known_mean, theta[0]
        return theta[0], theta[1]

    def _log_likelihood(self, theta):
        mu, psi = self._split(theta)
        s = np.sum((self.y - mu) ** 2)
        return -0.5 * self.n * np.log(2 * np.pi * psi) - s / (2 * psi)

    def _cumulant_bundle(self, theta):
        mu, psi = self._split(theta)
        n = self.n
        s = np.sum((self.y - mu) ** 2)
        u_psi = -n / (2 * psi) + s / (2 * psi ** 2)
        if self.known_mean is not None:
            return CumulantBundle(
                score=np.array([u_psi]),
                info=np.array([[n / (2 * psi ** 2)]]),
                nu3=np.full((1, 1, 1), n / psi ** 3),
                numix=np.full((1, 1, 1), -n / psi ** 3))

        nu3 = np.zeros((2, 2, 2))
        nu3[0, 0, 1] = nu3[0, 1, 0] = nu3[1, 0, 0] = n / psi ** 2
        nu3[1, 1, 1] = n / psi ** 3
        numix = np.zeros((2, 2, 2))
        numix[0, 0, 1] = numix[0, 1, 0] = -n / psi ** 2
        numix[1, 1, 1] = -n / psi ** 3
        return CumulantBundle(
            score=np.array([np.sum(self.y - mu) / psi, u_psi]),
            info=np.diag([n / psi, n / (2 * psi ** 2)]),
            nu3=nu3, numix=numix)

    def default_start(self):
        if self.known_mean is not None:
            return np.array([np.mean((self.y - self.known_mean) ** 2)])
        return np.array([np.mean(self.y), np.var(self.y)])

    def constrained_fit(self, r, value, start=None):
        if self.known_mean is not None:
            return np.array([value])
        if r == 1:
            return np.array([np.mean(self.y), value])
        return np.array([value, np.mean((self.y - value) ** 2)])

    def simulate(self, theta, rng):
        mu, psi = self._split(self.check(theta))
        return NormalModel(rng.normal(mu, np.sqrt(psi), size=self.n),
                           known_mean=self.known_mean)

    def describe(self):
        out = super().describe()
        out.update(n=self.n, known_mean=self.known_mean)
        return out

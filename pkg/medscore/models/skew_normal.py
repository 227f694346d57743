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
Skew normal sample with density 2 phi(y) Phi(theta y) and unknown shape
theta. Every expected quantity is a multiple of

    a_kh(theta) = E{Y^k zeta1(theta Y)^h},   zeta1(x) = phi(x) / Phi(x),

evaluated by quadrature over the real line.
"""

import functools
import logging

import numpy as np
from scipy import special, stats

from medscore.core.numerics import QuadratureSettings, integrate_real_line
from medscore.errors import InputError
from medscore.models.base import ModelSpec, CumulantBundle, frozen

log = logging.getLogger(__name__)

LOG2 = np.log(2.0)


@functools.lru_cache(maxsize=4096)
def expected_moment(k, h, theta, settings):
    """
    a_kh(theta) for the skew normal with shape theta.

    The product zeta1(theta y)^h Phi(theta y) is formed in log space, so the
    integrand stays finite where Phi underflows.
    """
    def integrand(y):
        x = theta * y
        return (2.0 * y ** k * stats.norm.pdf(y)
                * np.exp(h * stats.norm.logpdf(x)
                         - (h - 1) * special.log_ndtr(x)))
    integrand.__name__ = 'a{}{}(theta={})'.format(k, h, theta)
    value = integrate_real_line(integrand, settings)
    log.debug('%s = %.12g', integrand.__name__, value)
    return value


class SkewNormalModel(ModelSpec):
    family = 'skew-normal'

    def __init__(self, y, quadrature=None):
        self.y = frozen(y).ravel()
        if len(self.y) < 1:
            raise InputError('the skew normal model needs data', field='data')
        self.quadrature = quadrature or QuadratureSettings()
        super().__init__(('theta',))

    @property
    def n(self):
        return len(self.y)

    def moment(self, k, h, theta):
        return expected_moment(k, h, float(theta), self.quadrature)

    def _zeta1(self, x):
        return np.exp(stats.norm.logpdf(x) - special.log_ndtr(x))

    def _log_likelihood(self, theta):
        return np.sum(LOG2 + stats.norm.logpdf(self.y)
                      + special.log_ndtr(theta[0] * self.y))

    def _cumulant_bundle(self, theta):
        t = theta[0]
        a22 = self.moment(2, 2, t)
        a33 = self.moment(3, 3, t)
        a42 = self.moment(4, 2, t)
        n = self.n
        return CumulantBundle(
            score=np.array([np.sum(self.y * self._zeta1(t * self.y))]),
            info=np.array([[n * a22]]),
            nu3=np.full((1, 1, 1), n * a33),
            numix=np.full((1, 1, 1), -n * (t * a42 + a33)))

    def divergent_components(self):
        """
        Sign of the infinite maximum likelihood estimate: +1 when no
        observation is negative, -1 when none is positive.
        """
        if np.all(self.y >= 0):
            return np.array([1])
        if np.all(self.y <= 0):
            return np.array([-1])
        return None

    def simulate(self, theta, rng):
        t = self.check(theta)[0]
        delta = t / np.sqrt(1.0 + t ** 2)
        z0, z1 = rng.standard_normal((2, self.n))
        y = delta * np.abs(z0) + np.sqrt(1.0 - delta ** 2) * z1
        return SkewNormalModel(y, self.quadrature)

    def describe(self):
        out = super().describe()
        out.update(n=self.n)
        return out

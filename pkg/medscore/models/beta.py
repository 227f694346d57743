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
Beta regression with mean mu_i = g^{-1}(x_i beta) and precision phi.

An observation is a two parameter exponential family in the statistics
(log y, log(1 - y)) with natural parameters (phi mu, phi (1 - mu)) and
cumulant function K(a, b) = log B(a, b), so the expected log likelihood
derivatives are contractions of the derivatives of K with the Jacobian and
Hessian of the map from theta to the natural parameters.
"""

import numpy as np
from scipy import special

from medscore import constants
from medscore.core.numerics import polygamma
from medscore.errors import DomainError, InputError
from medscore.models.base import ModelSpec, CumulantBundle, frozen
from medscore.models.links import get_link

BETA_LINKS = (constants.LINK_LOGIT, constants.LINK_PROBIT,
              constants.LINK_CLOGLOG, constants.LINK_LOG)


class BetaRegressionModel(ModelSpec):
    family = 'beta'

    def __init__(self, X, y, link=constants.LINK_LOGIT, labels=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] != len(y):
            raise InputError('design has {} rows but there are {} responses'
                             .format(X.shape[0], len(y)), field='response')
        # responses on the boundary are rejected, not nudged
        if not np.all((y > 0) & (y < 1)):
            raise InputError('beta responses must lie strictly inside (0, 1)',
                             field='response')
        self.X = frozen(X)
        self.y = frozen(y)
        self.t = frozen(np.log(y))
        self.z = frozen(np.log1p(-y))
        self.link = get_link(link, BETA_LINKS)
        labels = list(labels or ['beta{}'.format(j + 1)
                                 for j in range(X.shape[1])])
        super().__init__(labels + ['phi'])

    @property
    def n(self):
        return len(self.y)

    def bounds(self, r):
        return (0.0, np.inf) if r == self.dimension - 1 else (-np.inf, np.inf)

    def check(self, theta):
        theta = super().check(theta)
        mu = self.link.inverse(self.X @ theta[:-1])
        if not np.all((mu > 0) & (mu < 1)):
            raise DomainError('fitted means leave (0, 1)', 'beta')
        return theta

    def in_domain(self, theta):
        try:
            self.check(theta)
        except DomainError:
            return False
        return True

    def _natural(self, theta):
        beta, phi = theta[:-1], theta[-1]
        eta = self.X @ beta
        mu = self.link.inverse(eta)
        return beta, phi, eta, mu

    def _log_likelihood(self, theta):
        _, phi, _, mu = self._natural(theta)
        a, b = phi * mu, phi * (1 - mu)
        return np.sum(special.gammaln(phi) - special.gammaln(a)
                      - special.gammaln(b) + (a - 1) * self.t
                      + (b - 1) * self.z)

    def _derivatives(self, theta):
        """
        Jacobian D (n x 2 x p) and Hessian H (n x 2 x p x p) of the natural
        parameters, and the first three derivatives of K per observation.
        """
        _, phi, eta, mu = self._natural(theta)
        d1 = self.link.inverse_deriv(eta)
        d2 = self.link.inverse_deriv2(eta)
        n, k = self.X.shape
        p = k + 1

        D = np.zeros((n, 2, p))
        D[:, 0, :k] = (phi * d1)[:, None] * self.X
        D[:, 0, k] = mu
        D[:, 1, :k] = -D[:, 0, :k]
        D[:, 1, k] = 1 - mu

        H = np.zeros((n, 2, p, p))
        H[:, 0, :k, :k] = np.einsum('i,ir,is->irs', phi * d2, self.X, self.X)
        H[:, 0, :k, k] = H[:, 0, k, :k] = d1[:, None] * self.X
        H[:, 1] = -H[:, 0]

        a, b = phi * mu, phi * (1 - mu)
        K1 = np.stack((polygamma(0, a) - polygamma(0, phi),
                       polygamma(0, b) - polygamma(0, phi)), axis=1)
        t1 = polygamma(1, phi)
        K2 = np.empty((n, 2, 2))
        K2[:, 0, 0] = polygamma(1, a) - t1
        K2[:, 1, 1] = polygamma(1, b) - t1
        K2[:, 0, 1] = K2[:, 1, 0] = -t1
        K3 = np.empty((n, 2, 2, 2))
        K3[:] = -polygamma(2, phi)
        K3[:, 0, 0, 0] += polygamma(2, a)
        K3[:, 1, 1, 1] += polygamma(2, b)
        return D, H, K1, K2, K3

    def score_and_info(self, theta):
        D, _, K1, K2, _ = self._derivatives(self.check(theta))
        resid = np.stack((self.t, self.z), axis=1) - K1
        score = np.einsum('njr,nj->r', D, resid)
        info = np.einsum('njr,njk,nks->rs', D, K2, D)
        return score, info

    def _cumulant_bundle(self, theta):
        D, H, K1, K2, K3 = self._derivatives(theta)
        resid = np.stack((self.t, self.z), axis=1) - K1
        return CumulantBundle(
            score=np.einsum('njr,nj->r', D, resid),
            info=np.einsum('njr,njk,nks->rs', D, K2, D),
            nu3=np.einsum('njkl,njr,nks,nlt->rst', K3, D, D, D,
                          optimize=True),
            numix=np.einsum('njr,njk,nkst->rst', D, K2, H, optimize=True))

    def default_start(self):
        """
        Least squares on the link scale for beta and the moment estimate of
        phi from the least squares residuals.
        """
        n, k = self.X.shape
        beta, *_ = np.linalg.lstsq(self.X, self.link(self.y), rcond=None)
        eta = self.X @ beta
        mu = self.link.inverse(eta)
        resid = self.link(self.y) - eta
        sigma2 = resid @ resid / max(n - k, 1) * self.link.inverse_deriv(eta) ** 2
        phi = np.mean(mu * (1 - mu) / sigma2) - 1
        start = np.append(beta, phi if phi > 0 else 1.0)
        if self.in_domain(start):
            return start
        flat, *_ = np.linalg.lstsq(
            self.X, np.full(n, self.link(np.mean(self.y))), rcond=None)
        return np.append(flat, 1.0)

    def simulate(self, theta, rng):
        _, phi, _, mu = self._natural(self.check(theta))
        model = BetaRegressionModel.__new__(BetaRegressionModel)
        model.__dict__.update(self.__dict__)
        y = rng.beta(phi * mu, phi * (1 - mu))
        # guard against draws that round onto the boundary
        y = np.clip(y, np.finfo(float).tiny, 1 - np.finfo(float).epsneg)
        model.y = frozen(y)
        model.t = frozen(np.log(y))
        model.z = frozen(np.log1p(-y))
        return model

    def describe(self):
        out = super().describe()
        out.update(n=self.n, link=self.link.name)
        return out

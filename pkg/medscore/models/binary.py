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
Binomial regression with success probability F(x beta), F a distribution
function given by the link. Responses are counts of successes out of a
number of trials, plain binary data has one trial per row.
"""

import logging
import warnings

import numpy as np
from scipy import optimize, special

from medscore import constants
from medscore.core.numerics import solve_spd
from medscore.errors import InputError
from medscore.models.base import ModelSpec, CumulantBundle, frozen
from medscore.models.links import get_link

log = logging.getLogger(__name__)

BINARY_LINKS = (constants.LINK_LOGIT, constants.LINK_PROBIT,
                constants.LINK_CLOGLOG)


class BinaryModel(ModelSpec):
    family = 'binary'

    def __init__(self, X, y, trials=None, link=constants.LINK_LOGIT,
                 labels=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        trials = np.ones_like(y) if trials is None \
            else np.broadcast_to(np.asarray(trials, dtype=float), y.shape)
        if X.shape[0] != len(y):
            raise InputError('design has {} rows but there are {} responses'
                             .format(X.shape[0], len(y)), field='response')
        if np.any(trials < 1) or np.any(trials != np.round(trials)):
            raise InputError('trials must be positive integers',
                             field='trials')
        if np.any(y < 0) or np.any(y > trials) or np.any(y != np.round(y)):
            raise InputError('responses must be integers between 0 and the '
                             'number of trials', field='response')
        if not np.all(np.isfinite(X)):
            raise InputError('design matrix has non-finite entries',
                             field='covariates')

        self.X = frozen(X)
        self.y = frozen(y)
        self.trials = frozen(trials)
        self.link = get_link(link, BINARY_LINKS)
        labels = labels or ['beta{}'.format(j + 1) for j in range(X.shape[1])]
        super().__init__(labels)

        if np.linalg.matrix_rank(X) < X.shape[1]:
            warnings.warn('design matrix is rank deficient, the information '
                          'will be singular', RuntimeWarning, stacklevel=2)

    @property
    def n(self):
        return len(self.y)

    def _weights(self, theta):
        """
        Per observation weights, all per trial and formed from logarithms:
        F, A = F'/{F(1-F)}, the information weight A F' and the factors of
        the two third order tensors.
        """
        eta = self.X @ theta
        log_f = self.link.log_cdf(eta)
        log_s = self.link.log_sf(eta)
        log_d = self.link.log_inverse_deriv(eta)
        F = np.exp(log_f)
        S = np.exp(log_s)
        A = np.exp(log_d - log_f - log_s)
        w = np.exp(2 * log_d - log_f - log_s)
        skew = S - F
        return {
            'F': F,
            # y - m F written as y S - (m - y) F keeps the residual of a
            # fitted row exact where F rounds to one
            'residual': self.y * S - (self.trials - self.y) * F,
            'A': A,
            'info': w,
            # A^3 F (1 - F) (1 - 2F)
            'nu3': A * w * skew,
            # B F' with B = A' the derivative of A
            'numix': w * (self.link.deriv_ratio(eta) - A * skew),
        }

    def _log_likelihood(self, theta):
        eta = self.X @ theta
        m, y = self.trials, self.y
        return np.sum(special.gammaln(m + 1) - special.gammaln(y + 1)
                      - special.gammaln(m - y + 1)
                      + np.where(y > 0, y * self.link.log_cdf(eta), 0.0)
                      + np.where(m > y, (m - y) * self.link.log_sf(eta), 0.0))

    def score_and_info(self, theta):
        theta = self.check(theta)
        w = self._weights(theta)
        m = self.trials
        score = self.X.T @ (w['A'] * w['residual'])
        info = (self.X * (m * w['info'])[:, None]).T @ self.X
        return score, info

    def _cumulant_bundle(self, theta):
        w = self._weights(theta)
        m = self.trials
        X = self.X
        score = X.T @ (w['A'] * w['residual'])
        info = (X * (m * w['info'])[:, None]).T @ X
        nu3 = np.einsum('i,ir,is,it->rst', m * w['nu3'], X, X, X,
                        optimize=True)
        # the tensor is symmetric, so the score index needs no transposition
        numix = np.einsum('i,ir,is,it->rst', m * w['numix'], X, X, X,
                          optimize=True)
        return CumulantBundle(score, info, nu3, numix)

    def scoring_step(self, theta, bundle, adjustment):
        """
        Modified iteratively reweighted least squares: regress the adjusted
        working response X(theta + adjustment) + v on X with weights W.
        X'W v equals the score, which is used directly because v itself
        overflows where F' underflows.
        """
        w = self._weights(theta)
        XW = self.X * (self.trials * w['info'])[:, None]
        rhs = XW.T @ (self.X @ (theta + adjustment)) + bundle.score
        return solve_spd(XW.T @ self.X, rhs)

    def divergent_components(self):
        """
        Signs of the components sent to infinity by separation. The
        directions d with x'd >= 0 on rows of all successes, x'd <= 0 on
        rows of all failures and x'd = 0 elsewhere form a cone, which is
        {0} exactly when the maximum likelihood estimate is finite. A
        component is infinite when some direction in the cone moves it.
        """
        X, y, m = self.X, self.y, self.trials
        sides = np.where(y == m, 1.0, np.where(y == 0, -1.0, 0.0))
        boundary = sides != 0
        if not np.any(boundary):
            return None
        A_ub = -sides[boundary, None] * X[boundary]
        A_eq = X[~boundary] if np.any(~boundary) else None
        b_eq = np.zeros(len(A_eq)) if A_eq is not None else None

        def extreme(c):
            res = optimize.linprog(c, A_ub=A_ub, b_ub=np.zeros(len(A_ub)),
                                   A_eq=A_eq, b_eq=b_eq, bounds=(-1, 1),
                                   method='highs')
            if res.status != 0:
                log.warning('separation check failed: %s', res.message)
                return None
            return res.x

        tol = constants.SEPARATION_TOL * max(1.0, np.max(np.abs(X)))
        d = extreme(A_ub.sum(axis=0))
        if d is None or -(A_ub @ d).sum() <= tol:
            return None
        cone = [d]
        for r in range(self.dimension):
            for sign in (1.0, -1.0):
                x = extreme(-sign * np.eye(self.dimension)[r])
                if x is not None:
                    cone.append(x)
        direction = np.sum(cone, axis=0)
        reach = np.max(np.abs(cone), axis=0)
        signs = np.where(reach > constants.SEPARATION_TOL,
                         np.sign(direction), 0)
        log.debug('separated data, infinite directions %s', signs)
        return signs.astype(int)

    def simulate(self, theta, rng):
        theta = self.check(theta)
        y = rng.binomial(self.trials.astype(np.int64),
                         self.link.inverse(self.X @ theta))
        return self._rebuild(y)

    def _rebuild(self, y):
        model = BinaryModel.__new__(type(self))
        model.__dict__.update(self.__dict__)
        model.y = frozen(y)
        return model

    def describe(self):
        out = super().describe()
        out.update(n=self.n, link=self.link.name,
                   trials=int(np.sum(self.trials)))
        return out

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
Link functions. A link maps a mean mu to the linear predictor eta; the
models use its inverse and the first two derivatives of the inverse. For the
binary links the inverse is a distribution function F, and the logarithms of
F, 1 - F and F' are provided in a numerically stable form.
"""

import numpy as np
from scipy import special, stats

from medscore import constants
from medscore.errors import InputError


class Link:
    name = None

    def __call__(self, mu):
        raise NotImplementedError

    def inverse(self, eta):
        raise NotImplementedError

    def log_inverse_deriv(self, eta):
        raise NotImplementedError

    def deriv_ratio(self, eta):
        """F''(eta) / F'(eta)."""
        raise NotImplementedError

    def inverse_deriv(self, eta):
        return np.exp(self.log_inverse_deriv(eta))

    def inverse_deriv2(self, eta):
        return self.inverse_deriv(eta) * self.deriv_ratio(eta)

    def log_cdf(self, eta):
        return np.log(self.inverse(eta))

    def log_sf(self, eta):
        return np.log1p(-self.inverse(eta))

    def __repr__(self):
        return '<Link {}>'.format(self.name)


class Logit(Link):
    name = constants.LINK_LOGIT

    def __call__(self, mu):
        return special.logit(mu)

    def inverse(self, eta):
        return special.expit(eta)

    def log_cdf(self, eta):
        return -np.logaddexp(0.0, -eta)

    def log_sf(self, eta):
        return -np.logaddexp(0.0, eta)

    def log_inverse_deriv(self, eta):
        return self.log_cdf(eta) + self.log_sf(eta)

    def deriv_ratio(self, eta):
        return 1.0 - 2.0 * special.expit(eta)


class Probit(Link):
    name = constants.LINK_PROBIT

    def __call__(self, mu):
        return special.ndtri(mu)

    def inverse(self, eta):
        return special.ndtr(eta)

    def log_cdf(self, eta):
        return special.log_ndtr(eta)

    def log_sf(self, eta):
        return special.log_ndtr(-np.asarray(eta))

    def log_inverse_deriv(self, eta):
        return stats.norm.logpdf(eta)

    def deriv_ratio(self, eta):
        return -np.asarray(eta, dtype=float)


class CLogLog(Link):
    """Complementary log-log, F(eta) = 1 - exp(-exp(eta))."""
    name = constants.LINK_CLOGLOG

    def __call__(self, mu):
        return np.log(-np.log1p(-np.asarray(mu)))

    def inverse(self, eta):
        return -np.expm1(-np.exp(eta))

    def log_cdf(self, eta):
        return np.log(-np.expm1(-np.exp(eta)))

    def log_sf(self, eta):
        return -np.exp(eta)

    def log_inverse_deriv(self, eta):
        return eta - np.exp(eta)

    def deriv_ratio(self, eta):
        return 1.0 - np.exp(eta)


class Log(Link):
    """Log link, only meaningful for means in (0, 1) when eta < 0."""
    name = constants.LINK_LOG

    def __call__(self, mu):
        return np.log(mu)

    def inverse(self, eta):
        return np.exp(eta)

    def log_cdf(self, eta):
        return np.asarray(eta, dtype=float)

    def log_sf(self, eta):
        return np.log(-np.expm1(eta))

    def log_inverse_deriv(self, eta):
        return np.asarray(eta, dtype=float)

    def deriv_ratio(self, eta):
        return np.ones_like(np.asarray(eta, dtype=float))


LINKS = {link.name: link for link in (Logit(), Probit(), CLogLog(), Log())}


def get_link(name, allowed=None):
    """
    Look a link up by name.

    Raises:
        InputError: for unknown names or names outside allowed
    """
    if isinstance(name, Link):
        name = name.name
    allowed = allowed or tuple(LINKS)
    if name not in allowed:
        raise InputError('unknown link {!r}, expected one of {}'
                         .format(name, ', '.join(allowed)), field='link')
    return LINKS[name]

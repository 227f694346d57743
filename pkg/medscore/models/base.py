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
The model contract. A model owns its data and evaluates, at any parameter
point of its domain, the log-likelihood and the bundle of expected log
likelihood derivatives that the adjustments consume.
"""

import abc
from dataclasses import dataclass

import numpy as np

from medscore.core.numerics import solve_spd
from medscore.errors import DomainError


@dataclass(frozen=True)
class CumulantBundle:
    """
    Score, expected information and the two third order tensors at a point.

    numix[r, s, t] is E(U_r U_st): the first index is the score component,
    the last two index the second derivative. Quantities written with the
    score index last elsewhere are stored transposed into this layout.
    """
    score: np.ndarray
    info: np.ndarray
    nu3: np.ndarray
    numix: np.ndarray

    @property
    def dimension(self):
        return len(self.score)

    def is_finite(self):
        return all(np.all(np.isfinite(a))
                   for a in (self.score, self.info, self.nu3, self.numix))


class ModelSpec(abc.ABC):
    """
    Base class of every parametric model. Instances are immutable once
    built, subclasses keep their data in read-only arrays.
    """

    #: registry name, also used by the console
    family = None

    def __init__(self, labels):
        self.labels = tuple(labels)

    @property
    def dimension(self):
        return len(self.labels)

    # Evaluators

    @abc.abstractmethod
    def _log_likelihood(self, theta):
        pass

    @abc.abstractmethod
    def _cumulant_bundle(self, theta):
        pass

    def score_and_info(self, theta):
        """Score and expected information, without the third order tensors."""
        bundle = self.cumulant_bundle(theta)
        return bundle.score, bundle.info

    def log_likelihood(self, theta):
        return float(self._log_likelihood(self.check(theta)))

    def cumulant_bundle(self, theta):
        return self._cumulant_bundle(self.check(theta))

    # Domain

    def bounds(self, r):
        """Open interval of admissible values of component r."""
        return -np.inf, np.inf

    def in_domain(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dimension,) or not np.all(np.isfinite(theta)):
            return False
        return all(lo < value < hi for value, (lo, hi)
                   in zip(theta, map(self.bounds, range(self.dimension))))

    def check(self, theta):
        """
        Validate theta against the domain.

        Returns:
            ndarray: theta as a float vector

        Raises:
            DomainError: naming the first offending component
        """
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dimension,):
            raise DomainError('expected {} parameters, got {}'
                              .format(self.dimension, theta.shape), None)
        for r, value in enumerate(theta):
            lo, hi = self.bounds(r)
            if not (np.isfinite(value) and lo < value < hi):
                raise DomainError('{} = {} is outside ({}, {})'.format(
                    self.labels[r], value, lo, hi), self.labels[r])
        return theta

    # Fitting hooks

    def default_start(self):
        return np.zeros(self.dimension)

    def constrained_fit(self, r, value, start=None):
        """
        Closed form maximiser of the likelihood over the components other
        than r with theta_r fixed at value, or None when the model has none.
        """
        return None

    def divergent_components(self):
        """
        Signs of the components whose maximum likelihood estimate is known
        to be infinite from the data alone, or None.
        """
        return None

    def scoring_step(self, theta, bundle, adjustment):
        """
        Full modified Fisher scoring step from theta, adjustment being the
        vector added to the Newton direction (zero for maximum likelihood).
        """
        return theta + adjustment + solve_spd(bundle.info, bundle.score)

    # Simulation

    def simulate(self, theta, rng):
        """A model of the same design with data drawn at theta."""
        raise NotImplementedError(
            '{} does not support simulation'.format(type(self).__name__))

    def describe(self):
        return {'family': self.family, 'parameters': list(self.labels)}

    def __repr__(self):
        return '<{}({})>'.format(type(self).__name__, ', '.join(self.labels))


def cumulant_bundle(model, theta):
    return model.cumulant_bundle(theta)


def log_likelihood(model, theta):
    return model.log_likelihood(theta)


def frozen(values, dtype=float):
    """A read-only copy of values."""
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr

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
Componentwise smooth reparameterisation theta_r = g_r(omega_r) of any
model. The wrapped bundle follows from the chain rule: score, information
and nu3 pick up a factor g'_r per index, and the mixed tensor gains the
second derivative term g''_s i_rs on its diagonal.
"""

import re

import numpy as np

from medscore.errors import InputError
from medscore.models.base import ModelSpec, CumulantBundle


class Transform:
    """theta = g(omega) on one component, g smooth and strictly monotone."""
    name = None

    def forward(self, omega):
        raise NotImplementedError

    def backward(self, theta):
        raise NotImplementedError

    def deriv(self, omega):
        raise NotImplementedError

    def deriv2(self, omega):
        raise NotImplementedError

    def bounds(self, lo, hi):
        """omega interval mapped onto the theta interval (lo, hi)."""
        return tuple(sorted((self.backward(lo), self.backward(hi))))

    def label(self, label):
        return '{}({})'.format(self.name, label)


class LogTransform(Transform):
    name = 'log'

    def forward(self, omega):
        return np.exp(omega)

    def backward(self, theta):
        with np.errstate(divide='ignore'):
            return np.log(theta)

    deriv = deriv2 = forward

    def bounds(self, lo, hi):
        if lo < 0:
            raise InputError('log coordinates need a positive parameter',
                             field='transform')
        return super().bounds(lo, hi)


class SquareTransform(Transform):
    """theta = omega^2 on omega > 0, so omega is the square root."""
    name = 'sqrt'

    def forward(self, omega):
        return omega ** 2

    def backward(self, theta):
        return np.sqrt(theta)

    def deriv(self, omega):
        return 2.0 * omega

    def deriv2(self, omega):
        return 2.0

    def bounds(self, lo, hi):
        if lo < 0:
            raise InputError('square root coordinates need a positive '
                             'parameter', field='transform')
        return super().bounds(lo, hi)


class ScaleTransform(Transform):
    def __init__(self, c):
        if c == 0:
            raise InputError('scale factor must be nonzero',
                             field='transform')
        self.c = float(c)
        self.name = 'scale{:g}'.format(self.c)

    def forward(self, omega):
        return self.c * omega

    def backward(self, theta):
        return theta / self.c

    def deriv(self, omega):
        return self.c

    def deriv2(self, omega):
        return 0.0

    def label(self, label):
        return '{}/{:g}'.format(label, self.c)


def parse_transform(value):
    """
    Build a transform from its name: 'log', 'sqrt' or 'scale:c'.

    Raises:
        InputError: for unknown names
    """
    if isinstance(value, Transform):
        return value
    value = str(value).strip()
    if value == 'log':
        return LogTransform()
    if value in ('sqrt', 'square'):
        return SquareTransform()
    match = re.fullmatch(r'scale[:(]\s*([-+0-9.eE]+)\s*\)?', value)
    if match:
        return ScaleTransform(float(match.group(1)))
    raise InputError('unknown transform {!r}'.format(value),
                     field='transform')


class ReparameterizedModel(ModelSpec):
    """
    model in the coordinates omega, transforms maps a component index (or
    label) of model to the transform of that component.
    """

    def __init__(self, model, transforms):
        self.model = model
        self.transforms = {}
        for key, spec in dict(transforms).items():
            r = model.labels.index(key) if isinstance(key, str) else int(key)
            self.transforms[r] = parse_transform(spec)
        self.family = model.family
        super().__init__([self.transforms[r].label(label)
                          if r in self.transforms else label
                          for r, label in enumerate(model.labels)])

    def _map(self, method, values):
        out = np.array(values, dtype=float)
        for r, transform in self.transforms.items():
            out[r] = getattr(transform, method)(out[r])
        return out

    def forward(self, omega):
        """Parameter of the wrapped model at omega."""
        return self._map('forward', omega)

    def backward(self, theta):
        return self._map('backward', theta)

    def bounds(self, r):
        lo, hi = self.model.bounds(r)
        if r in self.transforms:
            return self.transforms[r].bounds(lo, hi)
        return lo, hi

    def in_domain(self, theta):
        return super().in_domain(theta) and \
            self.model.in_domain(self.forward(theta))

    def _log_likelihood(self, omega):
        return self.model.log_likelihood(self.forward(omega))

    def _cumulant_bundle(self, omega):
        b = self.model.cumulant_bundle(self.forward(omega))
        g1 = np.ones(self.dimension)
        g2 = np.zeros(self.dimension)
        for r, transform in self.transforms.items():
            g1[r] = transform.deriv(omega[r])
            g2[r] = transform.deriv2(omega[r])
        numix = np.einsum('rst,r,s,t->rst', b.numix, g1, g1, g1)
        diag = np.arange(self.dimension)
        numix[:, diag, diag] += g1[:, None] * g2[None, :] * b.info
        return CumulantBundle(
            score=g1 * b.score,
            info=np.outer(g1, g1) * b.info,
            nu3=np.einsum('rst,r,s,t->rst', b.nu3, g1, g1, g1),
            numix=numix)

    def default_start(self):
        return self.backward(self.model.default_start())

    def constrained_fit(self, r, value, start=None):
        theta_r = self.transforms[r].forward(value) \
            if r in self.transforms else value
        fitted = self.model.constrained_fit(r, theta_r)
        return None if fitted is None else self.backward(fitted)

    def divergent_components(self):
        signs = self.model.divergent_components()
        if signs is None:
            return None
        signs = np.array(signs)
        for r, transform in self.transforms.items():
            if isinstance(transform, ScaleTransform) and transform.c < 0:
                signs[r] = -signs[r]
        return signs

    def simulate(self, omega, rng):
        return ReparameterizedModel(
            self.model.simulate(self.forward(self.check(omega)), rng),
            self.transforms)

    def describe(self):
        out = self.model.describe()
        out.update(parameters=list(self.labels),
                   transforms={self.model.labels[r]: t.name
                               for r, t in self.transforms.items()})
        return out

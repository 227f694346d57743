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
Special functions, quadrature over the real line, positive definite solves
and bracketed root finding shared by the rest of the engine. Everything here
is pure and safe to call from any number of workers.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special, stats
from scipy.linalg import lapack

from medscore import CONFIG
from medscore.errors import (BracketError, DomainError, IntegrationError,
                             SingularInformationError)

POLYGAMMA_ORDERS = (0, 1, 2)
ROOT_TOL = 1e-10
MAX_EXPANSIONS = 60


def polygamma(k, x):
    """
    Polygamma function of order k in {0, 1, 2}.

    Args:
        k (int): order, 0 is the digamma function
        x (float or ndarray): positive argument(s)

    Returns:
        float or ndarray: the value(s) of the k-th derivative of log-gamma
    """
    if k not in POLYGAMMA_ORDERS:
        raise DomainError('unsupported polygamma order {}'.format(k), 'k')
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):
        raise DomainError('polygamma needs x > 0, got {}'.format(x), 'x')
    value = special.digamma(arr) if k == 0 else special.polygamma(k, arr)
    return float(value) if arr.ndim == 0 else value


def std_normal(x):
    """Density and distribution function of the standard normal at x."""
    return float(stats.norm.pdf(x)), float(stats.norm.cdf(x))


@dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = CONFIG['QUADRATURE']['ABS_TOL']
    rel_tol: float = CONFIG['QUADRATURE']['REL_TOL']
    max_subdivisions: int = CONFIG['QUADRATURE']['LIMIT']

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError('quadrature tolerances must be positive',
                              'tolerance')
        if self.max_subdivisions < 1:
            raise DomainError('at least one subdivision is needed',
                              'max_subdivisions')


def integrate_real_line(f, settings=None):
    """
    Adaptive quadrature of f over the whole real line. The two half lines
    are integrated separately with the QUADPACK infinite-range rule, so the
    mass of skewed integrands piling up at the origin is resolved.

    Args:
        f (callable): integrand, real to real
        settings (QuadratureSettings): tolerances, package defaults if None

    Returns:
        float: the integral

    Raises:
        IntegrationError: when QUADPACK reports non-convergence
    """
    settings = settings or QuadratureSettings()
    total = 0.0
    for lo, hi in ((-np.inf, 0.0), (0.0, np.inf)):
        out = integrate.quad(f, lo, hi, full_output=1,
                             epsabs=settings.abs_tol,
                             epsrel=settings.rel_tol,
                             limit=settings.max_subdivisions)
        # quad appends a message only when it gives up
        if len(out) == 4:
            name = getattr(f, '__name__', repr(f))
            raise IntegrationError('integration of {} over ({}, {}) failed: '
                                   '{}'.format(name, lo, hi, out[3]), name)
        total += out[0]
    return total


def solve_spd(A, b):
    """
    Solve A x = b for a symmetric positive definite A through its Cholesky
    factor. b may be a vector or a matrix of right hand sides.

    Raises:
        SingularInformationError: carries the (0-based) index of the first
            non-positive pivot
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    factor, info = lapack.dpotrf(A, lower=1, clean=1)
    if info > 0:
        raise SingularInformationError(
            'matrix is not positive definite (pivot {})'.format(info - 1),
            pivot=info - 1)
    if info < 0:
        raise DomainError('invalid argument {} to dpotrf'.format(-info), 'A')
    rhs = b.reshape(len(b), -1)
    x, info = lapack.dpotrs(factor, rhs, lower=1)
    if info != 0:
        raise SingularInformationError('dpotrs failed with {}'.format(info))
    return x.reshape(b.shape)


def inverse_spd(A):
    """Inverse of a symmetric positive definite matrix, symmetrised."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    inv = solve_spd(A, np.eye(A.shape[0]))
    return 0.5 * (inv + inv.T)


def find_root(f, lo, hi, tol=ROOT_TOL):
    """
    Brent's method on a bracket [lo, hi] with f(lo) f(hi) <= 0.

    Raises:
        BracketError: when f does not change sign over the bracket
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise BracketError('no sign change over [{}, {}]'.format(lo, hi),
                           bracket=(lo, hi))
    return optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)


def expand_bracket(f, lo, hi, max_expansions=MAX_EXPANSIONS, bounds=None):
    """
    Widen [lo, hi], doubling its width at every step, until f changes
    sign. Ends are clipped to the open domain given by bounds.

    Returns:
        tuple: a bracket (lo, hi) with f(lo) f(hi) <= 0

    Raises:
        BracketError: after max_expansions doublings, with the last bracket
    """
    lower, upper = bounds if bounds is not None else (-np.inf, np.inf)
    flo, fhi = f(lo), f(hi)
    for _ in range(max_expansions):
        if flo * fhi <= 0:
            return lo, hi
        width = hi - lo
        # extend on the side where |f| is smaller
        # an open domain end is approached by halving, never crossed
        if abs(flo) < abs(fhi):
            lo = lo - width if lo - width > lower else 0.5 * (lo + lower)
            flo = f(lo)
        else:
            hi = hi + width if hi + width < upper else 0.5 * (hi + upper)
            fhi = f(hi)
    if flo * fhi <= 0:
        return lo, hi
    raise BracketError('no sign change found after {} expansions'
                       .format(max_expansions), bracket=(lo, hi))

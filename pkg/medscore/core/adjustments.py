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
Adjustments of the score computed from a cumulant bundle: the approximate
cumulants of the profile score of each component, the median adjustment
built from them and Firth's bias reducing adjustment.
"""

from dataclasses import dataclass

import numpy as np

from medscore.core.numerics import inverse_spd
from medscore.errors import SingularInformationError


@dataclass(frozen=True)
class ProfileCumulants:
    kappa1: float
    kappa2: float
    kappa3: float
    gamma: np.ndarray


@dataclass(frozen=True)
class MedianAdjustment:
    """M_r = -kappa1_r + kappa3_r / (6 kappa2_r) and M1_r = M_r / kappa2_r."""
    M: np.ndarray
    M1: np.ndarray
    kappa2: np.ndarray


def nuisance_inverse(info, idx):
    """Inverse of the nuisance block, by reciprocals when it is diagonal."""
    block = info[np.ix_(idx, idx)]
    diagonal = np.diag(block)
    if np.count_nonzero(block - np.diag(diagonal)) == 0:
        if np.any(diagonal <= 0):
            pivot = int(np.flatnonzero(diagonal <= 0)[0])
            raise SingularInformationError(
                'nuisance information is not positive definite',
                pivot=int(idx[pivot]))
        return np.diag(1.0 / diagonal)
    try:
        return inverse_spd(block)
    except SingularInformationError as err:
        pivot = None if err.pivot is None else int(idx[err.pivot])
        raise SingularInformationError(str(err), pivot=pivot) from err


def profile_cumulants(bundle, r):
    """
    Approximate first three cumulants of the profile score of component r.

    The efficient score of r is e.U with e_r = 1 and e_a = -gamma_a on the
    nuisance components, so kappa2 and kappa3 are contractions of info and
    nu3 with e, and kappa1 contracts the expected derivative of e.U with
    the inverse nuisance information.

    Args:
        bundle (CumulantBundle): quantities at the evaluation point
        r (int): interest component

    Returns:
        ProfileCumulants: the cumulants and the regression coefficients

    Raises:
        SingularInformationError: singular nuisance block or kappa2 <= 0
    """
    p = bundle.dimension
    idx = np.array([a for a in range(p) if a != r], dtype=int)
    e = np.zeros(p)
    e[r] = 1.0
    W = np.zeros((p, p))
    gamma = np.zeros(p - 1)
    if p > 1:
        inv = nuisance_inverse(bundle.info, idx)
        gamma = inv @ bundle.info[idx, r]
        e[idx] = -gamma
        W[np.ix_(idx, idx)] = inv

    kappa2 = float(e @ bundle.info @ e)
    if not kappa2 > 0:
        raise SingularInformationError(
            'kappa2 of component {} is {}'.format(r, kappa2), pivot=r)
    kappa3 = float(np.einsum('abc,a,b,c->', bundle.nu3, e, e, e))
    kappa1 = 0.0
    if p > 1:
        mixed = np.einsum('c,cab->ab', e, bundle.numix + bundle.nu3)
        kappa1 = -0.5 * float(np.sum(W * mixed))
    return ProfileCumulants(kappa1, kappa2, kappa3, gamma)


def median_adjustment(bundle):
    """
    M_r = -kappa1_r + kappa3_r / (6 kappa2_r) for every component at once.

    Column r of the inverse information, divided by its diagonal entry, is
    the e of component r, 1 / i^{rr} is kappa2 and the padded inverse of
    the nuisance block is i^{-1} - i^{-1}_r i^{-1}_r' / i^{rr}, so one
    inversion serves all components.
    """
    inv = inverse_spd(bundle.info)
    diagonal = np.diag(inv)
    E = inv / diagonal
    kappa2 = 1.0 / diagonal
    if not np.all(kappa2 > 0):
        pivot = int(np.flatnonzero(~(kappa2 > 0))[0])
        raise SingularInformationError(
            'kappa2 of component {} is {}'.format(pivot, kappa2[pivot]),
            pivot=pivot)
    kappa3 = np.einsum('abc,ar,br,cr->r', bundle.nu3, E, E, E, optimize=True)
    mixed = bundle.numix + bundle.nu3
    full = E.T @ np.einsum('cab,ab->c', mixed, inv)
    rank_one = diagonal * np.einsum('cab,cr,ar,br->r', mixed, E, E, E,
                                    optimize=True)
    kappa1 = -0.5 * (full - rank_one)
    M = -kappa1 + kappa3 / (6.0 * kappa2)
    return MedianAdjustment(M, M / kappa2, kappa2)


def firth_adjustment(bundle):
    """
    Firth's adjustment A_r = 1/2 sum_st i^st (nu_{r,s,t} + nu_{r,st}); the
    bias reduced score is U + A.
    """
    inv = inverse_spd(bundle.info)
    return 0.5 * np.einsum('st,rst->r', inv, bundle.nu3 + bundle.numix)


def median_score(bundle, adjustment=None):
    """The joint median modified score U + i M1."""
    adjustment = adjustment or median_adjustment(bundle)
    return bundle.score + bundle.info @ adjustment.M1


def firth_score(bundle):
    return bundle.score + firth_adjustment(bundle)


def efficient_score_matrix(bundle):
    """
    The matrix A with the efficient scores A U as rows: row r is 1 on r
    and -gamma_ra on the other components.
    """
    p = bundle.dimension
    A = np.eye(p)
    for r in range(p):
        idx = np.array([a for a in range(p) if a != r], dtype=int)
        if len(idx):
            A[r, idx] = -nuisance_inverse(bundle.info, idx) @ \
                bundle.info[idx, r]
    return A


def sensitivity_matrix(bundle):
    """
    Expected negative derivative of the efficient scores, A i. It equals
    diag(1 / [i^-1]_rr), so every efficient score is insensitive to the
    other components to first order.
    """
    return efficient_score_matrix(bundle) @ bundle.info

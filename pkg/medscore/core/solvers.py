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
Estimation: maximum likelihood, Firth's bias reduction and median bias
reduction by modified Fisher scoring, the median modified profile score of
a single component, and Wald and score confidence intervals.
"""

import logging
import warnings
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy import stats

from medscore import CONFIG, constants
from medscore.core import adjustments
from medscore.core.numerics import (expand_bracket, find_root, inverse_spd,
                                    solve_spd)
from medscore.errors import (BracketError, ConvergenceWarning, DomainError,
                             FinitenessWarning, InputError, MedscoreError,
                             SingularInformationError)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitOptions:
    max_iter: int = CONFIG['FIT']['MAX_ITER']
    tol: float = CONFIG['FIT']['TOL']
    halvings: int = CONFIG['FIT']['HALVINGS']
    divergence: float = CONFIG['FIT']['DIVERGENCE']
    max_step: float = CONFIG['FIT']['MAX_STEP']
    start: Optional[tuple] = None

    def __post_init__(self):
        for name in ('max_iter', 'tol', 'divergence', 'max_step'):
            if not getattr(self, name) > 0:
                raise InputError('{} must be positive'.format(name),
                                 field=name)
        if self.halvings < 0:
            raise InputError('halvings must not be negative',
                             field='halvings')


@dataclass
class FitResult:
    method: str
    labels: tuple
    estimates: np.ndarray
    std_errors: np.ndarray
    vcov: np.ndarray
    iterations: int
    converged: bool
    finite: np.ndarray
    log_likelihood: float
    trace: List[dict] = field(default_factory=list)
    diverged: bool = False

    def named(self, values=None):
        values = self.estimates if values is None else values
        return dict(zip(self.labels, (float(v) for v in values)))


@dataclass
class ProfileFit:
    method: str
    component: int
    label: str
    estimate: float
    std_error: float
    kappa2: float
    theta: np.ndarray
    converged: bool
    evaluations: int
    boundary: Optional[str] = None
    trace: List[dict] = field(default_factory=list)

    @property
    def finite(self):
        return self.boundary is None and bool(np.isfinite(self.estimate))


@dataclass(frozen=True)
class ConfidenceInterval:
    component: int
    level: float
    lower: float
    upper: float
    kind: str
    half_open: Optional[str] = None


def canonical_method(method):
    try:
        return constants.METHOD_ALIASES[method]
    except KeyError:
        raise InputError('unknown method {!r}'.format(method),
                         field='method') from None


def scaled_norm(target, info):
    """Infinity norm of a score-like vector divided by sqrt(diag(info))."""
    return float(np.max(np.abs(target) / np.sqrt(np.diag(info))))


class _Evaluation:
    """
    Everything the iteration needs at one point: the bundle, the vector
    added to the Newton direction, the adjusted score and the merit.
    """

    def __init__(self, model, method, theta):
        self.theta = theta
        if method == constants.METHOD_MLE:
            score, info = model.score_and_info(theta)
            self.bundle = SimpleNamespace(score=score, info=info)
            self.shift = np.zeros_like(theta)
            self.target = score
            self.loglik = model.log_likelihood(theta)
            self.merit = -self.loglik
        else:
            self.bundle = model.cumulant_bundle(theta)
            info = self.bundle.info
            if method == constants.METHOD_FIRTH:
                self.target = adjustments.firth_score(self.bundle)
                self.shift = solve_spd(info, self.target - self.bundle.score)
            else:
                adj = adjustments.median_adjustment(self.bundle)
                self.shift = adj.M1
                self.target = self.bundle.score + info @ adj.M1
            self.loglik = None
            self.merit = scaled_norm(self.target, info)
        self.norm = scaled_norm(self.target, self.bundle.info)


def _evaluate(model, method, theta):
    """An evaluation, or None where theta is outside the usable region."""
    if not model.in_domain(theta):
        return None
    try:
        point = _Evaluation(model, method, theta)
    except (DomainError, SingularInformationError) as err:
        log.debug('rejected point %s: %s', theta, err)
        return None
    if not (np.isfinite(point.merit) and np.all(np.isfinite(point.target))):
        return None
    return point


def _starting_point(model, method, options):
    if options.start is not None:
        return np.array(options.start, dtype=float)
    if method != constants.METHOD_MLE:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter('ignore')
                mle = fit(model, constants.METHOD_MLE, options)
            if mle.converged and np.all(mle.finite):
                return mle.estimates.copy()
        except MedscoreError as err:
            log.debug('no maximum likelihood start: %s', err)
    return np.asarray(model.default_start(), dtype=float)


def fit(model, method=constants.METHOD_MEDIAN, options=None):
    """
    Modified Fisher scoring,

        theta <- theta + shift(theta) + i(theta)^{-1} U(theta),

    with shift = M1 for median bias reduction, i^{-1} A for Firth's
    adjustment A and 0 for maximum likelihood. A step is halved while it
    leaves the domain or worsens the merit, the negative log-likelihood for
    maximum likelihood and the scaled adjusted score otherwise.

    Args:
        model (ModelSpec): the model with its data
        method (str): one of constants.METHODS or an alias
        options (FitOptions): iteration controls

    Returns:
        FitResult: the estimates, converged or not, with the full trace

    Raises:
        DomainError: if the start is outside the domain
        SingularInformationError: if the information at the start is
            singular
    """
    options = options or FitOptions()
    method = canonical_method(method)
    if method == constants.METHOD_MEDIAN_PROFILE:
        return _profile_all(model, options)

    if method == constants.METHOD_MLE:
        signs = model.divergent_components()
        if signs is not None and np.any(signs):
            return _separated_result(model, np.sign(signs), options)

    theta = model.check(_starting_point(model, method, options))
    run = _iterate(model, method, theta, options)
    if run.diverged:
        infinite, signs = _drifting(run, options)
        if np.any(infinite):
            log.info('mle diverged after %d iterations', run.iterations)
            return _diverged_result(model, run, infinite, signs)
    result = _result(model, method, run.point, run.trace, run.iterations,
                     run.converged)
    if run.converged:
        log.info('%s converged in %d iterations', method, run.iterations)
    else:
        warnings.warn('{} did not converge in {} iterations (norm {:.3e})'
                      .format(method, run.iterations, run.point.norm),
                      ConvergenceWarning, stacklevel=2)
    return result


def _iterate(model, method, theta, options):
    """
    The scoring loop from theta. Convergence needs a small adjusted score
    together with a small step or, for the adjusted scores, a small
    adjusted score where no halving improves the merit any further.
    """
    point = _Evaluation(model, method, theta)
    trace = []
    logliks = []
    converged = diverged = False
    iteration = 0

    for iteration in range(1, options.max_iter + 1):
        trace.append({'iteration': iteration - 1,
                      'theta': point.theta.tolist(),
                      'norm': point.norm})
        try:
            full = model.scoring_step(point.theta, point.bundle, point.shift)
        except SingularInformationError as err:
            log.warning('%s: singular information at iteration %d: %s',
                        method, iteration, err)
            diverged = method == constants.METHOD_MLE
            break
        step = full - point.theta
        biggest = np.max(np.abs(step))
        if biggest > options.max_step:
            step *= options.max_step / biggest
        log.debug('%s iteration %d: norm %.3e, step %.3e', method,
                  iteration - 1, point.norm, biggest)

        small = biggest <= np.sqrt(options.tol) * \
            (1.0 + np.max(np.abs(point.theta)))
        if point.norm <= options.tol and small:
            converged = True
            break

        accepted = None
        fallback = None
        for halving in range(options.halvings + 1):
            candidate = _evaluate(model, method,
                                  point.theta + step / 2 ** halving)
            if candidate is None:
                continue
            fallback = candidate
            if candidate.merit <= point.merit:
                accepted = candidate
                break
        if accepted is None:
            if method != constants.METHOD_MLE and point.norm <= options.tol:
                # merit is flat to rounding around an adjusted score root
                converged = True
                break
            if fallback is None:
                log.warning('%s: no admissible step from %s', method,
                            point.theta)
                break
            log.warning('%s: step halving exhausted at iteration %d',
                        method, iteration)
            accepted = fallback
        point = accepted

        if method == constants.METHOD_MLE:
            logliks.append(point.loglik)
            if _diverging(point.theta, logliks, options):
                diverged = True
                break
    if converged:
        iteration -= 1
    return SimpleNamespace(point=point, trace=trace, iterations=iteration,
                           converged=converged, diverged=diverged)


def _diverging(theta, logliks, options):
    window = constants.DIVERGENCE_WINDOW
    if np.max(np.abs(theta)) <= options.divergence or \
            len(logliks) <= window:
        return False
    # increments vanish in floating point far out on a separated path
    recent = np.diff(logliks[-(window + 1):])
    noise = 1e-12 * (1.0 + abs(logliks[-1]))
    return bool(np.all(recent >= -noise))


def _drifting(run, options):
    """
    The components still drifting over the last iterations, or beyond the
    divergence threshold, with the direction they drift in.
    """
    window = constants.DIVERGENCE_WINDOW
    theta = run.point.theta
    past = np.array(run.trace[-window]['theta']) if len(run.trace) >= window \
        else np.array(run.trace[0]['theta'])
    drift = theta - past
    infinite = np.abs(theta) > options.divergence
    if np.max(np.abs(drift)) > 0:
        infinite |= np.abs(drift) >= 0.1 * np.max(np.abs(drift))
    signs = np.sign(np.where(drift != 0, drift, theta))
    return infinite & (signs != 0), signs


def _vcov(info):
    try:
        return inverse_spd(info)
    except SingularInformationError:
        return np.full(info.shape, np.nan)


def _result(model, method, point, trace, iteration, converged):
    vcov = _vcov(point.bundle.info)
    theta = point.theta
    return FitResult(
        method=method, labels=model.labels, estimates=theta.copy(),
        std_errors=np.sqrt(np.diag(vcov)), vcov=vcov,
        iterations=iteration, converged=converged,
        finite=np.ones(len(theta), dtype=bool),
        log_likelihood=model.log_likelihood(theta), trace=trace)


def _diverged_result(model, run, infinite, signs):
    """
    Infinite components go to signs * inf, the others keep the value of
    the last iterate, which is their limit along the path.
    """
    point = run.point
    estimates = np.where(infinite, signs * np.inf, point.theta)
    vcov = _vcov(point.bundle.info)
    vcov[infinite, :] = vcov[:, infinite] = np.inf
    warnings.warn('maximum likelihood estimate of {} is infinite'.format(
        ', '.join(np.array(model.labels)[infinite])), FinitenessWarning,
        stacklevel=3)
    return FitResult(
        method=constants.METHOD_MLE, labels=model.labels,
        estimates=estimates, std_errors=np.sqrt(np.diag(vcov)), vcov=vcov,
        iterations=run.iterations, converged=True, finite=~infinite,
        log_likelihood=point.loglik, trace=run.trace, diverged=True)


def _separated_result(model, signs, options):
    """
    The model knows from the data which components are infinite. The rest
    come from iterating until the score of the infinite ones vanishes.
    """
    infinite = signs != 0
    if np.all(infinite):
        return _infinite_result(model, signs)
    theta = model.check(_starting_point(model, constants.METHOD_MLE,
                                        options))
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        run = _iterate(model, constants.METHOD_MLE, theta, options)
    log.info('mle separated, %d components infinite', np.sum(infinite))
    return _diverged_result(model, run, infinite, signs)


def _infinite_result(model, signs):
    signs = np.asarray(signs)
    infinite = signs != 0
    p = model.dimension
    estimates = np.where(infinite, signs * np.inf, np.nan)
    warnings.warn('maximum likelihood estimate of {} is infinite'.format(
        ', '.join(np.array(model.labels)[infinite])), FinitenessWarning,
        stacklevel=3)
    return FitResult(
        method=constants.METHOD_MLE, labels=model.labels,
        estimates=estimates, std_errors=np.full(p, np.inf),
        vcov=np.full((p, p), np.inf), iterations=0, converged=True,
        finite=~infinite, log_likelihood=np.nan, diverged=True)


# Profile score

def constrained_mle(model, r, value, start=None, options=None):
    """
    Maximum likelihood over the components other than r, with theta_r held
    at value, by Fisher scoring on the nuisance block.

    Returns:
        ndarray: the full parameter (value, nuisance estimates)
    """
    options = options or FitOptions()
    closed = model.constrained_fit(r, value, start)
    if closed is not None:
        return np.asarray(closed, dtype=float)

    theta = np.array(model.default_start() if start is None else start,
                     dtype=float)
    theta[r] = value
    idx = np.array([a for a in range(model.dimension) if a != r])
    if len(idx) == 0:
        return theta
    loglik = model.log_likelihood(theta)
    for _ in range(options.max_iter):
        score, info = model.score_and_info(theta)
        block = info[np.ix_(idx, idx)]
        if scaled_norm(score[idx], block) <= options.tol:
            return theta
        step = solve_spd(block, score[idx])
        biggest = np.max(np.abs(step))
        if biggest > options.max_step:
            step *= options.max_step / biggest
        for halving in range(options.halvings + 1):
            candidate = theta.copy()
            candidate[idx] += step / 2 ** halving
            if model.in_domain(candidate):
                new = model.log_likelihood(candidate)
                if new >= loglik:
                    break
        else:
            log.warning('constrained fit at %s = %g stalled',
                        model.labels[r], value)
            return theta
        theta, loglik = candidate, new
    warnings.warn('constrained fit at {} = {} did not converge'.format(
        model.labels[r], value), ConvergenceWarning, stacklevel=2)
    return theta


class ProfileScore:
    """
    The profile score of component r, U_P(psi) = U_r(psi, lambda_psi),
    and its median modification U_P - kappa1 + kappa3 / (6 kappa2), as
    functions of psi. Nuisance fits are warm started from the last one.
    """

    def __init__(self, model, r, method=constants.METHOD_MEDIAN,
                 options=None, start=None):
        self.model = model
        self.r = r
        self.method = canonical_method(method)
        self.options = options or FitOptions()
        self.theta = None if start is None else np.array(start, dtype=float)
        self.evaluations = 0
        self.trace = []

    def point(self, psi):
        self.theta = constrained_mle(self.model, self.r, psi, self.theta,
                                     self.options)
        return self.theta

    def evaluate(self, psi):
        """
        Returns:
            tuple: (score, kappa2) at (psi, lambda_psi)
        """
        theta = self.point(psi)
        self.evaluations += 1
        if self.method == constants.METHOD_MLE:
            score, info = self.model.score_and_info(theta)
            value = score[self.r]
            kappa2 = 1.0 / inverse_spd(info)[self.r, self.r]
        else:
            bundle = self.model.cumulant_bundle(theta)
            k = adjustments.profile_cumulants(bundle, self.r)
            value = bundle.score[self.r] - k.kappa1 + \
                k.kappa3 / (6.0 * k.kappa2)
            kappa2 = k.kappa2
        self.trace.append({'psi': float(psi), 'score': float(value),
                           'kappa2': float(kappa2)})
        return value, kappa2

    def __call__(self, psi):
        return self.evaluate(psi)[0]

    def standardized(self, psi):
        value, kappa2 = self.evaluate(psi)
        return value / np.sqrt(kappa2)


def _profile_center(model, r, options):
    """A starting value for psi: the joint estimate when there is one."""
    if options.start is not None:
        return float(options.start[r])
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        try:
            joint = fit(model, constants.METHOD_MEDIAN, options)
            if joint.converged:
                return float(joint.estimates[r])
        except MedscoreError as err:
            log.debug('joint fit unavailable as profile start: %s', err)
    return float(model.default_start()[r])


def profile_median_fit(model, r, options=None, method=constants.METHOD_MEDIAN):
    """
    Root of the median modified profile score of component r.

    The root is bracketed from the joint estimate outwards, within the
    domain of the component, and refined with Brent's method. When the
    score keeps its sign up to a domain end the estimate is reported at
    that end.

    Args:
        model (ModelSpec): the model with its data
        r (int): interest component
        options (FitOptions): iteration controls, also for nuisance fits
        method (str): median-br for the modified score, mle for the plain
            profile score

    Returns:
        ProfileFit: estimate, standard error 1/sqrt(kappa2) and trace
    """
    options = options or FitOptions()
    profile = ProfileScore(model, r, method, options)
    lower, upper = model.bounds(r)
    center = _profile_center(model, r, options)
    _, kappa2 = profile.evaluate(center)
    width = 1.0 / np.sqrt(kappa2)
    lo = center - width if center - width > lower else 0.5 * (center + lower)
    hi = center + width if center + width < upper else 0.5 * (center + upper)

    boundary = None
    try:
        lo, hi = expand_bracket(profile, lo, hi, bounds=(lower, upper))
        estimate = find_root(profile, lo, hi, tol=options.tol)
        converged = True
    except BracketError as err:
        lo, hi = err.bracket
        # a score still positive at the top end pushes the root upwards
        boundary = 'upper' if profile(hi) > 0 else 'lower'
        estimate = upper if boundary == 'upper' else lower
        converged = False
        log.info('profile score of %s keeps its sign, estimate at the %s '
                 'end', model.labels[r], boundary)

    # theta is the last point evaluated when the estimate is on a boundary
    kappa2 = profile.evaluate(estimate)[1] if converged else np.nan
    theta = profile.theta.copy()
    return ProfileFit(
        method=constants.METHOD_MEDIAN_PROFILE
        if profile.method == constants.METHOD_MEDIAN else profile.method,
        component=r, label=model.labels[r], estimate=float(estimate),
        std_error=float(1.0 / np.sqrt(kappa2)), kappa2=float(kappa2),
        theta=theta, converged=converged, evaluations=profile.evaluations,
        boundary=boundary, trace=profile.trace)


def profile_covariance(model, fits):
    """
    Covariance and log-likelihood to report with profile fits: the inverse
    information and the log-likelihood at the profile estimates when every
    component has a finite fit inside the domain, otherwise the squared
    standard errors on the diagonal and nan.
    """
    std_errors = np.array([f.std_error for f in fits])
    if len(fits) == model.dimension and all(f.finite for f in fits):
        estimates = np.empty(model.dimension)
        estimates[[f.component for f in fits]] = [f.estimate for f in fits]
        if model.in_domain(estimates):
            return (_vcov(model.score_and_info(estimates)[1]),
                    model.log_likelihood(estimates))
    return np.diag(std_errors ** 2), np.nan


def _profile_all(model, options):
    fits = [profile_median_fit(model, r, options)
            for r in range(model.dimension)]
    estimates = np.array([f.estimate for f in fits])
    vcov, loglik = profile_covariance(model, fits)
    return FitResult(
        method=constants.METHOD_MEDIAN_PROFILE, labels=model.labels,
        estimates=estimates, std_errors=np.array([f.std_error for f in fits]),
        vcov=vcov, iterations=sum(f.evaluations for f in fits),
        converged=all(f.converged for f in fits),
        finite=np.isfinite(estimates), log_likelihood=loglik,
        trace=[{'component': f.label, 'evaluations': f.trace} for f in fits])


# Intervals

def _quantile(level):
    if not 0 <= level < 1:
        raise InputError('level must lie in [0, 1)', field='level')
    return float(stats.norm.ppf(0.5 + level / 2.0))


def wald_interval(result, r, level=0.95):
    """
    estimate -/+ z std_error, the whole line for an infinite estimate.

    Args:
        result (FitResult or ProfileFit): a fit
        r (int): component
        level (float): confidence level
    """
    z = _quantile(level)
    if isinstance(result, ProfileFit):
        estimate, se = result.estimate, result.std_error
    else:
        estimate, se = result.estimates[r], result.std_errors[r]
    if not np.isfinite(estimate):
        warnings.warn('component {} is infinite, its Wald interval is the '
                      'real line'.format(r), FinitenessWarning, stacklevel=2)
        return ConfidenceInterval(r, level, -np.inf, np.inf,
                                  constants.INTERVAL_WALD)
    return ConfidenceInterval(r, level, float(estimate - z * se),
                              float(estimate + z * se),
                              constants.INTERVAL_WALD)


def score_interval(model, r, level=0.95, options=None,
                   method=constants.METHOD_MEDIAN, center=None):
    """
    Interval of the psi where the standardized (modified) profile score
    lies within -/+ z. Each end is bracketed by stepping from the Wald end
    of its side in steps of two standard errors; an end that cannot be
    bracketed is left at the domain boundary and flagged.

    Args:
        model (ModelSpec): the model with its data
        r (int): interest component
        level (float): confidence level
        options (FitOptions): iteration controls
        method (str): median-br (or its profile variant) for the modified
            profile score, mle for the plain one
        center (ProfileFit): the profile estimate if already computed

    Returns:
        ConfidenceInterval: possibly half open
    """
    method = canonical_method(method)
    if method not in constants.SCORE_INTERVAL_METHODS:
        raise InputError('no score interval for {}'.format(method),
                         field='method')
    if method == constants.METHOD_MEDIAN_PROFILE:
        method = constants.METHOD_MEDIAN
    options = options or FitOptions()
    z = _quantile(level)
    if center is None:
        center = profile_median_fit(model, r, options, method)
    lower, upper = model.bounds(r)
    profile = ProfileScore(model, r, method, options, start=center.theta)

    ends = {}
    open_ends = []
    inner = float(center.theta[r])
    se = center.std_error if np.isfinite(center.std_error) else 1.0
    for side, target, sign in (('lower', z, -1.0), ('upper', -z, 1.0)):
        if center.boundary == side:
            ends[side] = center.estimate
            continue
        # the search starts at the Wald end of the same side
        start = inner + sign * z * se
        if not lower < start < upper:
            start = 0.5 * (inner + (upper if sign > 0 else lower))
        ends[side], bracketed = _score_end(profile, start, 2.0 * se, target,
                                           (lower, upper))
        if not bracketed:
            open_ends.append(side)
    half_open = '-'.join(open_ends) or None
    if half_open:
        log.warning('score interval of %s is open at the %s end',
                    model.labels[r], half_open)
    return ConfidenceInterval(r, level, float(min(ends.values())),
                              float(max(ends.values())),
                              constants.INTERVAL_SCORE, half_open)


def _score_end(profile, inner, step, target, bounds):
    """
    Root of the standardized score minus target, searched from inner in
    the direction the (decreasing) score points to.

    Returns:
        tuple: (end, bracketed), the domain end when no root was bracketed
    """
    lower, upper = bounds

    def equation(psi):
        return profile.standardized(psi) - target

    f_inner = equation(inner)
    if f_inner == 0:
        return inner, True
    upwards = f_inner > 0
    limit = upper if upwards else lower
    for _ in range(constants.SCORE_BRACKET_STEPS):
        outer = inner + step if upwards else inner - step
        if (upwards and outer >= upper) or (not upwards and outer <= lower):
            outer = 0.5 * (inner + limit)
        f_outer = equation(outer)
        if f_inner * f_outer <= 0:
            lo, hi = sorted((inner, outer))
            return find_root(equation, lo, hi, tol=profile.options.tol), True
        inner, f_inner = outer, f_outer
    return limit, False


def score_curve(model, grid):
    """
    The score, Firth's modified score and the median modified score of a
    one parameter model over a grid of values.

    Returns:
        pandas.DataFrame: columns theta, mle, firth, median-br
    """
    if model.dimension != 1:
        raise InputError('score curves need a one parameter model',
                         field='model')
    rows = []
    for value in grid:
        bundle = model.cumulant_bundle([value])
        rows.append({
            'theta': float(value),
            constants.METHOD_MLE: float(bundle.score[0]),
            constants.METHOD_FIRTH: float(adjustments.firth_score(bundle)[0]),
            constants.METHOD_MEDIAN: float(
                adjustments.median_score(bundle)[0]),
        })
    return pd.DataFrame(rows)

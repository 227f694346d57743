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
Seeded Monte Carlo comparison of estimators. Every replication draws its
data from an independent substream of the configured seed, fits each
method on the same dataset and records estimates and intervals; summarize
reduces the records to the percentage of underestimation (PU), median
absolute error (MAE), bias (B), root mean squared error (RMSE) and the
coverages of Wald and score intervals.
"""

import functools
import json
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np
import pandas as pd

from medscore import CONFIG, constants
from medscore.core import solvers
from medscore.errors import InputError, MedscoreError
from medscore.models import from_config, utils

log = logging.getLogger(__name__)

DEFAULT_METHODS = (constants.METHOD_MLE, constants.METHOD_FIRTH,
                   constants.METHOD_MEDIAN)


@dataclass(frozen=True)
class SimulationConfig:
    """
    model is a from_config mapping used as a template: its data are only
    a shape, every replication replaces them with a draw at truth.
    components restricts the report (and the profile fits) to some labels.
    """
    model: dict
    truth: tuple
    replications: int
    seed: int = CONFIG['SEED']
    methods: tuple = DEFAULT_METHODS
    level: float = 0.95
    components: Optional[tuple] = None
    score_intervals: bool = True
    condition_on_finite: tuple = (constants.METHOD_MLE,)
    name: str = 'simulation'
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.replications) < 1:
            raise InputError('replications must be at least 1',
                             field='replications')
        if not self.methods:
            raise InputError('at least one method is needed', field='methods')
        object.__setattr__(self, 'methods', tuple(
            solvers.canonical_method(m) for m in self.methods))
        object.__setattr__(self, 'truth',
                           tuple(float(v) for v in self.truth))
        if not 0 < self.level < 1:
            raise InputError('level must lie in (0, 1)', field='level')
        if 'family' not in self.model:
            raise InputError('model.family is required', field='model')

    @classmethod
    def from_dict(cls, data):
        """
        Raises:
            InputError: naming the first unknown or missing field
        """
        if not isinstance(data, dict):
            raise InputError('a simulation config is a mapping', field='')
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise InputError('unknown field {!r}'.format(key), field=key)
        for key in ('model', 'truth', 'replications'):
            if key not in data:
                raise InputError('missing field {!r}'.format(key), field=key)
        data = dict(data)
        for key in ('methods', 'components', 'condition_on_finite'):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        try:
            return cls(**data)
        except (TypeError, ValueError) as err:
            if isinstance(err, InputError):
                raise
            raise InputError(str(err), field='') from None

    @classmethod
    def load(cls, path):
        return cls.from_dict(utils.load_document(path))

    def fit_options(self):
        try:
            return solvers.FitOptions(**self.options)
        except TypeError as err:
            raise InputError(str(err), field='options') from None


@dataclass
class SimulationSummary:
    name: str
    replications: int
    seed: int
    table: pd.DataFrame
    failures: dict
    separated: float

    def to_dict(self):
        def clean(value):
            return None if isinstance(value, float) and np.isnan(value) \
                else value
        rows = [{k: clean(v) for k, v in row.items()}
                for row in self.table.reset_index().to_dict('records')]
        return {'name': self.name, 'replications': self.replications,
                'seed': self.seed, 'failures': self.failures,
                'separated': self.separated, 'rows': rows}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self):
        return self.table.to_csv(float_format='%.17g')

    def to_text(self):
        """Aligned table at three decimals, unavailable entries as --."""
        columns = list(constants.TABLE_COLUMNS) + ['finite']
        return self.table[columns].to_string(float_format='%.3f',
                                              na_rep='--')


def _replicate(template, config, r):
    """One replication: a draw at truth and every method fitted on it."""
    seq = np.random.SeedSequence(config.seed, spawn_key=(r,))
    rng = np.random.default_rng(seq)
    options = config.fit_options()
    components = _components(template, config)
    record = {'r': r, 'fits': {}}
    try:
        model = template.simulate(np.array(config.truth), rng)
    except MedscoreError as err:
        log.warning('replication %d (spawn key %s): no data: %s', r,
                    seq.spawn_key, err)
        record['error'] = str(err)
        return record

    joints = {}
    profiles = {}

    def joint(method):
        if method not in joints:
            joints[method] = solvers.fit(model, method, options)
        return joints[method]

    def profile(c, method=constants.METHOD_MEDIAN):
        # the joint fit of the same score is the bracketing start
        if (c, method) not in profiles:
            started = options
            try:
                start = joint(method)
                if start.converged and np.all(start.finite):
                    started = replace(options,
                                      start=tuple(start.estimates))
            except MedscoreError as err:
                log.debug('no joint start for %s: %s', method, err)
            profiles[c, method] = solvers.profile_median_fit(
                model, c, started, method)
        return profiles[c, method]

    for method in config.methods:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter('ignore')
                record['fits'][method] = _fit_method(
                    model, method, components, config, options, joint,
                    profile)
        except (MedscoreError, FloatingPointError) as err:
            log.warning('replication %d (spawn key %s): %s failed: %s', r,
                        seq.spawn_key, method, err)
            record['fits'][method] = None
    return record


def _fit_method(model, method, components, config, options, joint, profile):
    k = len(components)
    out = {'estimates': np.full(k, np.nan), 'wald': np.full((k, 2), np.nan),
           'score': np.full((k, 2), np.nan), 'converged': True}
    if method == constants.METHOD_MEDIAN_PROFILE:
        fits = [profile(c) for c in components]
        out['estimates'] = np.array([f.estimate for f in fits])
        out['converged'] = all(f.converged for f in fits)
        walds = [solvers.wald_interval(f, c, config.level)
                 for c, f in zip(components, fits)]
    else:
        result = joint(method)
        out['estimates'] = result.estimates[components]
        out['converged'] = result.converged
        walds = [solvers.wald_interval(result, c, config.level)
                 for c in components]
    out['wald'] = np.array([[w.lower, w.upper] for w in walds])
    if config.score_intervals and \
            method in constants.SCORE_INTERVAL_METHODS:
        score = constants.METHOD_MLE if method == constants.METHOD_MLE \
            else constants.METHOD_MEDIAN
        scores = [solvers.score_interval(model, c, config.level, options,
                                         method, profile(c, score))
                  for c in components]
        out['score'] = np.array([[s.lower, s.upper] for s in scores])
    return out


def _components(model, config):
    if config.components is None:
        return list(range(model.dimension))
    try:
        return [model.labels.index(c) if isinstance(c, str) else int(c)
                for c in config.components]
    except ValueError:
        raise InputError('components must be labels of {}'.format(
            ', '.join(model.labels)), field='components') from None


def summarize(estimates, finite, intervals, truth, condition_on_finite=False):
    """
    Metrics of one method and component over the replications.

    Args:
        estimates (array): one estimate per replication
        finite (array): finiteness flags
        intervals (dict): kind to an R x 2 array of (lower, upper), or None
            where the kind is unavailable
        truth (float): the true value
        condition_on_finite (bool): compute B, RMSE and coverages over the
            replications with a finite estimate only

    Returns:
        dict: PU, MAE, B, RMSE, the coverages and their Monte Carlo
        standard errors, all percentages in [0, 100]

    Raises:
        InputError: for empty or misaligned inputs
    """
    estimates = np.asarray(estimates, dtype=float)
    finite = np.asarray(finite, dtype=bool)
    if estimates.size == 0:
        raise InputError('nothing to summarize', field='estimates')
    if finite.shape != estimates.shape:
        raise InputError('estimates and finite flags differ in length',
                         field='finite')

    def share(hits):
        n = len(hits)
        p = float(np.mean(hits)) if n else np.nan
        return 100.0 * p, 100.0 * np.sqrt(p * (1.0 - p) / n) if n else np.nan

    errors = estimates - truth
    kept = finite if condition_on_finite else np.ones_like(finite)
    row = {}
    row['PU'], row['PU_se'] = share(estimates <= truth)
    row['MAE'] = float(np.median(np.abs(errors)))
    with np.errstate(invalid='ignore'):
        row['B'] = float(np.mean(errors[kept])) if kept.any() else np.nan
        row['RMSE'] = float(np.sqrt(np.mean(errors[kept] ** 2))) \
            if kept.any() else np.nan
    for kind, column in ((constants.INTERVAL_WALD, 'Wald'),
                         (constants.INTERVAL_SCORE, 'Score')):
        bounds = (intervals or {}).get(kind)
        if bounds is None:
            row[column] = row[column + '_se'] = np.nan
            continue
        bounds = np.asarray(bounds, dtype=float)[kept]
        covered = (bounds[:, 0] <= truth) & (truth <= bounds[:, 1])
        row[column], row[column + '_se'] = share(covered)
    row['finite'] = 100.0 * float(np.mean(finite))
    row['n'] = int(len(estimates))
    return row


def run_simulation(config, workers=None):
    """
    Run the replications of config, in parallel when workers > 1. The
    number of workers is capped by MEDSCORE_THREADS and the result does
    not depend on it.

    Returns:
        SimulationSummary: one row per method and component
    """
    template = from_config(config.model)
    components = _components(template, config)
    if len(config.truth) != template.dimension:
        raise InputError('truth has {} values, the model {} parameters'
                         .format(len(config.truth), template.dimension),
                         field='truth')
    template.check(np.array(config.truth))
    cap = max(1, int(CONFIG['THREADS']))
    workers = int(workers or cap)
    if workers > cap:
        log.warning('%d workers requested, MEDSCORE_THREADS allows %d',
                    workers, cap)
    workers = max(1, min(workers, cap))
    task = functools.partial(_replicate, template, config)
    indices = range(config.replications)
    log.info('%s: %d replications on %d workers', config.name,
             config.replications, workers)
    if workers == 1:
        records = [task(r) for r in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, config.replications // (4 * workers))
            records = list(pool.map(task, indices, chunksize=chunk))
    records.sort(key=lambda rec: rec['r'])
    return _aggregate(template, config, components, records)


def _aggregate(template, config, components, records):
    rows = []
    failures = {}
    separated = np.nan
    for method in config.methods:
        fits = [rec['fits'].get(method) for rec in records]
        ok = [f for f in fits if f is not None]
        failures[method] = len(fits) - len(ok)
        if not ok:
            continue
        estimates = np.array([f['estimates'] for f in ok])
        finite = np.isfinite(estimates)
        if method == constants.METHOD_MLE:
            separated = 100.0 * float(np.mean(~finite.all(axis=1)))
        for j, c in enumerate(components):
            intervals = {constants.INTERVAL_WALD:
                         np.array([f['wald'][j] for f in ok])}
            if config.score_intervals and \
                    method in constants.SCORE_INTERVAL_METHODS:
                intervals[constants.INTERVAL_SCORE] = \
                    np.array([f['score'][j] for f in ok])
            row = summarize(estimates[:, j], finite[:, j], intervals,
                            config.truth[c],
                            method in config.condition_on_finite)
            row['converged'] = 100.0 * float(np.mean(
                [f['converged'] for f in ok]))
            rows.append(dict(method=method, component=template.labels[c],
                             **row))
    table = pd.DataFrame(rows).set_index(['method', 'component']) \
        if rows else pd.DataFrame()
    for method, count in failures.items():
        if count:
            log.warning('%s: %d of %d replications failed', method, count,
                        len(records))
    return SimulationSummary(
        name=config.name, replications=config.replications,
        seed=config.seed, table=table, failures=failures,
        separated=separated)

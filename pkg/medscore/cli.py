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
Command line frontend.

    console fit --model binary --method mbr --data @endometrial \
        --response HG --covariates NV,PI,EH --intercept
    console simulate configs/gamma_strata.json --workers 4
    console oracle --design @hirji
    console curve --model skew-normal --data sample.csv --response y \
        --grid -5:15:81

Exit status 0 on success, 1 on malformed input, 2 when a numerical
procedure does not converge.
"""

import argparse
import json
import logging
import sys
import warnings

import numpy as np

from medscore import CONFIG, constants
from medscore.core import oracle, simulation, solvers
from medscore.errors import (DomainError, InputError, MedscoreError,
                             SupportOverflowError)
from medscore.models import from_config, utils

log = logging.getLogger(__name__)

FORMATS = ('json', 'csv', 'text')


def _levels(value):
    level = float(value)
    if not 0 < level < 1:
        raise argparse.ArgumentTypeError('level must lie in (0, 1)')
    return level


def _transforms(pairs):
    out = {}
    for pair in pairs or []:
        label, sep, name = pair.partition('=')
        if not sep:
            raise InputError('transform {!r} is not label=name'.format(pair),
                             field='transform')
        out[label.strip()] = name.strip()
    return out


def _model_config(args):
    config = {
        'family': args.model,
        'data': args.data,
        'response': args.response,
        'covariates': args.covariates,
        'intercept': args.intercept,
        'link': args.link,
        'trials': args.trials,
        'known_mean': args.known_mean,
        'strata': args.strata,
        'm': args.m,
        'transforms': _transforms(args.transform),
    }
    return {k: v for k, v in config.items() if v is not None}


def _options(args):
    values = {}
    if args.max_iter is not None:
        values['max_iter'] = args.max_iter
    if args.tol is not None:
        values['tol'] = args.tol
    return solvers.FitOptions(**values)


def _component_indices(model, names):
    if not names:
        return list(range(model.dimension))
    out = []
    for name in names.split(','):
        name = name.strip()
        if name not in model.labels:
            raise InputError('unknown component {!r}, the model has {}'
                             .format(name, ', '.join(model.labels)),
                             field='component')
        out.append(model.labels.index(name))
    return out


def _pair(interval):
    return [interval.lower, interval.upper]


def cmd_fit(args):
    """
    Fit one model and print the report.

    Returns:
        int: exit status
    """
    model = from_config(_model_config(args))
    options = _options(args)
    method = solvers.canonical_method(args.method)
    components = _component_indices(model, args.component)
    labels = [model.labels[c] for c in components]

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        if method == constants.METHOD_MEDIAN_PROFILE:
            fits = [solvers.profile_median_fit(model, c, options)
                    for c in components]
            report = {
                'estimates': dict(zip(labels, (f.estimate for f in fits))),
                'std_errors': dict(zip(labels, (f.std_error for f in fits))),
                'iterations': sum(f.evaluations for f in fits),
                'converged': all(f.converged for f in fits),
                'finite': dict(zip(labels, (f.finite for f in fits))),
                'boundary': dict(zip(labels, (f.boundary for f in fits))),
            }
            vcov, loglik = solvers.profile_covariance(model, fits)
            report['vcov'] = vcov.tolist()
            report['log_likelihood'] = \
                float(loglik) if np.isfinite(loglik) else None
            walds = [solvers.wald_interval(f, c, args.level)
                     for c, f in zip(components, fits)]
            centers = dict(zip(components, fits))
        else:
            result = solvers.fit(model, method, options)
            report = {
                'estimates': result.named(),
                'std_errors': result.named(result.std_errors),
                'vcov': result.vcov.tolist(),
                'iterations': result.iterations,
                'converged': result.converged,
                'finite': dict(zip(model.labels,
                                   (bool(f) for f in result.finite))),
                'log_likelihood': result.log_likelihood,
            }
            walds = [solvers.wald_interval(result, c, args.level)
                     for c in components]
            centers = {}
        report['wald_intervals'] = dict(zip(labels, map(_pair, walds)))

        if args.score and method in constants.SCORE_INTERVAL_METHODS:
            scores = {}
            for c in components:
                interval = solvers.score_interval(
                    model, c, args.level, options, method, centers.get(c))
                scores[model.labels[c]] = {'interval': _pair(interval),
                                           'half_open': interval.half_open}
            report['score_intervals'] = scores

    report = dict({'name': CONFIG['NAME'], 'model': model.describe(),
                   'method': method, 'level': args.level}, **report)
    report['warnings'] = [str(w.message) for w in caught]
    _emit(json.dumps(report, indent=2, default=_default), args.output)
    return constants.EXIT_OK if report['converged'] \
        else constants.EXIT_NONCONVERGENCE


def cmd_simulate(args):
    data = utils.load_document(args.config)
    if args.seed is not None:
        data['seed'] = args.seed
    if args.replications is not None:
        data['replications'] = args.replications
    config = simulation.SimulationConfig.from_dict(data)
    summary = simulation.run_simulation(config, args.workers)
    if args.format == 'csv':
        _emit(summary.to_csv(), args.output)
    elif args.format == 'text':
        _emit(summary.to_text(), args.output)
    else:
        _emit(summary.to_json(), args.output)
    return constants.EXIT_OK


def _design(name):
    if name.startswith('simple'):
        _, _, m = name.partition(':')
        return oracle.simple_design(int(m) if m else 1), None
    document = utils.load_document(name)
    return oracle.EnumerableDesign.from_dict(document), document.get('s')


def cmd_oracle(args):
    design, s_obs = _design(args.design)
    if args.s is not None:
        s_obs = [float(v) for v in args.s.split(',')]
    options = _options(args)
    if args.t is None:
        table = oracle.oracle_table(design, s_obs, options)
        if args.format == 'csv':
            _emit(table.to_csv(index=False, float_format='%.17g'),
                  args.output)
        elif args.format == 'text':
            _emit(table.to_string(index=False, float_format='%.3f'),
                  args.output)
        else:
            _emit(json.dumps(table.to_dict('records'), indent=2,
                             default=_default), args.output)
    else:
        row = oracle.oracle_row(design, args.t, s_obs, options)
        _emit(json.dumps(row, indent=2, default=_default), args.output)
    return constants.EXIT_OK


def cmd_curve(args):
    model = from_config(_model_config(args))
    try:
        lo, hi, n = args.grid.split(':')
        grid = np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        raise InputError('grid must be lo:hi:n', field='grid') from None
    table = solvers.score_curve(model, grid)
    _emit(table.to_csv(index=False, float_format='%.17g'), args.output)
    return constants.EXIT_OK


def _default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError('{!r} is not serializable'.format(value))


def _emit(text, output=None):
    if output:
        with open(output, 'w') as stream:
            stream.write(text + '\n')
    else:
        sys.stdout.write(text + '\n')


def _add_model_flags(parser):
    parser.add_argument('--model', required=True,
                        choices=sorted(['binary', 'beta', 'gamma-strata',
                                        'normal', 'skew-normal',
                                        'matched-tables']))
    parser.add_argument('--data', help='csv file or @name of a dataset')
    parser.add_argument('--response')
    parser.add_argument('--covariates', help='comma separated columns')
    parser.add_argument('--intercept', action='store_true')
    parser.add_argument('--link', choices=sorted(
        [constants.LINK_LOGIT, constants.LINK_PROBIT,
         constants.LINK_CLOGLOG, constants.LINK_LOG]))
    parser.add_argument('--trials', help='column of numbers of trials')
    parser.add_argument('--known-mean', type=float)
    parser.add_argument('--strata', help='column of stratum labels')
    parser.add_argument('--m', type=int, help='controls per table')
    parser.add_argument('--transform', action='append',
                        help='label=log|sqrt|scale:c, repeatable')


def _add_fit_flags(parser):
    parser.add_argument('--max-iter', type=int)
    parser.add_argument('--tol', type=float)
    parser.add_argument('--output', help='write to a file, not stdout')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='console',
        description='median bias reduced estimation')
    parser.add_argument('-v', '--verbose', action='store_true')
    commands = parser.add_subparsers(dest='command', required=True)

    fit = commands.add_parser('fit', help='fit a model')
    _add_model_flags(fit)
    _add_fit_flags(fit)
    fit.add_argument('--method', default=constants.METHOD_MEDIAN,
                     choices=sorted(constants.METHOD_ALIASES))
    fit.add_argument('--component', help='labels to profile or report')
    fit.add_argument('--level', type=_levels, default=0.95)
    fit.add_argument('--no-score', dest='score', action='store_false',
                     help='skip score intervals')
    fit.set_defaults(handler=cmd_fit)

    simulate = commands.add_parser('simulate', help='run a simulation')
    simulate.add_argument('config', help='json or yaml configuration')
    simulate.add_argument('--seed', type=int)
    simulate.add_argument('--replications', type=int)
    simulate.add_argument('--workers', type=int)
    simulate.add_argument('--format', choices=FORMATS, default='json')
    simulate.add_argument('--output')
    simulate.set_defaults(handler=cmd_simulate)

    exact = commands.add_parser('oracle', help='compare with exact '
                                'median unbiased estimates')
    exact.add_argument('--design', default='@hirji',
                       help='design file, @name or simple:m')
    exact.add_argument('--t', type=float, help='one value, all if absent')
    exact.add_argument('--s', help='comma separated conditioning values')
    exact.add_argument('--format', choices=FORMATS, default='json')
    _add_fit_flags(exact)
    exact.set_defaults(handler=cmd_oracle)

    curve = commands.add_parser('curve', help='score functions on a grid')
    _add_model_flags(curve)
    curve.add_argument('--grid', default='-5:15:81')
    curve.add_argument('--output')
    curve.set_defaults(handler=cmd_curve)
    return parser


def setup_logging(verbose=False):
    logging.basicConfig(
        level=logging.DEBUG if verbose else CONFIG['LOG_LEVEL'],
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.handler(args)
    except (InputError, SupportOverflowError, DomainError) as err:
        if CONFIG['DEBUG']:
            raise
        where = []
        if getattr(err, 'line', None) is not None:
            where.append('line {}'.format(err.line))
        if getattr(err, 'field', None):
            where.append('field {}'.format(err.field))
        print('error: {}{}'.format(
            err, ' ({})'.format(', '.join(where)) if where else ''),
            file=sys.stderr)
        return constants.EXIT_INPUT
    except MedscoreError as err:
        if CONFIG['DEBUG']:
            raise
        print('error: {}'.format(err), file=sys.stderr)
        return constants.EXIT_NONCONVERGENCE


if __name__ == '__main__':
    sys.exit(main())

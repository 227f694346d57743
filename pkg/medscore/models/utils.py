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
Ingestion of tabular data and documents: strict CSV parsing with line
numbered diagnostics, YAML and JSON documents, and the bundled datasets
addressable as @name.
"""

import json
import os
import re

import numpy as np
import pandas as pd
import yaml

from medscore import CONFIG
from medscore.errors import InputError

# to preserve the import consistency
try:
    from yaml import CSafeLoader as Loader
except ImportError:
    from yaml import SafeLoader as Loader

DATASET_SUFFIXES = ('.csv', '.yaml', '.yml', '.json')
_TOKENIZER_LINE = re.compile(r'line (\d+)')


def resolve_path(path):
    """
    Map @name to the bundled dataset of that name, leave anything else as
    given.

    Raises:
        InputError: when the file does not exist
    """
    path = os.fspath(path)
    if path.startswith('@'):
        name = path[1:]
        for suffix in ('',) + DATASET_SUFFIXES:
            candidate = os.path.join(CONFIG['DATA_DIR'], name + suffix)
            if os.path.isfile(candidate):
                return candidate
        raise InputError('no bundled dataset named {!r}'.format(name),
                         field='data')
    if not os.path.isfile(path):
        raise InputError('no such file {!r}'.format(path), field='data')
    return path


def has_dataset(name):
    try:
        resolve_path('@' + name)
    except InputError:
        return False
    return True


def parse_yaml(yaml_path):
    """
    Loads a yaml document from the system and returns it

    Args:
        yaml_path (os.path): location of the yaml file

    Returns:
        dict: parsed yaml content
    """
    with open(resolve_path(yaml_path), 'r') as stream:
        try:
            return yaml.load(stream, Loader=Loader)
        except yaml.YAMLError as err:
            line = getattr(getattr(err, 'problem_mark', None), 'line', None)
            raise InputError('malformed yaml: {}'.format(err),
                             line=None if line is None else line + 1) \
                from None


def parse_json(json_path):
    with open(resolve_path(json_path), 'r') as stream:
        try:
            return json.load(stream)
        except json.JSONDecodeError as err:
            raise InputError('malformed json: {}'.format(err.msg),
                             line=err.lineno) from None


def load_document(path):
    """A JSON or YAML document, chosen by the file suffix."""
    path = resolve_path(path)
    if path.endswith('.json'):
        return parse_json(path)
    return parse_yaml(path)


def read_csv(path, columns=None):
    """
    Read a comma separated file with a header row into a frame of floats.
    Nothing is coerced silently: an empty or non numeric cell is an error
    naming its line.

    Args:
        path (str): file path or @name of a bundled dataset
        columns (list): the columns that must be present, all by default

    Returns:
        pandas.DataFrame: the requested columns as float64

    Raises:
        InputError: on malformed rows, unknown columns or bad cells
    """
    path = resolve_path(path)
    try:
        raw = pd.read_csv(path, sep=',', dtype=str, keep_default_na=False,
                          skipinitialspace=True, encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise InputError('{} is empty'.format(path), field='data') from None
    except pd.errors.ParserError as err:
        match = _TOKENIZER_LINE.search(str(err))
        raise InputError('malformed csv {}: {}'.format(path, err),
                         line=int(match.group(1)) if match else None) \
            from None

    columns = list(raw.columns) if columns is None else list(columns)
    for column in columns:
        if column not in raw.columns:
            raise InputError('unknown column {!r}, the file has {}'.format(
                column, ', '.join(raw.columns)), field=column)

    frame = pd.DataFrame(index=raw.index)
    for column in columns:
        values = pd.to_numeric(raw[column].str.strip(), errors='coerce')
        bad = np.flatnonzero(values.isna().to_numpy())
        if len(bad):
            # line 1 is the header
            line = int(bad[0]) + 2
            raise InputError('line {}: column {!r} holds {!r}, not a number'
                             .format(line, column, raw[column].iloc[bad[0]]),
                             line=line, field=column)
        frame[column] = values.astype(float)
    return frame


def design_matrix(frame, covariates, intercept=True):
    """
    Returns:
        tuple: (X, labels), X with a leading column of ones when intercept
    """
    covariates = list(covariates or [])
    missing = [c for c in covariates if c not in frame.columns]
    if missing:
        raise InputError('unknown column {!r}'.format(missing[0]),
                         field=missing[0])
    labels = (['(Intercept)'] if intercept else []) + covariates
    if not labels:
        raise InputError('the design has no columns', field='covariates')
    parts = [np.ones(len(frame))] if intercept else []
    parts += [frame[c].to_numpy(dtype=float) for c in covariates]
    return np.column_stack(parts), labels


def load_foodexp():
    """Household food expenditure: share of income, income and persons."""
    return read_csv('@foodexp', ['share', 'income', 'persons'])


def load_endometrial():
    """Endometrial cancer grade with the NV, PI and EH covariates."""
    return read_csv('@endometrial', ['NV', 'PI', 'EH', 'HG'])

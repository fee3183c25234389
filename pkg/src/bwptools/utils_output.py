# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import csv
import json
import math
from dataclasses import dataclass, fields
from typing import Optional

from bwptools.utils import DomainError, tool_version

__all__ = ['SweepRecord', 'columns', 'makeRecord', 'optimumRecords', 'formatNumber', 'parseNumber',
           'write_records', 'read_records']

# --------------------------------------------------------------------------------------------------
## @package utils_output
#
#  Machine readable output. Every row echoes its inputs and carries a method tag.
#
#  Formats:
#  --------
#  csv  | header row, comma separated, '.17g' floats, 'inf' for infinity, empty for n/a
#  json | {"meta": {...}, "rows": [...]} with the same columns, infinity as the string "inf"
#
# --------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRecord:
    lam: Optional[float]
    alpha: Optional[float]
    rate: Optional[float]
    bandwidth: Optional[float]
    mode: Optional[str]
    n_subbands: Optional[float]
    epsilon: Optional[float]
    metric: str
    value: Optional[float]
    method: str
    b: Optional[float] = None
    stderr: Optional[float] = None
    detail: str = ''
    seed: Optional[int] = None
    window_radius: Optional[float] = None
    version: str = tool_version


columns = ['lambda', 'alpha', 'rate', 'bandwidth', 'mode', 'n_subbands', 'epsilon', 'b',
           'metric', 'value', 'stderr', 'method', 'detail', 'seed', 'window_radius', 'version']

# Column name to field name
_field = {'lambda': 'lam'}

_text_columns = {'mode', 'metric', 'method', 'detail', 'version'}

_integer_columns = {'n_subbands', 'seed'}

# --------------------------------------------------------------------------------------------------


def makeRecord(p, mode, n, eps, metric, value, method, **extra):

    # p is a NetworkParams, mode a Mode or its text
    return SweepRecord(lam=p.lam, alpha=p.alpha, rate=p.rate, bandwidth=p.bandwidth,
                       mode=getattr(mode, 'value', mode), n_subbands=n, epsilon=eps,
                       metric=metric, value=value, method=method, **extra)


def optimumRecords(p, mode, eps, optimum):

    """Rows n_star, lambda_star, s_max (and local_delay when set) of a DensityOptimum."""

    method = optimum.method.value
    pstar = p.with_lambda(optimum.lambda_star) if math.isfinite(optimum.lambda_star) else p
    n = int(optimum.n_star) if math.isfinite(optimum.n_star) else math.inf
    rows = [makeRecord(pstar, mode, n, eps, 'n_star', n, method),
            makeRecord(pstar, mode, n, eps, 'lambda_star', optimum.lambda_star, method),
            makeRecord(pstar, mode, n, eps, 's_max', optimum.s_max, method)]
    if optimum.delay is not None:
        rows.append(makeRecord(pstar, mode, n, eps, 'local_delay', optimum.delay, method))
    return rows

# --------------------------------------------------------------------------------------------------


def formatNumber(value):

    if value is None:
        return ''
    if isinstance(value, bool):
        raise DomainError('Boolean is not a number: '+str(value))
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    if math.isnan(value):
        return 'nan'
    return format(value, '.17g')


def parseNumber(text, integer=False):

    if text is None or text == '':
        return None
    if isinstance(text, (int, float)):
        return text
    value = float(text)
    if integer and math.isfinite(value) and value == int(value) and 'e' not in text.lower() \
            and '.' not in text:
        return int(text)
    return value

# --------------------------------------------------------------------------------------------------


def _row(record):

    row = {}
    for column in columns:
        value = getattr(record, _field.get(column, column))
        if column in _text_columns:
            row[column] = '' if value is None else str(value)
        else:
            row[column] = value
    return row


def _json_number(value):

    if value is None:
        return None
    if isinstance(value, float) and not math.isfinite(value):
        return formatNumber(value)
    return value


def write_records(records, stream, fmt='csv', meta=None):

    if fmt == 'csv':
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(columns)
        for record in records:
            row = _row(record)
            writer.writerow([row[column] if column in _text_columns else formatNumber(row[column])
                             for column in columns])

    elif fmt == 'json':
        rows = []
        for record in records:
            row = _row(record)
            rows.append({column: (row[column] if column in _text_columns
                                  else _json_number(row[column])) for column in columns})
        document = {'meta': meta or {}, 'rows': rows}
        stream.write(json.dumps(document, indent=1, allow_nan=False, default=_json_default))
        stream.write('\n')

    else:
        raise DomainError('Unknown output format \''+str(fmt)+'\'')


def _json_default(value):

    # numpy scalars in metadata
    if hasattr(value, 'item'):
        return _json_number(value.item())
    raise TypeError('Cannot serialise '+repr(value))

# --------------------------------------------------------------------------------------------------


def read_records(stream, fmt='csv'):

    if fmt == 'csv':
        rows = list(csv.DictReader(stream))
    elif fmt == 'json':
        rows = json.load(stream)['rows']
    else:
        raise DomainError('Unknown output format \''+str(fmt)+'\'')

    names = {f.name for f in fields(SweepRecord)}
    records = []
    for row in rows:
        kwargs = {}
        for column in columns:
            text = row.get(column)
            if column in _text_columns:
                kwargs[_field.get(column, column)] = text if text is not None else ''
            else:
                kwargs[_field.get(column, column)] = parseNumber(text, column in _integer_columns)
        if kwargs['mode'] == '':
            kwargs['mode'] = None
        records.append(SweepRecord(**{k: v for k, v in kwargs.items() if k in names}))

    return records

# --------------------------------------------------------------------------------------------------

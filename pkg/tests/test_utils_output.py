# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import io
import json
import math

import numpy as np
import pytest

from bwptools import utils_output
from bwptools.model import Mode, NetworkParams
from bwptools.optimize import DensityOptimum, OptimumMethod
from bwptools.utils import DomainError, tool_version

# --------------------------------------------------------------------------------------------------


@pytest.fixture
def records():
    p = NetworkParams(0.1, 4.0, 0.1, 1.0)
    return [utils_output.makeRecord(p, Mode.ADAPTIVE_SIR, 2, 0.01, 'meta_distribution', 0.25,
                                    'exact'),
            utils_output.makeRecord(p, 'adaptive-time', 1, None, 'local_delay', math.inf, 'exact',
                                    detail='diverges'),
            utils_output.makeRecord(p, Mode.ADAPTIVE_SIR, 2, None, 'moment', 0.61052,
                                    'monte-carlo', b=1.0, stderr=0.002, seed=7,
                                    window_radius=40.0)]

# --------------------------------------------------------------------------------------------------


def test_format_number():
    assert utils_output.formatNumber(None) == ''
    assert utils_output.formatNumber(3) == '3'
    assert utils_output.formatNumber(0.1) == '0.10000000000000001'
    assert utils_output.formatNumber(math.inf) == 'inf'
    assert utils_output.formatNumber(-math.inf) == '-inf'
    assert utils_output.formatNumber(np.float64(0.5)) == '0.5'
    with pytest.raises(DomainError):
        utils_output.formatNumber(True)


def test_parse_number():
    assert utils_output.parseNumber('') is None
    assert utils_output.parseNumber('inf') == math.inf
    assert utils_output.parseNumber('4', integer=True) == 4
    assert isinstance(utils_output.parseNumber('4', integer=True), int)
    assert utils_output.parseNumber('4.0', integer=True) == 4.0
    assert utils_output.parseNumber('0.10000000000000001') == 0.1

# --------------------------------------------------------------------------------------------------


def test_csv_layout(records):
    stream = io.StringIO()
    utils_output.write_records(records, stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == ','.join(utils_output.columns)
    assert len(lines) == 1 + len(records)

    second = dict(zip(utils_output.columns, lines[2].split(',')))
    assert second['value'] == 'inf'
    assert second['epsilon'] == ''
    assert second['mode'] == 'adaptive-time'
    assert second['version'] == tool_version


@pytest.mark.parametrize('fmt', ['csv', 'json'])
def test_records_read_back(records, fmt):
    stream = io.StringIO()
    utils_output.write_records(records, stream, fmt, meta={'command': 'test'})
    stream.seek(0)
    assert utils_output.read_records(stream, fmt) == records


def test_json_document(records):
    stream = io.StringIO()
    utils_output.write_records(records, stream, 'json', meta={'seed': np.int64(7)})
    document = json.loads(stream.getvalue())
    assert document['meta'] == {'seed': 7}
    assert document['rows'][1]['value'] == 'inf'
    assert document['rows'][1]['epsilon'] is None
    assert list(document['rows'][0]) == utils_output.columns


def test_unknown_format(records):
    with pytest.raises(DomainError):
        utils_output.write_records(records, io.StringIO(), 'xml')
    with pytest.raises(DomainError):
        utils_output.read_records(io.StringIO(''), 'xml')

# --------------------------------------------------------------------------------------------------


def test_optimum_records():
    p = NetworkParams(0.1, 4.0, 0.1, 1.0)
    finite = DensityOptimum(2, 0.05, 0.03, OptimumMethod.ASYMPTOTIC, delay=3.5)
    rows = utils_output.optimumRecords(p, Mode.ADAPTIVE_SIR, 0.01, finite)
    assert [r.metric for r in rows] == ['n_star', 'lambda_star', 's_max', 'local_delay']
    assert all(r.lam == 0.05 and r.n_subbands == 2 and r.method == 'asymptotic' for r in rows)

    diverging = DensityOptimum(math.inf, math.inf, math.inf, OptimumMethod.ASYMPTOTIC)
    rows = utils_output.optimumRecords(p, Mode.ADAPTIVE_TIME, 0.01, diverging)
    assert [r.metric for r in rows] == ['n_star', 'lambda_star', 's_max']
    assert rows[0].value == math.inf
    assert rows[0].lam == 0.1

# --------------------------------------------------------------------------------------------------

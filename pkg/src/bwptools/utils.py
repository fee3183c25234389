# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import os
import sys

import click
from ruamel.yaml import YAML

__all__ = ['tool_version', 'BwpError', 'DomainError', 'ConvergenceError', 'QuadratureError',
           'RootNotBracketedError', 'InfeasibleConstraintError', 'abort', 'message', 'warning',
           'setQuiet', 'configGet', 'readConfig', 'createPath',
           'worker_count']

# --------------------------------------------------------------------------------------------------

tool_version = '0.1.0'

# Environment variable capping the worker threads
threads_env = 'BWP_THREADS'

_quiet = False

# --------------------------------------------------------------------------------------------------


class BwpError(Exception):
    """Base class for every error raised by bwptools."""


class DomainError(BwpError, ValueError):
    """A parameter lies outside the range where the requested quantity is defined."""


class ConvergenceError(BwpError, ArithmeticError):
    """A series, quadrature or search exhausted its budget without meeting its tolerance."""


class QuadratureError(ConvergenceError):
    pass


class RootNotBracketedError(ConvergenceError):
    pass


class InfeasibleConstraintError(BwpError):
    """No candidate satisfies the delay constraint."""

# --------------------------------------------------------------------------------------------------


def abort(message, status=1):

    click.echo('ABORT: '+message, err=True)
    sys.exit(status)

# --------------------------------------------------------------------------------------------------


def setQuiet(quiet):

    global _quiet
    _quiet = bool(quiet)

# --------------------------------------------------------------------------------------------------


def message(text):

    # Informational lines go to stderr, stdout carries data only
    if not _quiet:
        click.echo(' '+text, err=True)

# --------------------------------------------------------------------------------------------------


def warning(text):

    click.echo(' *** WARNING ***: '+text, err=True)

# --------------------------------------------------------------------------------------------------


def configGet(conf, config_string, default=None):

    try:
        config_variable = conf[config_string]
    except (KeyError, TypeError):
        config_variable = default

    return config_variable

# --------------------------------------------------------------------------------------------------


def readConfig(config):

    # Configure the yaml object
    yaml = YAML(typ='safe')
    yaml.default_flow_style = False

    with open(config) as full_conf:
        conf = yaml.load(full_conf)

    if conf is None:
        conf = {}
    if not isinstance(conf, dict):
        raise click.UsageError('Configuration file '+config+' must hold a mapping of flag: value')

    return conf

# --------------------------------------------------------------------------------------------------


def createPath(dirpath):

    if dirpath and not os.path.exists(dirpath):
        os.makedirs(dirpath)

# --------------------------------------------------------------------------------------------------


def worker_count():

    # Thread cap only changes speed, never values
    threads = os.environ.get(threads_env)
    if threads is None or threads.strip() == '':
        return os.cpu_count() or 1
    try:
        nthreads = int(threads)
    except ValueError:
        raise DomainError(threads_env+' must be a positive integer, got \''+threads+'\'')
    if nthreads < 1:
        raise DomainError(threads_env+' must be a positive integer, got \''+threads+'\'')

    return nthreads

# --------------------------------------------------------------------------------------------------

# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import dataclasses
import os
import sys

import click

from bwptools import mcsim, model, optimize, reproduce, utils, utils_output
from bwptools.model import Mode, NetworkParams, PartitionScheme
from bwptools.utils import ConvergenceError, DomainError, InfeasibleConstraintError
from bwptools.utils_output import makeRecord

__all__ = ['cli', 'run', 'main']

# --------------------------------------------------------------------------------------------------
## @package bwptools
#
#  Driver for every analytic, optimization, simulation and reproduction application in bwptools.
#
#  bwptools.x [--config app.yaml] [--quiet] <subcommand> [flags]
#
#  Subcommands:
#  ------------
#  moment           | b-th moment of the conditional success probability
#  meta             | meta distribution, exact (Gil-Pelaez) or asymptotic
#  density          | density of reliable transmissions
#  delay            | local delay and normalized local delay
#  optimize-density | optimal (N, lambda) of the density of reliable transmissions
#  optimize-delay   | optimal number of sub-bands for the local delay
#  tradeoff         | density maximized under a local delay cap
#  simulate         | Monte Carlo estimates of moment, meta distribution and local delay
#  reproduce        | fig1, fig2, table1
#
#  Configuration yaml keys are the long flag names (lambda: 0.1, window-radius: 40). Flags given
#  on the command line override the file.
#
#  Exit codes: 0 success, 2 usage or domain error, 3 numerical failure, 4 infeasible constraint.
#
# --------------------------------------------------------------------------------------------------

prog_name = 'bwptools.x'

# --------------------------------------------------------------------------------------------------


def network_options(lambda_required=True):

    def decorator(function):
        options = [
            click.option('--lambda', 'lam', type=float, required=lambda_required,
                         default=None if lambda_required else 1.0,
                         help='Intensity of the transmitter PPP'),
            click.option('--alpha', type=float, required=True, help='Path loss exponent (> 2)'),
            click.option('--rate', type=float, required=True, help='Transmission rate R'),
            click.option('--bandwidth', type=float, default=1.0, show_default=True,
                         help='Total bandwidth W'),
        ]
        for option in reversed(options):
            function = option(function)
        return function

    return decorator


def mode_option(function):

    return click.option('--mode', type=click.Choice([mode.value for mode in Mode]),
                        required=True, help='Bandwidth partitioning approach')(function)


def n_option(function):

    return click.option('--n', 'n', type=int, default=1, show_default=True,
                        help='Number of sub-bands')(function)


def output_options(function):

    function = click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv',
                            show_default=True, help='Output format')(function)
    function = click.option('--output', default='-', show_default=True,
                            help='Output file, - for standard output')(function)
    return function

# --------------------------------------------------------------------------------------------------


def _flag_names(command):

    # Long flag name without the dashes -> click parameter name
    names = {}
    for param in command.params:
        for opt in getattr(param, 'opts', []):
            if opt.startswith('--'):
                names[opt[2:]] = param.name
    return names


def _default_map(group, conf):

    known = set(_flag_names(group))

    def build(command):
        if isinstance(command, click.Group):
            return {name: build(sub) for name, sub in command.commands.items()}
        names = _flag_names(command)
        known.update(names)
        return {names[key]: value for key, value in conf.items() if key in names}

    default_map = build(group)

    unknown = sorted(key for key in conf if key not in known or key == 'config')
    if unknown:
        raise click.UsageError('Unknown configuration key(s): '+', '.join(map(str, unknown)))

    return default_map


def _emit(records, output, fmt, meta=None):

    ctx = click.get_current_context()
    document_meta = {'tool': 'bwptools', 'version': utils.tool_version,
                     'command': ctx.command_path}
    document_meta.update(meta or {})

    if output != '-':
        utils.createPath(os.path.dirname(output))
    with click.open_file(output, 'w') as stream:
        utils_output.write_records(records, stream, fmt, document_meta)

    utils.message(ctx.command_path+': wrote '+str(len(records))+' rows to '
                  + ('standard output' if output == '-' else output))

# --------------------------------------------------------------------------------------------------


@click.group()
@click.option('--config', type=click.Path(exists=True, dir_okay=False),
              help='Configuration yaml, keys are long flag names')
@click.option('--quiet', is_flag=True, help='Only warnings and errors on standard error')
@click.pass_context
def cli(ctx, config, quiet):

    conf = utils.readConfig(config) if config else {}
    if conf:
        ctx.default_map = _default_map(ctx.command, conf)
    utils.setQuiet(quiet or bool(utils.configGet(conf, 'quiet', False)))

# --------------------------------------------------------------------------------------------------


@cli.command('moment')
@network_options()
@mode_option
@n_option
@click.option('--b', type=float, required=True, help='Moment order')
@output_options
def moment_command(lam, alpha, rate, bandwidth, mode, n, b, output, fmt):

    """b-th moment M_b of the conditional success probability."""

    p = NetworkParams(lam, alpha, rate, bandwidth)
    s = PartitionScheme(mode, n)
    value = model.moment(p, s, b)
    _emit([makeRecord(p, mode, n, None, 'moment', value, 'exact', b=b)], output, fmt)


@cli.command('meta')
@network_options()
@mode_option
@n_option
@click.option('--epsilon', type=float, required=True, help='Target outage, x = 1 - epsilon')
@click.option('--method', type=click.Choice([m.value for m in model.MdMethod]), default='exact',
              show_default=True)
@output_options
def meta_command(lam, alpha, rate, bandwidth, mode, n, epsilon, method, output, fmt):

    """Meta distribution: fraction of links with success probability above 1 - epsilon."""

    p = NetworkParams(lam, alpha, rate, bandwidth)
    s = PartitionScheme(mode, n)
    value = model.meta_distribution(p, s, epsilon, method)
    _emit([makeRecord(p, mode, n, epsilon, 'meta_distribution', value, method)], output, fmt)


@cli.command('density')
@network_options()
@mode_option
@n_option
@click.option('--epsilon', type=float, required=True, help='Target outage')
@click.option('--method', type=click.Choice([m.value for m in model.MdMethod]), default='exact',
              show_default=True)
@output_options
def density_command(lam, alpha, rate, bandwidth, mode, n, epsilon, method, output, fmt):

    """Density of reliable transmissions lambda times the meta distribution."""

    p = NetworkParams(lam, alpha, rate, bandwidth)
    s = PartitionScheme(mode, n)
    value = model.density_reliable(p, s, epsilon, method)
    _emit([makeRecord(p, mode, n, epsilon, 'density_reliable', value, method)], output, fmt)


@cli.command('delay')
@network_options()
@mode_option
@n_option
@output_options
def delay_command(lam, alpha, rate, bandwidth, mode, n, output, fmt):

    """Local delay and local delay per bit of spectral efficiency."""

    p = NetworkParams(lam, alpha, rate, bandwidth)
    s = PartitionScheme(mode, n)
    records = [makeRecord(p, mode, n, None, 'local_delay', model.local_delay(p, s), 'exact'),
               makeRecord(p, mode, n, None, 'normalized_local_delay',
                          model.normalized_local_delay(p, s), 'exact')]
    _emit(records, output, fmt)

# --------------------------------------------------------------------------------------------------


@cli.command('optimize-density')
@network_options(lambda_required=False)
@mode_option
@click.option('--epsilon', type=float, required=True, help='Target outage')
@click.option('--method', type=click.Choice([m.value for m in optimize.OptimumMethod]),
              default='exact', show_default=True)
@click.option('--n-max', type=int, default=16, show_default=True,
              help='Largest N of the exact grid search')
@output_options
def optimize_density_command(lam, alpha, rate, bandwidth, mode, epsilon, method, n_max, output,
                             fmt):

    """Maximum density of reliable transmissions over lambda and N."""

    p = NetworkParams(lam, alpha, rate, bandwidth)
    if optimize.OptimumMethod(method) is optimize.OptimumMethod.ASYMPTOTIC:
        optimum = optimize.max_density_asymptotic(p, epsilon, mode)
    else:
        utils.message('optimize-density: exact grid search over N = 1..'+str(n_max))
        optimum = optimize.max_density_exact(p, epsilon, mode, n_max=n_max)

    if optimum.diverges:
        utils.message('optimize-density: supremum approached as N and lambda grow without bound')
    _emit(utils_output.optimumRecords(p, mode, epsilon, optimum), output, fmt)


@cli.command('optimize-delay')
@network_options(lambda_required=False)
@mode_option
@output_options
def optimize_delay_command(lam, alpha, rate, bandwidth, mode, output, fmt):

    """Number of sub-bands minimizing the local delay."""

    p = NetworkParams(lam, alpha, rate, bandwidth)
    optimum = optimize.optimal_n_delay(p, mode)

    detail = ''
    if optimum.bracket is not None:
        detail = 'bracket='+str(optimum.bracket[0])+'-'+str(optimum.bracket[1])
    n = optimum.n_star
    records = [makeRecord(p, mode, n, None, 'n_star', n, 'exact', detail=detail),
               makeRecord(p, mode, n, None, 'n_zero', optimum.n_zero, 'exact'),
               makeRecord(p, mode, n, None, 'local_delay', optimum.d_min, 'exact')]
    _emit(records, output, fmt)


@cli.command('tradeoff')
@network_options(lambda_required=False)
@mode_option
@click.option('--epsilon', type=float, required=True, help='Target outage')
@click.option('--d-max', type=float, required=True, help='Local delay cap, inf for none')
@click.option('--n-max', type=int, default=16, show_default=True)
@output_options
def tradeoff_command(lam, alpha, rate, bandwidth, mode, epsilon, d_max, n_max, output, fmt):

    """Exact density of reliable transmissions maximized subject to local delay <= d-max."""

    p = NetworkParams(lam, alpha, rate, bandwidth)
    utils.message('tradeoff: d_max = '+str(d_max)+', N = 1..'+str(n_max))
    optimum = optimize.delay_constrained_max_density(p, epsilon, d_max, mode, n_max=n_max)
    records = [dataclasses.replace(record, detail='d_max='+utils_output.formatNumber(d_max))
               if record.metric == 'local_delay' else record
               for record in utils_output.optimumRecords(p, mode, epsilon, optimum)]
    _emit(records, output, fmt)

# --------------------------------------------------------------------------------------------------


@cli.command('simulate')
@network_options()
@mode_option
@n_option
@click.option('--b', type=float, default=None, help='Also estimate the b-th moment')
@click.option('--epsilon', type=float, default=None, help='Also estimate the meta distribution')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--stream-id', type=int, default=0, show_default=True)
@click.option('--realizations', type=int, default=10000, show_default=True)
@click.option('--window-radius', type=float, default=None,
              help='Simulation disk radius, default from the bias rule')
@click.option('--max-slots', type=int, default=10000, show_default=True)
@click.option('--delay-method', type=click.Choice([m.value for m in mcsim.DelayMethod]),
              default='conditional-mean', show_default=True)
@click.option('--tail-correction/--no-tail-correction', default=True, show_default=True)
@output_options
def simulate_command(lam, alpha, rate, bandwidth, mode, n, b, epsilon, seed, stream_id,
                     realizations, window_radius, max_slots, delay_method, tail_correction,
                     output, fmt):

    """Monte Carlo estimates over independent PPP realizations."""

    p = NetworkParams(lam, alpha, rate, bandwidth)
    s = PartitionScheme(mode, n)
    cfg = mcsim.SimConfig(window_radius=window_radius, realizations=realizations,
                          max_slots=max_slots, seed=seed, stream_id=stream_id,
                          tail_correction=tail_correction)

    meta = mcsim.simulation_metadata(p, s, cfg)
    radius = meta['window_radius']
    utils.message('simulate: '+str(realizations)+' realizations, window radius '
                  + format(radius, '.6g')+', mean interferers '
                  + format(meta['mean_interferers'], '.6g'))

    samples = mcsim.success_samples(p, s, cfg)

    def record(metric, estimate, eps=None, **extra):
        return makeRecord(p, mode, n, eps, metric, estimate.value, 'monte-carlo',
                          stderr=estimate.stderr, seed=seed, window_radius=radius, **extra)

    records = []
    if b is not None:
        records.append(record('moment', mcsim.estimate_moment(p, s, b, cfg, samples=samples),
                              b=b))
    if epsilon is not None:
        records.append(record('meta_distribution',
                              mcsim.estimate_meta(p, s, epsilon, cfg, samples=samples),
                              eps=epsilon))

    delay = mcsim.estimate_local_delay(p, s, cfg, delay_method, samples=samples)
    for flag in delay.flags:
        if flag == mcsim.CENSORED:
            utils.warning('simulate: '+format(100.0*delay.censored_fraction, '.3g')
                          + '% of slot counts censored at max-slots = '+str(max_slots))
        elif flag == mcsim.DIVERGENT_MODEL:
            utils.warning('simulate: local delay diverges for N = 1, the estimate is not '
                          'meaningful')
    records.append(record('local_delay', delay, detail=';'.join((delay_method,) + delay.flags)))

    _emit(records, output, fmt, meta)

# --------------------------------------------------------------------------------------------------


@cli.group('reproduce')
def reproduce_group():

    """Data behind the reference figures and table."""


@reproduce_group.command('fig1')
@click.option('--n-max', type=int, default=16, show_default=True)
@click.option('--points', type=int, default=64, show_default=True,
              help='Points of the shared lambda axis')
@output_options
def fig1_command(n_max, points, output, fmt):

    """Density of reliable transmissions over (lambda, N), exact and asymptotic."""

    _emit(reproduce.fig1(n_max, points), output, fmt)


@reproduce_group.command('fig2')
@click.option('--n-max', type=int, default=30, show_default=True)
@output_options
def fig2_command(n_max, output, fmt):

    """Normalized local delay against N for both partitioning approaches."""

    _emit(reproduce.fig2(n_max), output, fmt)


@reproduce_group.command('table1')
@output_options
def table1_command(output, fmt):

    """Optimal number of sub-bands for both objectives and both approaches."""

    _emit(reproduce.table1(), output, fmt)

# --------------------------------------------------------------------------------------------------


def run(argv=None):

    """Execute the driver on argv and return the exit code."""

    argv = sys.argv[1:] if argv is None else list(argv)

    try:
        try:
            status = cli.main(args=argv, prog_name=prog_name, standalone_mode=False)
        except click.exceptions.Abort:
            utils.abort('Interrupted', 1)
        except click.ClickException as e:
            utils.abort(e.format_message(), 2)
        except DomainError as e:
            utils.abort(str(e), 2)
        except InfeasibleConstraintError as e:
            utils.abort(str(e), 4)
        except (ConvergenceError, OverflowError, FloatingPointError) as e:
            utils.abort(str(e), 3)
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else 1

    return status if isinstance(status, int) else 0

# --------------------------------------------------------------------------------------------------


def main():

    sys.exit(run(sys.argv[1:]))

# --------------------------------------------------------------------------------------------------

if __name__ == '__main__':
    main()

# --------------------------------------------------------------------------------------------------

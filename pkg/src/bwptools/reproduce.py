# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import math

import numpy as np

from bwptools import model, optimize, utils
from bwptools.model import Mode, NetworkParams, PartitionScheme
from bwptools.optimize import OptimumMethod
from bwptools.utils_output import makeRecord as _record, optimumRecords

__all__ = ['fig1_params', 'fig1_eps', 'fig2_params', 'caption_optimum', 'fig1_lambda_grid',
           'caption_comparison', 'fig1', 'fig2', 'table1']

# --------------------------------------------------------------------------------------------------
## @package reproduce
#
#  Data behind the reference figures and table.
#
#  Targets:
#  --------
#  fig1   | density of reliable transmissions over (lambda, N), adaptive SIR, R=0.1, W=1,
#         | alpha=4, eps=0.01, exact and asymptotic, with both optima and the caption comparison
#  fig2   | normalized local delay for N = 1..30, both modes, R=0.25, W=1, alpha=3, lambda=1
#  table1 | optimal number of sub-bands: density and delay objectives, both modes
#
# --------------------------------------------------------------------------------------------------

fig1_params = NetworkParams(lam=0.0584, alpha=4.0, rate=0.1, bandwidth=1.0)
fig1_eps = 0.01
fig2_params = NetworkParams(lam=1.0, alpha=3.0, rate=0.25, bandwidth=1.0)

# Optimum quoted with the density surface: (lambda*, S)
caption_optimum = (0.0584, 0.0354)

# --------------------------------------------------------------------------------------------------


def fig1_lambda_grid(n_max=16, points=64):

    # One lambda axis shared by every N, spanning all the per-N default ranges
    lo = optimize.optimal_lambda_given_n(fig1_params, PartitionScheme(Mode.ADAPTIVE_SIR, n_max),
                                         fig1_eps)
    hi = optimize.optimal_lambda_given_n(fig1_params, PartitionScheme(Mode.ADAPTIVE_SIR, 1),
                                         fig1_eps)
    lo, hi = min(lo, hi), max(lo, hi)
    return np.logspace(math.log10(lo/10.0), math.log10(10.0*hi), points)


def caption_comparison(exact, asymptotic):

    """Relative gaps of both optima to the caption, and the rate that reproduces it."""

    lam_ref, s_ref = caption_optimum
    result = {}
    for name, optimum in (('exact', exact), ('asymptotic', asymptotic)):
        result[name] = ((optimum.lambda_star - lam_ref)/lam_ref, (optimum.s_max - s_ref)/s_ref)
    result['exact_vs_asymptotic'] = ((exact.lambda_star - asymptotic.lambda_star)
                                     / asymptotic.lambda_star,
                                     (exact.s_max - asymptotic.s_max)/asymptotic.s_max)

    # The caption numbers match the closed form evaluated with R = 0.25
    alternative = NetworkParams(fig1_params.lam, fig1_params.alpha, 0.25, fig1_params.bandwidth)
    result['asymptotic_rate_0.25'] = optimize.max_density_asymptotic(alternative, fig1_eps,
                                                                     Mode.ADAPTIVE_SIR)
    return result


def fig1(n_max=16, points=64, control=None, workers=None):

    p = fig1_params
    eps = fig1_eps
    mode = Mode.ADAPTIVE_SIR

    utils.message('reproduce fig1: '+str(n_max)+' x '+str(points)+' grid')
    grid = optimize.exact_density_grid(p, eps, mode, fig1_lambda_grid(n_max, points), n_max,
                                       control, workers)

    records = []
    for i, n in enumerate(grid.n_values):
        for j, lam in enumerate(grid.lambdas[i]):
            pl = p.with_lambda(float(lam))
            records.append(_record(pl, mode, int(n), eps, 'density_reliable',
                                   float(grid.exact[i, j]), model.MdMethod.EXACT.value))
            records.append(_record(pl, mode, int(n), eps, 'density_reliable',
                                   float(grid.asymptotic[i, j]),
                                   model.MdMethod.ASYMPTOTIC.value))

    exact = optimize.max_density_exact(p, eps, mode, control=control, grid=grid)
    asymptotic = optimize.max_density_asymptotic(p, eps, mode)
    records += optimumRecords(p, mode, eps, exact)
    records += optimumRecords(p, mode, eps, asymptotic)

    comparison = caption_comparison(exact, asymptotic)
    lam_ref, s_ref = caption_optimum
    for name in ('exact', 'asymptotic'):
        tag = OptimumMethod(name).value
        records.append(_record(p, mode, 1, eps, 'caption_rel_error_lambda', comparison[name][0],
                               tag, detail='caption='+str(lam_ref)))
        records.append(_record(p, mode, 1, eps, 'caption_rel_error_s_max', comparison[name][1],
                               tag, detail='caption='+str(s_ref)))
    gap_lambda, gap_s = comparison['exact_vs_asymptotic']
    records.append(_record(p, mode, 1, eps, 'rel_gap_lambda', gap_lambda, 'exact-vs-asymptotic'))
    records.append(_record(p, mode, 1, eps, 'rel_gap_s_max', gap_s, 'exact-vs-asymptotic'))

    alternative = comparison['asymptotic_rate_0.25']
    palt = NetworkParams(alternative.lambda_star, p.alpha, 0.25, p.bandwidth)
    records.append(_record(palt, mode, 1, eps, 'lambda_star', alternative.lambda_star,
                           'asymptotic', detail='caption check'))
    records.append(_record(palt, mode, 1, eps, 's_max', alternative.s_max, 'asymptotic',
                           detail='caption check'))

    if abs(comparison['exact'][1]) > 0.1:
        utils.warning('exact optimum S = '+format(exact.s_max, '.4g')+' is more than 10% from '
                      'the caption value '+str(s_ref))

    return records

# --------------------------------------------------------------------------------------------------


def fig2(n_max=30):

    p = fig2_params
    records = []
    curves = {}
    for mode in Mode:
        curve = []
        for n in range(1, n_max + 1):
            value = model.normalized_local_delay(p, PartitionScheme(mode, n))
            curve.append(value)
            records.append(_record(p, mode, n, None, 'normalized_local_delay', value, 'exact'))
        curves[mode] = np.array(curve)

    for mode in Mode:
        n_best = int(np.argmin(curves[mode])) + 1
        records.append(_record(p, mode, n_best, None, 'argmin_n', n_best, 'exact'))

    # First N from which adaptive time is strictly below adaptive SIR
    below = np.nonzero(curves[Mode.ADAPTIVE_TIME][1:] < curves[Mode.ADAPTIVE_SIR][1:])[0]
    if below.size:
        crossing = int(below[0]) + 2
        records.append(_record(p, Mode.ADAPTIVE_TIME, crossing, None, 'crossing_n', crossing,
                               'exact'))

    return records

# --------------------------------------------------------------------------------------------------


def table1():

    records = []

    # Density of reliable transmissions
    for mode in Mode:
        optimum = optimize.max_density_asymptotic(fig1_params, fig1_eps, mode)
        n = int(optimum.n_star) if math.isfinite(optimum.n_star) else math.inf
        detail = 'diverges' if optimum.diverges else 'lambda_star='+format(optimum.lambda_star,
                                                                          '.17g')
        records.append(_record(fig1_params, mode, n, fig1_eps, 'n_star_density', n,
                               optimum.method.value, detail=detail))

    # Local delay
    for mode in Mode:
        optimum = optimize.optimal_n_delay(fig2_params, mode)
        detail = 'n_zero='+format(optimum.n_zero, '.17g')
        if optimum.bracket is not None:
            detail += ';bracket='+str(optimum.bracket[0])+'-'+str(optimum.bracket[1])
        records.append(_record(fig2_params, mode, optimum.n_star, None, 'n_star_delay',
                               optimum.n_star, 'exact', detail=detail))

    return records

# --------------------------------------------------------------------------------------------------

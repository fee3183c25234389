# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
import scipy.optimize

from bwptools import model, specfun, utils
from bwptools.model import Mode, PartitionScheme
from bwptools.utils import DomainError, InfeasibleConstraintError, RootNotBracketedError

__all__ = ['DIVERGES', 'OptimumMethod', 'DensityOptimum', 'DelayOptimum', 'DensityGrid',
           'optimal_lambda_given_n', 'max_density_asymptotic', 'default_lambda_grid',
           'exact_density_grid', 'max_density_exact', 'delay_g', 'delay_g_scaled', 'delay_slope',
           'adaptive_time_residual', 'round_n', 'optimal_n_delay', 'lambda_for_delay',
           'delay_constrained_max_density']

# --------------------------------------------------------------------------------------------------
## @package optimize
#
#  Optimizers over the intensity lambda and the number of sub-bands N.
#
#  Operations:
#  -----------
#  optimal_lambda_given_n        | interior maximizer lambda_0(N) of the asymptotic density
#  max_density_asymptotic        | closed-form supremum of the density of reliable transmissions
#  max_density_exact             | grid argmax of the exact density, golden-section refined in lambda
#  optimal_n_delay               | N minimizing the local delay (both modes)
#  delay_constrained_max_density | exact density maximized under a local delay cap
#
#  Grid points are evaluated concurrently (BWP_THREADS caps the workers); the argmax scans the
#  grid in (N, lambda) order so ties resolve to the smallest N and then the smallest lambda.
#
# --------------------------------------------------------------------------------------------------

DIVERGES = math.inf


class OptimumMethod(enum.Enum):
    ASYMPTOTIC = 'asymptotic'
    EXACT_NUMERIC = 'exact'


@dataclass(frozen=True)
class DensityOptimum:
    n_star: float
    lambda_star: float
    s_max: float
    method: OptimumMethod
    delay: Optional[float] = None

    @property
    def diverges(self):
        return math.isinf(self.s_max)


@dataclass(frozen=True)
class DelayOptimum:
    n_star: int
    n_zero: float
    d_min: float
    bracket: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class DensityGrid:

    """Exact and asymptotic density of reliable transmissions on an (N, lambda) grid.

    Row i holds N = n_values[i]; lambdas, exact and asymptotic have shape (len(n_values), L).
    """

    n_values: np.ndarray
    lambdas: np.ndarray
    exact: np.ndarray
    asymptotic: np.ndarray

# --------------------------------------------------------------------------------------------------


def _check_eps(eps):

    if not 0.0 < eps < 1.0:
        raise DomainError('Target outage eps must lie in (0, 1), got '+str(eps))


def optimal_lambda_given_n(p, s, eps):

    _check_eps(eps)
    delta = p.delta
    big_b = specfun.constant_C_delta(delta)/eps**(delta/(1.0 - delta))
    theta = model.sir_threshold(p, s)
    return (theta/s.n_subbands)**(-delta)*((1.0 - delta)/big_b)**(1.0 - delta)


def max_density_asymptotic(p, eps, mode):

    _check_eps(eps)
    mode = Mode(mode)

    # Adaptive time: the supremum is approached as N and lambda grow without bound
    if mode is Mode.ADAPTIVE_TIME:
        return DensityOptimum(DIVERGES, DIVERGES, DIVERGES, OptimumMethod.ASYMPTOTIC)

    # theta(N)/N increases with N, so N = 1
    lam0 = optimal_lambda_given_n(p, PartitionScheme(mode, 1), eps)
    return DensityOptimum(1, lam0, lam0*math.exp(-(1.0 - p.delta)), OptimumMethod.ASYMPTOTIC)

# --------------------------------------------------------------------------------------------------


def default_lambda_grid(p, eps, mode, n, points=64):

    lam0 = optimal_lambda_given_n(p, PartitionScheme(mode, n), eps)
    return np.logspace(math.log10(lam0/10.0), math.log10(10.0*lam0), points)


def exact_density_grid(p, eps, mode, lambda_grid=None, n_max=16, control=None, workers=None):

    _check_eps(eps)
    mode = Mode(mode)
    if int(n_max) != n_max or n_max < 1:
        raise DomainError('n_max must be an integer >= 1, got '+str(n_max))

    n_values = np.arange(1, int(n_max) + 1)
    if lambda_grid is None:
        lambdas = np.array([default_lambda_grid(p, eps, mode, n) for n in n_values])
    else:
        common = np.asarray(lambda_grid, dtype=float).ravel()
        if common.size == 0 or np.any(~(common > 0.0)) or np.any(~np.isfinite(common)):
            raise DomainError('lambda grid must hold finite positive values')
        lambdas = np.tile(common, (n_values.size, 1))

    items = [(int(n), float(lam)) for n, row in zip(n_values, lambdas) for lam in row]

    def evaluate(item):
        n, lam = item
        pn = p.with_lambda(lam)
        sn = PartitionScheme(mode, n)
        return (model.density_reliable(pn, sn, eps, model.MdMethod.EXACT, control),
                model.density_reliable(pn, sn, eps, model.MdMethod.ASYMPTOTIC))

    # Ordered map keeps the grid identical to a sequential sweep
    nworkers = workers or utils.worker_count()
    if nworkers > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as executor:
            values = list(executor.map(evaluate, items))
    else:
        values = [evaluate(item) for item in items]

    values = np.array(values).reshape(lambdas.shape + (2,))
    return DensityGrid(n_values, lambdas, values[..., 0], values[..., 1])

# --------------------------------------------------------------------------------------------------


def _refine_lambda(p, s, eps, lambdas, j, upper=math.inf, control=None):

    # Golden-section search of the quasiconcave lambda_s around grid point j
    def objective(lam):
        if lam <= 0.0 or lam > upper:
            return 0.0
        return -model.density_reliable(p.with_lambda(lam), s, eps, model.MdMethod.EXACT, control)

    lo = lambdas[max(j - 1, 0)]
    hi = min(lambdas[min(j + 1, lambdas.size - 1)], upper)
    mid = lambdas[j]
    if not lo < hi:
        return mid, -objective(mid)

    f_lo, f_mid, f_hi = objective(lo), objective(mid), objective(hi)
    if lo < mid < hi and f_mid < f_lo and f_mid < f_hi:
        result = scipy.optimize.minimize_scalar(objective, bracket=(lo, mid, hi),
                                                method='golden', options={'xtol': 1.0e-6})
    else:
        result = scipy.optimize.minimize_scalar(objective, bounds=(lo, hi), method='bounded',
                                                options={'xatol': 1.0e-6*mid})

    if -result.fun > -f_mid:
        return float(result.x), float(-result.fun)
    return mid, -f_mid


def _best_on_grid(values):

    # np.argmax returns the first maximum: smallest N, then smallest lambda
    flat = int(np.argmax(values))
    return np.unravel_index(flat, values.shape)


def max_density_exact(p, eps, mode, lambda_grid=None, n_max=16, control=None, workers=None,
                      grid=None):

    mode = Mode(mode)
    if grid is None:
        grid = exact_density_grid(p, eps, mode, lambda_grid, n_max, control, workers)

    i, j = _best_on_grid(grid.exact)
    n_star = int(grid.n_values[i])
    lam, s_max = _refine_lambda(p, PartitionScheme(mode, n_star), eps, grid.lambdas[i], j,
                                control=control)

    return DensityOptimum(n_star, lam, s_max, OptimumMethod.EXACT_NUMERIC)

# --------------------------------------------------------------------------------------------------


def delay_g(n, a, delta):

    """(a delta N (N-1) ln 2 - N + delta) 2^(aN) + N - delta, increasing in N."""

    return (a*delta*n*(n - 1.0)*math.log(2.0) - n + delta)*2.0**(a*n) + n - delta


def delay_g_scaled(n, a, delta):

    # delay_g / 2^(aN), same sign and free of overflow
    return (a*delta*n*(n - 1.0)*math.log(2.0) - n + delta) + (n - delta)*2.0**(-a*n)


def delay_slope(n, a, delta):

    """delay_g / (N (N-1) (2^(aN) - 1)), strictly increasing for N > 1."""

    if not n > 1.0:
        raise DomainError('delay_slope needs N > 1, got '+str(n))
    return delay_g_scaled(n, a, delta)/(n*(n - 1.0)*-math.expm1(-a*n*math.log(2.0)))


def adaptive_time_residual(n, coefficient, delta):

    """Stationarity residual of N exp(c N^-delta (N-1)^(delta-1)); zero at the continuous optimum."""

    return (coefficient/n)*(n/(n - 1.0))**(1.0 - delta)*(n - delta)/(n - 1.0) - 1.0


def round_n(x):

    # Round(x) = 2 for 1 < x <= 2, nearest integer otherwise
    if x <= 2.0:
        return 2
    return int(math.floor(x + 0.5))


def _expanding_bisection(function, lo, limit=1.0e6):

    # Double the upper end from 2 until the sign flips, then bisect
    sign_lo = np.sign(function(lo))
    hi = 2.0
    while np.sign(function(hi)) == sign_lo:
        lo = hi
        hi *= 2.0
        if hi > limit:
            raise RootNotBracketedError('No sign change of the delay stationarity condition '
                                        'below N = '+str(limit))
    return scipy.optimize.bisect(function, lo, hi, xtol=1.0e-12, maxiter=200)


def optimal_n_delay(p, mode):

    mode = Mode(mode)
    delta = p.delta

    if mode is Mode.ADAPTIVE_SIR:

        # lambda cancels from the stationarity condition
        n_zero = _expanding_bisection(lambda n: delay_g_scaled(n, p.a, delta), 1.0 + 1.0e-6)
        n_star = round_n(n_zero)
        d_min = model.local_delay(p, PartitionScheme(mode, n_star))
        return DelayOptimum(n_star, n_zero, d_min)

    coefficient = p.lam*specfun.constant_C(delta)*p.theta_one**delta
    n_zero = _expanding_bisection(lambda n: adaptive_time_residual(n, coefficient, delta),
                                  1.0 + 1.0e-9)

    candidates = sorted({max(int(math.floor(n_zero)), 2), max(int(math.ceil(n_zero)), 2)})
    delays = [model.local_delay(p, PartitionScheme(mode, n)) for n in candidates]
    best = int(np.argmin(delays))
    bracket = (max(int(math.floor(coefficient)), 2), int(math.ceil(coefficient)) + 2)

    return DelayOptimum(candidates[best], n_zero, delays[best], bracket)

# --------------------------------------------------------------------------------------------------


def lambda_for_delay(p, s, d_max):

    """Largest lambda with local delay <= d_max; 0 when no lambda qualifies."""

    n = s.n_subbands
    if n == 1 or math.isinf(model.sir_threshold(p, s)):
        return 0.0
    if math.isinf(d_max):
        return math.inf

    # ln D is linear in lambda
    delta = p.delta
    per_lambda = (specfun.constant_C(delta)*(model.sir_threshold(p, s)/n)**delta
                  * (n - 1.0)**(-(1.0 - delta)))
    budget = math.log(d_max/n) if s.mode is Mode.ADAPTIVE_TIME else math.log(d_max)
    return max(budget, 0.0)/per_lambda


def delay_constrained_max_density(p, eps, d_max, mode, lambda_grid=None, n_max=16, control=None,
                                  workers=None, grid=None):

    mode = Mode(mode)
    if not d_max > 1.0:
        raise DomainError('d_max must exceed 1, got '+str(d_max))

    if math.isinf(d_max):
        optimum = max_density_exact(p, eps, mode, lambda_grid, n_max, control, workers, grid)
        delay = model.local_delay(p.with_lambda(optimum.lambda_star),
                                  PartitionScheme(mode, int(optimum.n_star)))
        return replace(optimum, delay=delay)

    if grid is None:
        grid = exact_density_grid(p, eps, mode, lambda_grid, n_max, control, workers)

    delays = np.array([[model.local_delay(p.with_lambda(lam), PartitionScheme(mode, int(n)))
                        for lam in row] for n, row in zip(grid.n_values, grid.lambdas)])
    feasible = delays <= d_max
    if not np.any(feasible):
        raise InfeasibleConstraintError('Every grid point has local delay above d_max = '
                                        + str(d_max))

    i, j = _best_on_grid(np.where(feasible, grid.exact, -np.inf))
    n_star = int(grid.n_values[i])
    scheme = PartitionScheme(mode, n_star)
    upper = lambda_for_delay(p, scheme, d_max)
    lam, s_max = _refine_lambda(p, scheme, eps, grid.lambdas[i], j, upper, control)

    delay = model.local_delay(p.with_lambda(lam), scheme)
    return DensityOptimum(n_star, lam, s_max, OptimumMethod.EXACT_NUMERIC, delay)

# --------------------------------------------------------------------------------------------------

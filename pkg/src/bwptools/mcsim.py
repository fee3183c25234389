# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.integrate

from bwptools import model, utils
from bwptools.model import Mode
from bwptools.utils import DomainError

__all__ = ['DelayMethod', 'SimConfig', 'RealizationSnapshot', 'Estimate', 'CENSORED',
           'DIVERGENT_MODEL', 'realization_rng', 'default_window_radius', 'tail_log_factor',
           'truncation_bounds', 'simulation_metadata', 'sample_realization',
           'conditional_success_probability', 'success_samples', 'estimate_moment',
           'estimate_meta', 'estimate_local_delay']

# --------------------------------------------------------------------------------------------------
## @package mcsim
#
#  Monte Carlo oracle for the analytic model. Each realization places the interferers of a
#  Poisson bipolar network in a disk around the typical receiver (the desired transmitter at
#  distance 1 is not an interferer) and evaluates the conditional success probability with
#  fading and sub-band selection averaged in closed form.
#
#  Configuration (SimConfig):
#  --------------------------
#  window_radius        | disk radius, None selects the bias rule of default_window_radius
#  realizations         | number of independent realizations
#  max_slots            | censoring cap of the slot-count delay estimator
#  seed, stream_id      | random stream of realization i is SeedSequence(seed, (stream_id, i))
#  tail_correction      | multiply P_s by the mean log-factor of interferers beyond the window
#  max_mean_interferers | cap on lambda pi R^2 when the bias rule asks for a larger window
#
#  Estimates do not depend on the number of worker threads: realizations are placed by index
#  and reduced with math.fsum.
#
# --------------------------------------------------------------------------------------------------

CENSORED = 'CENSORED'
DIVERGENT_MODEL = 'DIVERGENT_MODEL'

# Relative bias the default window allows on P_s before the tail correction
_window_bias = 1.0e-3

_chunk = 256


class DelayMethod(enum.Enum):
    CONDITIONAL_MEAN = 'conditional-mean'
    SLOT_COUNT = 'slot-count'


@dataclass(frozen=True)
class SimConfig:

    window_radius: Optional[float] = None
    realizations: int = 10000
    max_slots: int = 10000
    seed: int = 0
    stream_id: int = 0
    tail_correction: bool = True
    max_mean_interferers: float = 2.0e4

    def __post_init__(self):
        if self.window_radius is not None and not self.window_radius >= 10.0:
            raise DomainError('window_radius must be at least 10, got '+str(self.window_radius))
        if self.realizations < 100:
            raise DomainError('realizations must be at least 100, got '+str(self.realizations))
        if self.max_slots < 1:
            raise DomainError('max_slots must be at least 1, got '+str(self.max_slots))
        if not 0 <= self.seed < 2**64:
            raise DomainError('seed must be a 64-bit unsigned integer, got '+str(self.seed))
        if self.stream_id < 0:
            raise DomainError('stream_id must be non-negative, got '+str(self.stream_id))
        if not self.max_mean_interferers >= 100.0:
            raise DomainError('max_mean_interferers must be at least 100')


@dataclass(frozen=True)
class RealizationSnapshot:
    interferer_distances: np.ndarray
    p_s: float


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    count: int
    censored_fraction: float = 0.0
    flags: Tuple[str, ...] = ()

# --------------------------------------------------------------------------------------------------


def realization_rng(cfg, index, purpose=0):

    # Counter-based substream: independent of evaluation order
    sequence = np.random.SeedSequence(cfg.seed, spawn_key=(cfg.stream_id, index, purpose))
    return np.random.default_rng(sequence)

# --------------------------------------------------------------------------------------------------


def _log_factor(r, theta, n, alpha):

    # ln(1 - theta/(N (r^alpha + theta))), one interferer at distance r
    return np.log1p(-theta/(n*(r**alpha + theta)))


def default_window_radius(p, s, cfg=None):

    """Radius where the first-order upward bias of P_s falls below 1e-3.

    The bias exponent is 2 pi lambda theta R^(2-alpha) / (N (alpha-2)); the radius is kept at
    least 10 and capped so that lambda pi R^2 stays below max_mean_interferers.
    """

    cfg = cfg or SimConfig()
    theta = model.sir_threshold(p, s)
    rule = (2.0*math.pi*p.lam*theta/(s.n_subbands*(p.alpha - 2.0)*_window_bias))**(
        1.0/(p.alpha - 2.0))
    cap = math.sqrt(cfg.max_mean_interferers/(math.pi*p.lam))
    return max(10.0, min(rule, cap))


def _window(p, s, cfg):

    return cfg.window_radius if cfg.window_radius is not None else default_window_radius(p, s, cfg)


def tail_log_factor(p, s, radius):

    """2 pi lambda int_R^inf ln f(r) r dr, the mean log-factor of interferers beyond R."""

    theta = model.sir_threshold(p, s)
    value, _ = scipy.integrate.quad(
        lambda r: _log_factor(r, theta, s.n_subbands, p.alpha)*r, radius, np.inf,
        epsabs=1.0e-14, epsrel=1.0e-10, limit=200)
    return 2.0*math.pi*p.lam*value


def truncation_bounds(p, s, radius):

    """(upward bias of the uncorrected P_s, second-order residual after the tail correction)."""

    theta = model.sir_threshold(p, s)
    square, _ = scipy.integrate.quad(
        lambda r: _log_factor(r, theta, s.n_subbands, p.alpha)**2*r, radius, np.inf,
        epsabs=1.0e-16, epsrel=1.0e-8, limit=200)
    return -math.expm1(tail_log_factor(p, s, radius)), math.pi*p.lam*square


def simulation_metadata(p, s, cfg):

    radius = _window(p, s, cfg)
    bias, residual = truncation_bounds(p, s, radius)
    return {'window_radius': radius, 'mean_interferers': p.lam*math.pi*radius**2,
            'truncation_bound': bias, 'residual_bound': residual,
            'tail_correction': cfg.tail_correction, 'seed': cfg.seed,
            'stream_id': cfg.stream_id, 'realizations': cfg.realizations}

# --------------------------------------------------------------------------------------------------


def _interferer_distances(p, rng, radius):

    # Radial arrivals of a PPP: pi lambda r_k^2 are unit-rate Poisson arrival times, so the
    # points inside radius R are a prefix shared by every larger window
    horizon = p.lam*math.pi*radius**2
    blocks = []
    arrival = 0.0
    while arrival <= horizon:
        block = arrival + np.cumsum(rng.standard_exponential(1024))
        blocks.append(block)
        arrival = block[-1]
    arrivals = np.concatenate(blocks)
    arrivals = arrivals[arrivals <= horizon]
    return np.sqrt(arrivals/(p.lam*math.pi))


def conditional_success_probability(distances, theta, n, alpha):

    distances = np.asarray(distances, dtype=float)
    if distances.size == 0:
        return 1.0
    return float(np.exp(np.sum(_log_factor(distances, theta, n, alpha))))


def sample_realization(p, s, cfg, index):

    radius = _window(p, s, cfg)
    distances = _interferer_distances(p, realization_rng(cfg, index), radius)
    theta = model.sir_threshold(p, s)
    return RealizationSnapshot(distances,
                               conditional_success_probability(distances, theta,
                                                               s.n_subbands, p.alpha))

# --------------------------------------------------------------------------------------------------


def _run_chunks(function, count, workers):

    # Results are placed by realization index whatever the thread count
    starts = list(range(0, count, _chunk))
    nworkers = workers or utils.worker_count()
    if nworkers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as executor:
            parts = list(executor.map(function, starts))
    else:
        parts = [function(start) for start in starts]
    return np.concatenate(parts)


def success_samples(p, s, cfg, workers=None):

    """Per-realization success probabilities, tail corrected when cfg.tail_correction."""

    radius = _window(p, s, cfg)
    theta = model.sir_threshold(p, s)
    nsub = s.n_subbands
    shift = tail_log_factor(p, s, radius) if cfg.tail_correction else 0.0

    def chunk(start):
        stop = min(start + _chunk, cfg.realizations)
        logp = np.empty(stop - start)
        for index in range(start, stop):
            distances = _interferer_distances(p, realization_rng(cfg, index), radius)
            logp[index - start] = np.sum(_log_factor(distances, theta, nsub, p.alpha))
        return np.exp(logp + shift)

    return _run_chunks(chunk, cfg.realizations, workers)


def _mean_and_stderr(values):

    count = values.size
    mean = math.fsum(values)/count
    variance = math.fsum((values - mean)**2)/(count - 1)
    return mean, math.sqrt(variance/count)

# --------------------------------------------------------------------------------------------------


def estimate_moment(p, s, b, cfg, workers=None, samples=None):

    if b == 0:
        return Estimate(1.0, 0.0, cfg.realizations)
    if samples is None:
        samples = success_samples(p, s, cfg, workers)
    mean, stderr = _mean_and_stderr(samples**b)
    return Estimate(mean, stderr, samples.size)


def estimate_meta(p, s, eps, cfg, workers=None, samples=None):

    if not 0.0 < eps < 1.0:
        raise DomainError('Target outage eps must lie in (0, 1), got '+str(eps))

    if samples is None:
        samples = success_samples(p, s, cfg, workers)
    hits = int(np.count_nonzero(samples > 1.0 - eps))
    value = hits/samples.size
    return Estimate(value, math.sqrt(value*(1.0 - value)/samples.size), samples.size)


def estimate_local_delay(p, s, cfg, method=DelayMethod.CONDITIONAL_MEAN, workers=None,
                         samples=None):

    method = DelayMethod(method)
    nsub = s.n_subbands
    slots_per_attempt = nsub if s.mode is Mode.ADAPTIVE_TIME else 1
    if samples is None:
        samples = success_samples(p, s, cfg, workers)

    flags = []
    censored_fraction = 0.0

    if method is DelayMethod.CONDITIONAL_MEAN:
        with np.errstate(divide='ignore'):
            values = slots_per_attempt/samples
    else:

        # One Bernoulli(P_s) draw per attempt, geometric number of attempts
        def chunk(start):
            stop = min(start + _chunk, cfg.realizations)
            attempts = np.empty(stop - start)
            for index in range(start, stop):
                ps = samples[index]
                if ps > 0.0:
                    attempts[index - start] = realization_rng(cfg, index, 1).geometric(ps)
                else:
                    attempts[index - start] = math.inf
            return attempts

        attempts = _run_chunks(chunk, cfg.realizations, workers)
        censored = attempts > cfg.max_slots
        censored_fraction = float(np.count_nonzero(censored))/attempts.size
        values = slots_per_attempt*np.minimum(attempts, cfg.max_slots)
        if censored_fraction > 0.01:
            flags.append(CENSORED)

    if nsub == 1:
        flags.append(DIVERGENT_MODEL)

    if not np.all(np.isfinite(values)):
        return Estimate(math.inf, math.inf, values.size, censored_fraction, tuple(flags))
    mean, stderr = _mean_and_stderr(values)
    return Estimate(mean, stderr, values.size, censored_fraction, tuple(flags))

# --------------------------------------------------------------------------------------------------

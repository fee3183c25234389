# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np

from bwptools import specfun
from bwptools.utils import DomainError, QuadratureError

__all__ = ['Mode', 'MdMethod', 'NetworkParams', 'PartitionScheme', 'sir_threshold', 'log_moment',
           'moment', 'success_probability', 'mean_log_inverse_success', 'meta_distribution_exact',
           'meta_distribution_asymptotic', 'meta_distribution', 'density_reliable',
           'local_delay', 'normalized_local_delay', 'moment_large_t_asymptote']

# --------------------------------------------------------------------------------------------------
## @package model
#
#  Analytic model of a Poisson bipolar network with bandwidth partitioning. Transmitters form a
#  PPP of intensity lambda, each receiver sits at distance 1 from its transmitter, fading is
#  Rayleigh and every transmitter picks one of N sub-bands uniformly at random.
#
#  Partitioning modes:
#  -------------------
#  adaptive-sir  | rate kept, threshold theta(N) = 2^(N R/W) - 1, one slot per packet
#  adaptive-time | threshold theta = 2^(R/W) - 1, a packet occupies N slots
#
#  Local delay and the density supremum may diverge; divergence is returned as math.inf.
#
# --------------------------------------------------------------------------------------------------


class Mode(enum.Enum):
    ADAPTIVE_SIR = 'adaptive-sir'
    ADAPTIVE_TIME = 'adaptive-time'


class MdMethod(enum.Enum):
    EXACT = 'exact'
    ASYMPTOTIC = 'asymptotic'

# --------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkParams:

    """Network parameters. Link distance and transmit power are both 1."""

    lam: float
    alpha: float
    rate: float
    bandwidth: float

    def __post_init__(self):
        for name in ('lam', 'alpha', 'rate', 'bandwidth'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(name+' must be a finite number, got '+repr(value))
            object.__setattr__(self, name, float(value))
        if self.lam <= 0.0:
            raise DomainError('lambda must be positive, got '+str(self.lam))
        if self.alpha <= 2.0:
            raise DomainError('alpha must exceed 2, got '+str(self.alpha))
        if self.rate <= 0.0:
            raise DomainError('rate must be positive, got '+str(self.rate))
        if self.bandwidth <= 0.0:
            raise DomainError('bandwidth must be positive, got '+str(self.bandwidth))

    @property
    def delta(self):
        return 2.0/self.alpha

    @property
    def a(self):
        return self.rate/self.bandwidth

    @property
    def theta_one(self):
        return math.expm1(self.a*math.log(2.0))

    def with_lambda(self, lam):
        return dataclasses.replace(self, lam=lam)


@dataclass(frozen=True)
class PartitionScheme:

    mode: Mode
    n_subbands: int = 1

    def __post_init__(self):
        if not isinstance(self.mode, Mode):
            try:
                object.__setattr__(self, 'mode', Mode(self.mode))
            except ValueError:
                raise DomainError('Unknown partitioning mode \''+str(self.mode)+'\'')
        n = self.n_subbands
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise DomainError('n_subbands must be an integer >= 1, got '+repr(n))
        object.__setattr__(self, 'n_subbands', int(n))

# --------------------------------------------------------------------------------------------------


def sir_threshold(p, s):

    if s.mode is Mode.ADAPTIVE_SIR:
        exponent = s.n_subbands*p.a*math.log(2.0)
    else:
        exponent = p.a*math.log(2.0)

    try:
        return math.expm1(exponent)
    except OverflowError:
        return math.inf

# --------------------------------------------------------------------------------------------------


def _exponent_scale(p, s):

    # K = lambda C theta^delta / N
    theta = sir_threshold(p, s)
    return p.lam*specfun.constant_C(p.delta)*theta**p.delta/s.n_subbands


def log_moment(p, s, b, control=None):

    """ln M_b = -b K 2F1(1-b, 1-delta; 2; 1/N), vectorised over b."""

    bv = np.asarray(b, dtype=complex)
    z = 1.0/s.n_subbands
    if s.n_subbands == 1 and np.any(~(bv.real + p.delta > 0.0)):
        raise DomainError('Moment of order '+str(b)+' diverges for N = 1 (needs Re b > -delta)')

    scale = _exponent_scale(p, s)
    if math.isinf(scale):
        raise DomainError('Moment undefined: SIR threshold overflows for N = '+str(s.n_subbands))

    hyp = specfun.hyp2f1(1.0 - bv, 1.0 - p.delta, 2.0, z, control)
    value = -bv*scale*hyp

    if np.ndim(value) == 0:
        value = complex(value)
    return value


def moment(p, s, b, control=None):

    logm = log_moment(p, s, b, control)
    with np.errstate(over='ignore'):
        value = np.exp(logm)

    if np.isrealobj(b):
        value = value.real
        return float(value) if np.ndim(value) == 0 else value
    return complex(value) if np.ndim(value) == 0 else value

# --------------------------------------------------------------------------------------------------


def success_probability(p, s):

    return math.exp(-_exponent_scale(p, s))


def mean_log_inverse_success(p, s, control=None):

    # E[-ln P_s], the slope of -ln M_b at b = 0
    scale = _exponent_scale(p, s)
    hyp = specfun.hyp2f1(1.0, 1.0 - p.delta, 2.0, 1.0/s.n_subbands, control)
    return scale*hyp.real

# --------------------------------------------------------------------------------------------------


def meta_distribution_exact(p, s, x, control=None):

    """Fraction of links whose success probability exceeds x, by Gil-Pelaez inversion."""

    if not 0.0 < x < 1.0:
        raise DomainError('Reliability threshold x must lie in (0, 1), got '+str(x))

    control = control or specfun.default_control
    delta = p.delta
    nsub = s.n_subbands
    y = -math.log(x)
    scale = _exponent_scale(p, s)
    if math.isinf(scale):
        # Threshold beyond float range: no link succeeds
        return 0.0
    mean = mean_log_inverse_success(p, s, control)

    # Tail bounds: Markov and Chernoff on X = -ln P_s
    if mean/y <= control.gp_tol:
        return 1.0
    order = 1.0 if nsub > 1 else 0.5*delta
    if math.exp(log_moment(p, s, -order, control).real - order*y) <= control.gp_tol:
        return 1.0
    if math.exp(log_moment(p, s, 1.0, control).real + y) <= control.gp_tol:
        return 0.0

    def hyp(t):
        return specfun.hyp2f1(1.0 - 1j*t, 1.0 - delta, 2.0, 1.0/nsub, control)

    def modulus(t):
        return math.exp(t*scale*hyp(np.array([t]))[0].imag)

    # Truncation point, |M_jT| < 1e-9
    tmax = 1.0
    while modulus(tmax) >= 1.0e-9:
        tmax *= 2.0
        if tmax > 2.0**60:
            raise QuadratureError('Characteristic function does not decay; cannot truncate '
                                  'the inversion integral')

    # Panel edges: width grows from 1 near the origin, capped by the local phase rate
    slope = scale*nsub**(1.0 - delta)/math.gamma(delta)
    edges = [0.0]
    t = 0.0
    max_panels = control.max_gp_nodes//32
    while t < tmax:
        rate = y + min(mean, 2.0*slope*t**(delta - 1.0)) if t > 0.0 else y + mean
        t += min(math.pi/rate, max(1.0, 0.5*t))
        edges.append(t)
        if len(edges) > max_panels:
            raise QuadratureError('Inversion integral needs more than '
                                  + str(control.max_gp_nodes)+' nodes (T = '+str(tmax)+')')
    edges = np.array(edges)

    nodes, weights = np.polynomial.legendre.leggauss(16)

    def integrand(t):
        f = hyp(t)
        c = y - scale*f.real
        return np.exp(t*scale*f.imag)*c*np.sinc(t*c/math.pi)

    def integrate(edges, chunk=8192):
        mid = 0.5*(edges[1:] + edges[:-1])
        half = 0.5*(edges[1:] - edges[:-1])
        t = (mid[:, None] + half[:, None]*nodes[None, :]).ravel()
        f = np.empty(t.shape)
        for start in range(0, t.size, 16*chunk):
            f[start:start+16*chunk] = integrand(t[start:start+16*chunk])
        panel = f.reshape(-1, 16) @ weights
        return math.fsum(half*panel)

    previous = integrate(edges)
    while True:
        refined = np.empty(2*edges.size - 1)
        refined[0::2] = edges
        refined[1::2] = 0.5*(edges[1:] + edges[:-1])
        edges = refined
        if 16*(edges.size - 1) > control.max_gp_nodes:
            raise QuadratureError('Inversion integral did not reach tolerance '
                                  + str(control.gp_tol)+' within '+str(control.max_gp_nodes)
                                  + ' nodes')
        current = integrate(edges)
        if abs(current - previous) <= math.pi*control.gp_tol:
            break
        previous = current

    return min(1.0, max(0.0, 0.5 + current/math.pi))

# --------------------------------------------------------------------------------------------------


def meta_distribution_asymptotic(p, s, eps):

    if not 0.0 < eps < 1.0:
        raise DomainError('Target outage eps must lie in (0, 1), got '+str(eps))

    delta = p.delta
    theta = sir_threshold(p, s)
    ratio = theta/(s.n_subbands*eps)
    exponent = (specfun.constant_C_delta(delta)*ratio**(delta/(1.0 - delta))
                * p.lam**(1.0/(1.0 - delta)))
    return math.exp(-exponent)


def meta_distribution(p, s, eps, method=MdMethod.EXACT, control=None):

    method = MdMethod(method)
    if method is MdMethod.EXACT:
        if not 0.0 < eps < 1.0:
            raise DomainError('Target outage eps must lie in (0, 1), got '+str(eps))
        return meta_distribution_exact(p, s, 1.0 - eps, control)
    return meta_distribution_asymptotic(p, s, eps)


def density_reliable(p, s, eps, method=MdMethod.EXACT, control=None):

    return p.lam*meta_distribution(p, s, eps, method, control)

# --------------------------------------------------------------------------------------------------


def _delay_exponent(p, s, theta):

    # lambda C (theta/N)^delta (N-1)^-(1-delta)
    n = s.n_subbands
    return (p.lam*specfun.constant_C(p.delta)*(theta/n)**p.delta
            * (n - 1.0)**(-(1.0 - p.delta)))


def local_delay(p, s):

    n = s.n_subbands
    if n == 1:
        return math.inf

    theta = sir_threshold(p, s)
    if math.isinf(theta):
        return math.inf

    try:
        delay = math.exp(_delay_exponent(p, s, theta))
    except OverflowError:
        return math.inf

    if s.mode is Mode.ADAPTIVE_TIME:
        delay *= n
    return delay


def normalized_local_delay(p, s):

    # log2(1 + theta) is N a (adaptive SIR) or a (adaptive time)
    if s.mode is Mode.ADAPTIVE_SIR:
        bits = s.n_subbands*p.a
    else:
        bits = p.a
    return local_delay(p, s)/bits

# --------------------------------------------------------------------------------------------------


def moment_large_t_asymptote(p, s, t):

    if not t > 0.0:
        raise DomainError('t must be positive, got '+str(t))

    theta = sir_threshold(p, s)
    exponent = (p.lam*specfun.constant_C(p.delta)*(theta/s.n_subbands)**p.delta
                * t**p.delta/math.gamma(1.0 + p.delta))
    return math.exp(-exponent)

# --------------------------------------------------------------------------------------------------

# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from bwptools.utils import ConvergenceError, DomainError

__all__ = ['EvalControl', 'default_control', 'log_gamma', 'log_gamma_complex', 'hyp2f1',
           'constant_C', 'constant_C_delta']

# --------------------------------------------------------------------------------------------------
## @package specfun
#
#  Special functions for the bipolar network model: real and complex log-gamma, the Gauss
#  hypergeometric function 2F1(a, b; c; z) for complex a and the parameter family used by the
#  moments (b = 1 - delta, c = 2, z = 1/N), and the constants C and C_delta.
#
#  Evaluation paths of hyp2f1:
#  ---------------------------
#  gauss      | z = 1, Gauss summation through complex log-gamma
#  series     | Maclaurin series, only when |a| log(1/(1-z)) is small (no cancellation)
#  euler      | Euler integral with Gauss-Jacobi nodes, weight u^(b-1) (1-u)^(c-b-1)
#  asymptotic | endpoint (Watson) expansion of the Euler integral for |1-a| large
#
#  method='auto' picks per element of a and hands orders the Euler rule cannot resolve to the
#  endpoint expansion.
#
# --------------------------------------------------------------------------------------------------


# Smallest |1-a| min(log(1/(1-z)), 2 pi) at which the default endpoint expansion meets rel_tol
_expansion_floor = 40.0


@dataclass(frozen=True)
class EvalControl:
    """Tolerances and budgets shared by the numerical routines.

    rel_tol           | relative tolerance of hyp2f1 (series and Euler quadrature)
    max_terms         | cap on series terms
    quad_points       | starting Gauss-Jacobi resolution, doubled until converged
    max_quad_points   | largest Gauss-Jacobi rule tried
    series_switch     | series used only while |a| log(1/(1-z)) is below this
    asymptotic_switch | endpoint expansion used once |1-a| min(log(1/(1-z)), 2 pi) exceeds this
    asymptotic_terms  | terms kept in each endpoint expansion
    gp_tol            | absolute tolerance on the meta distribution (Gil-Pelaez inversion)
    max_gp_nodes      | node budget of the Gil-Pelaez quadrature
    """

    rel_tol: float = 1.0e-10
    max_terms: int = 4096
    quad_points: int = 129
    max_quad_points: int = 16385
    series_switch: float = 10.0
    asymptotic_switch: float = 60.0
    asymptotic_terms: int = 16
    gp_tol: float = 1.0e-9
    max_gp_nodes: int = 1 << 23

    def __post_init__(self):
        if not 0.0 < self.rel_tol <= 1.0e-6:
            raise DomainError('rel_tol must lie in (0, 1e-6], got '+str(self.rel_tol))
        if self.max_terms < 64:
            raise DomainError('max_terms must be at least 64, got '+str(self.max_terms))
        if self.quad_points < 64:
            raise DomainError('quad_points must be at least 64, got '+str(self.quad_points))
        if self.max_quad_points < self.quad_points:
            raise DomainError('max_quad_points must not be below quad_points')
        if self.series_switch <= 0.0:
            raise DomainError('series_switch must be positive')
        if self.asymptotic_switch < _expansion_floor:
            raise DomainError('asymptotic_switch must be at least '+str(_expansion_floor)
                              + ', got '+str(self.asymptotic_switch))
        if not 4 <= self.asymptotic_terms <= 40:
            raise DomainError('asymptotic_terms must lie in [4, 40]')
        if not 0.0 < self.gp_tol < 1.0e-3:
            raise DomainError('gp_tol must lie in (0, 1e-3), got '+str(self.gp_tol))
        if self.max_gp_nodes < 1024:
            raise DomainError('max_gp_nodes must be at least 1024')


default_control = EvalControl()

_machine_eps = np.finfo(float).eps

# --------------------------------------------------------------------------------------------------


def log_gamma(x):

    """ln Gamma(x) for real x > 0 (scalar or array)."""

    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0.0)):
        raise DomainError('log_gamma requires x > 0, got '+str(x))

    value = scipy.special.gammaln(xa)
    return float(value) if value.ndim == 0 else value

# --------------------------------------------------------------------------------------------------


def log_gamma_complex(z):

    """Principal branch of ln Gamma(z) for Re z > 0 (scalar or array)."""

    za = np.asarray(z, dtype=complex)
    if np.any(~(za.real > 0.0)):
        raise DomainError('log_gamma_complex requires Re z > 0, got '+str(z))

    value = scipy.special.loggamma(za)
    return complex(value) if value.ndim == 0 else value

# --------------------------------------------------------------------------------------------------


def constant_C(delta):

    _check_delta(delta)
    return math.pi*math.exp(log_gamma(1.0-delta) + log_gamma(1.0+delta))

# --------------------------------------------------------------------------------------------------


def constant_C_delta(delta):

    _check_delta(delta)
    base = math.pi*delta*math.exp(log_gamma(1.0-delta))
    return base**(1.0/(1.0-delta))/(delta/(1.0-delta))

# --------------------------------------------------------------------------------------------------


def _check_delta(delta):

    if not 0.0 < delta < 1.0:
        raise DomainError('delta must lie in (0, 1), got '+str(delta))

# --------------------------------------------------------------------------------------------------


def hyp2f1(a, b, c, z, control=None, method='auto'):

    """Gauss hypergeometric function 2F1(a, b; c; z).

    a may be a complex scalar or an array of complex values; b, c and z are real with
    0 < b <= c, c >= 1 and 0 <= z <= 1. Returns a complex scalar or an array shaped like a.
    """

    control = control or default_control

    if method not in ('auto', 'gauss', 'series', 'euler', 'asymptotic'):
        raise DomainError('Unknown hyp2f1 method \''+str(method)+'\'')
    if not 0.0 < b <= c:
        raise DomainError('hyp2f1 requires 0 < b <= c, got b='+str(b)+', c='+str(c))
    if c < 1.0:
        raise DomainError('hyp2f1 requires c >= 1, got c='+str(c))
    if not 0.0 <= z <= 1.0:
        raise DomainError('hyp2f1 requires 0 <= z <= 1, got z='+str(z))

    a_in = np.asarray(a, dtype=complex)
    scalar = a_in.ndim == 0
    av = np.atleast_1d(a_in).ravel()
    out = np.ones(av.shape, dtype=complex)

    # 2F1(0, b; c; z) = 2F1(a, b; c; 0) = 1
    active = av != 0
    if z > 0.0 and np.any(active):

        aa = av[active]

        if z == 1.0 or method == 'gauss':
            if z != 1.0:
                raise DomainError('Gauss summation only applies at z = 1')
            out[active] = _gauss_sum(aa, b, c)

        elif c == b:
            out[active] = np.exp(-aa*np.log1p(-z))

        else:
            out[active] = _hyp2f1_inner(aa, b, c, z, control, method)

    out = out.reshape(a_in.shape)
    return complex(out) if scalar else out

# --------------------------------------------------------------------------------------------------


def _hyp2f1_inner(a, b, c, z, control, method):

    wlog = -math.log1p(-z)
    s = 1.0 - a

    if method == 'series':
        return _power_series(a, b, c, z, control)
    if method == 'euler':
        return _euler_integral(a, b, c, z, control)
    if method == 'asymptotic':
        return _endpoint_expansion(s, b, c, z, control)

    value = np.empty(a.shape, dtype=complex)
    order = np.abs(s)*min(wlog, 2.0*math.pi)
    use_asym = order >= control.asymptotic_switch
    use_series = ~use_asym & (np.abs(a)*wlog <= control.series_switch)
    use_euler = ~use_asym & ~use_series

    if np.any(use_asym):
        value[use_asym] = _endpoint_expansion(s[use_asym], b, c, z, control)
    if np.any(use_series):
        value[use_series] = _power_series(a[use_series], b, c, z, control)
    if np.any(use_euler):
        try:
            value[use_euler] = _euler_integral(a[use_euler], b, c, z, control)
        except ConvergenceError:
            # Quadrature budget exhausted: hand the large orders to the endpoint expansion
            rescue = use_euler & (order >= _expansion_floor)
            if not np.any(rescue):
                raise
            value[rescue] = _endpoint_expansion(s[rescue], b, c, z, control)
            rest = use_euler & ~rescue
            if np.any(rest):
                value[rest] = _euler_integral(a[rest], b, c, z, control)

    return value

# --------------------------------------------------------------------------------------------------


def _gauss_sum(a, b, c):

    # Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)), convergent only for Re(c-a-b) > 0
    excess = c - a - b
    if np.any(~(excess.real > 0.0)):
        raise DomainError('2F1 at z = 1 diverges when Re(c-a-b) <= 0')

    logv = (log_gamma(c) + log_gamma_complex(excess) - log_gamma_complex(c - a)
            - log_gamma(c - b))
    return np.exp(logv)

# --------------------------------------------------------------------------------------------------


def _power_series(a, b, c, z, control):

    term = np.ones(a.shape, dtype=complex)
    total = term.copy()
    small_before = False

    for k in range(control.max_terms):
        term = term*(a + k)*(b + k)/((c + k)*(k + 1.0))*z
        total = total + term
        small = np.all(np.abs(term) <= _machine_eps*np.abs(total))
        if small and small_before:
            return total
        small_before = small

    raise ConvergenceError('2F1 series did not converge within '+str(control.max_terms)+' terms')

# --------------------------------------------------------------------------------------------------


@functools.lru_cache(maxsize=32)
def _jacobi_rule(npoints, alpha, beta):

    # Nodes on [0, 1] for the weight u^beta (1-u)^alpha
    x, w = scipy.special.roots_jacobi(npoints, alpha, beta)
    u = 0.5*(1.0 + x)
    w = w*2.0**(-(alpha + beta + 1.0))
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


def _euler_integral(a, b, c, z, control, chunk=4096):

    # 2F1 = Gamma(c)/(Gamma(b) Gamma(c-b)) int_0^1 u^(b-1) (1-u)^(c-b-1) (1-zu)^(-a) du
    scale = math.exp(log_gamma(c) - log_gamma(b) - log_gamma(c - b))

    def integrate(npoints):
        u, w = _jacobi_rule(npoints, c - b - 1.0, b - 1.0)
        logfac = np.log1p(-z*u)
        value = np.empty(a.shape, dtype=complex)
        for start in range(0, a.size, chunk):
            block = a[start:start+chunk]
            value[start:start+chunk] = np.exp(-np.outer(block, logfac)) @ w
        return scale*value

    npoints = control.quad_points
    previous = integrate(npoints)
    while True:
        npoints = 2*npoints - 1
        if npoints > control.max_quad_points:
            raise ConvergenceError('Euler integral of 2F1 did not reach rel_tol '
                                   + str(control.rel_tol)+' with '
                                   + str(control.max_quad_points)+' nodes')
        current = integrate(npoints)
        if np.all(np.abs(current - previous) <= control.rel_tol*np.abs(current) + 1.0e-300):
            return current
        previous = current

# --------------------------------------------------------------------------------------------------


def _series_power(g, m):

    # Coefficients of g(w)^m for g(0) = 1 (J.C.P. Miller recurrence)
    n = len(g)
    p = np.zeros(n)
    p[0] = 1.0
    for k in range(1, n):
        j = np.arange(1, k+1)
        p[k] = np.sum(((m + 1.0)*j - k)*g[1:k+1]*p[k-j])/k
    return p


@functools.lru_cache(maxsize=256)
def _endpoint_coefficients(b, c, z, terms):

    p = b - 1.0
    q = c - b - 1.0
    r = (1.0 - z)/z
    k = np.arange(terms)
    fact = scipy.special.factorial(k)
    fact1 = scipy.special.factorial(k + 1)

    # Left end, w = -log(1 - zu): u = (1 - e^-w)/z
    e_coef = (-1.0)**k/fact1
    g_coef = (-1.0)**k/(z*fact)
    g_coef[0] = 1.0
    phi = np.convolve(_series_power(e_coef, p), _series_power(g_coef, q))[:terms]

    # Right end, v = W - w
    h_coef = 1.0/fact1
    j_coef = -r/fact
    j_coef[0] = 1.0
    psi = np.convolve(_series_power(h_coef, q), _series_power(j_coef, p))[:terms]

    left = phi*scipy.special.gamma(k + 1.0 + p)
    right = psi*scipy.special.gamma(k + 1.0 + q)
    left.setflags(write=False)
    right.setflags(write=False)
    return left, right


def _endpoint_expansion(s, b, c, z, control):

    # Watson expansion of int_0^W e^(-s w) (...) dw at both ends, s = 1 - a
    if z >= 1.0:
        raise DomainError('Endpoint expansion needs z < 1')

    p = b - 1.0
    q = c - b - 1.0
    r = (1.0 - z)/z
    wlog = -math.log1p(-z)
    left, right = _endpoint_coefficients(float(b), float(c), float(z), control.asymptotic_terms)

    log_s = np.log(s)
    log_ms = np.log(-s)
    left_sum = np.zeros(s.shape, dtype=complex)
    right_sum = np.zeros(s.shape, dtype=complex)
    for k in range(control.asymptotic_terms):
        left_sum += left[k]*np.exp(-(k + 1.0 + p)*log_s)
        right_sum += right[k]*np.exp(-(k + 1.0 + q)*log_ms)

    scale = math.exp(log_gamma(c) - log_gamma(b) - log_gamma(c - b))/z
    return scale*(z**(-p)*left_sum + np.exp(-s*wlog)*r**q*right_sum)

# --------------------------------------------------------------------------------------------------

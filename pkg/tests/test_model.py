# (C) Copyright 2020 UCAR
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import math

import mpmath
import numpy as np
import pytest
import scipy.integrate

from bwptools import model, optimize, specfun
from bwptools.model import MdMethod, Mode, NetworkParams, PartitionScheme
from bwptools.utils import DomainError

SIR = Mode.ADAPTIVE_SIR
TIME = Mode.ADAPTIVE_TIME

# --------------------------------------------------------------------------------------------------


def test_network_params_derived_quantities():
    p = NetworkParams(lam=1, alpha=3, rate=0.25, bandwidth=1)
    assert isinstance(p.lam, float)
    assert p.delta == pytest.approx(2.0/3.0)
    assert p.a == 0.25
    assert p.theta_one == pytest.approx(2.0**0.25 - 1.0, rel=1e-15)
    assert p.with_lambda(0.5).lam == 0.5
    assert p.with_lambda(0.5).alpha == 3.0


@pytest.mark.parametrize('kwargs', [{'lam': 0.0}, {'lam': -1.0}, {'alpha': 2.0}, {'alpha': 1.5},
                                    {'rate': 0.0}, {'bandwidth': -1.0}, {'lam': math.inf},
                                    {'alpha': math.nan}, {'rate': '0.1'}])
def test_network_params_validation(kwargs):
    values = {'lam': 0.1, 'alpha': 4.0, 'rate': 0.1, 'bandwidth': 1.0}
    values.update(kwargs)
    with pytest.raises(DomainError):
        NetworkParams(**values)


def test_partition_scheme():
    s = PartitionScheme('adaptive-time', 4)
    assert s.mode is TIME
    assert s.n_subbands == 4
    assert PartitionScheme(SIR).n_subbands == 1
    assert PartitionScheme(SIR, np.int64(3)).n_subbands == 3


@pytest.mark.parametrize('mode, n', [('adaptive-power', 2), (SIR, 0), (SIR, 2.5), (SIR, True)])
def test_partition_scheme_validation(mode, n):
    with pytest.raises(DomainError):
        PartitionScheme(mode, n)

# --------------------------------------------------------------------------------------------------


def test_sir_threshold_examples():
    p = NetworkParams(0.1, 4.0, 0.1, 1.0)
    expected = float(mpmath.power(2, mpmath.mpf('0.1')) - 1)
    assert model.sir_threshold(p, PartitionScheme(SIR, 1)) == pytest.approx(expected, rel=1e-14)
    assert model.sir_threshold(p, PartitionScheme(TIME, 1)) == pytest.approx(expected, rel=1e-14)

    q = NetworkParams(1.0, 3.0, 0.25, 1.0)
    assert model.sir_threshold(q, PartitionScheme(SIR, 4)) == pytest.approx(1.0, rel=1e-15)
    assert model.sir_threshold(q, PartitionScheme(TIME, 4)) == pytest.approx(0.189207115002721,
                                                                            rel=1e-13)


def test_sir_threshold_overflow_is_infinite(fig2_params):
    assert model.sir_threshold(fig2_params, PartitionScheme(SIR, 100000)) == math.inf

# --------------------------------------------------------------------------------------------------


def test_moment_order_zero(fig1_params):
    for mode in Mode:
        assert model.moment(fig1_params, PartitionScheme(mode, 3), 0.0) == 1.0


def test_first_moment_unit_threshold(unit_theta_params):
    s = PartitionScheme(SIR, 1)
    expected = math.exp(-0.1*math.pi**2/2.0)
    assert model.moment(unit_theta_params, s, 1.0) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.61052, abs=1e-5)
    assert model.success_probability(unit_theta_params, s) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize('alpha', [4.0, 3.0])
@pytest.mark.parametrize('n', [2, 4, 8])
@pytest.mark.parametrize('lam', [0.1, 1.0])
def test_moment_identities(alpha, n, lam):
    p = NetworkParams(lam, alpha, 0.25, 1.0)
    s = PartitionScheme(SIR, n)
    delta = p.delta
    theta = model.sir_threshold(p, s)

    # M_1 is the success probability
    first = math.exp(-lam*specfun.constant_C(delta)*theta**delta/n)
    assert model.moment(p, s, 1.0) == pytest.approx(first, rel=1e-12)

    # M_-1 is the local delay
    assert model.moment(p, s, -1.0) == pytest.approx(model.local_delay(p, s), rel=1e-9)
    st = PartitionScheme(TIME, n)
    assert n*model.moment(p, st, -1.0) == pytest.approx(model.local_delay(p, st), rel=1e-9)


def test_moment_vectorised(fig2_params):
    s = PartitionScheme(SIR, 3)
    b = np.array([0.5, 1.0, 2.0, 3.0])
    values = model.moment(fig2_params, s, b)
    assert values.dtype == float
    for bi, vi in zip(b, values):
        assert vi == pytest.approx(model.moment(fig2_params, s, float(bi)), rel=1e-12)

    # Moments of a [0, 1] variable decrease with the order
    assert np.all(np.diff(values) < 0.0)


def test_moment_complex_order_modulus(fig2_params):
    s = PartitionScheme(SIR, 2)
    value = model.moment(fig2_params, s, 5.0j)
    assert isinstance(value, complex)
    assert abs(value) <= 1.0


def test_moment_diverges_for_single_band(fig2_params):
    s = PartitionScheme(SIR, 1)
    with pytest.raises(DomainError):
        model.log_moment(fig2_params, s, -1.0)
    # Orders above -delta stay finite
    assert math.isfinite(model.moment(fig2_params, s, -0.5))


@pytest.mark.parametrize('n', [1, 3])
@pytest.mark.parametrize('b', [0.5, 1.0, 2.0, 3.5])
def test_moment_decreases_in_lambda(fig1_params, n, b):
    s = PartitionScheme(SIR, n)
    values = [model.moment(fig1_params.with_lambda(lam), s, b) for lam in np.logspace(-3, 0, 12)]
    assert np.all(np.diff(values) < 0.0)


def test_mean_log_inverse_success(fig2_params):
    # Slope of -ln M_b at b = 0
    s = PartitionScheme(SIR, 3)
    h = 1.0e-6
    slope = -(model.log_moment(fig2_params, s, h).real
              - model.log_moment(fig2_params, s, -h).real)/(2.0*h)
    assert model.mean_log_inverse_success(fig2_params, s) == pytest.approx(slope, rel=1e-7)


def test_success_probability_limits():
    p = NetworkParams(1.0, 3.0, 0.25, 1.0)
    values = [model.success_probability(p, PartitionScheme(TIME, n)) for n in (1, 2, 4, 16, 256)]
    assert np.all(np.diff(values) > 0.0)
    assert values[-1] > 0.9
    tiny = p.with_lambda(1.0e-12)
    assert model.success_probability(tiny, PartitionScheme(SIR, 1)) == pytest.approx(1.0,
                                                                                     abs=1e-10)

# --------------------------------------------------------------------------------------------------


def test_meta_distribution_trivial_limits(fig1_params, fig2_params):
    assert model.meta_distribution_exact(fig2_params, PartitionScheme(SIR, 2),
                                         1.0e-12) == pytest.approx(1.0, abs=1e-9)
    tiny = fig1_params.with_lambda(1.0e-12)
    assert model.meta_distribution_exact(tiny, PartitionScheme(SIR, 1), 0.99) == pytest.approx(
        1.0, abs=1e-9)


@pytest.mark.parametrize('x', [0.0, 1.0, -0.1, 1.5])
def test_meta_distribution_rejects_threshold(fig1_params, x):
    with pytest.raises(DomainError):
        model.meta_distribution_exact(fig1_params, PartitionScheme(SIR, 1), x)


def test_meta_distribution_decreases_in_threshold(fig2_params):
    s = PartitionScheme(SIR, 2)
    values = [model.meta_distribution_exact(fig2_params, s, x) for x in (0.2, 0.5, 0.8, 0.95)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert np.all(np.diff(values) < 0.0)


def test_meta_distribution_decreases_in_sir_threshold():
    # theta grows with the rate
    s = PartitionScheme(SIR, 2)
    values = [model.meta_distribution_exact(NetworkParams(0.2, 3.0, rate, 1.0), s, 0.5)
              for rate in (0.05, 0.1, 0.25, 0.5)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert np.all(np.diff(values) <= 1e-9)


@pytest.mark.parametrize('n', [3, 4, 16])
def test_meta_distribution_many_bands(fig1_params, n):
    single = model.meta_distribution_exact(fig1_params, PartitionScheme(SIR, 1), 0.99)
    assert single == pytest.approx(0.53940, rel=1e-3)
    value = model.meta_distribution_exact(fig1_params, PartitionScheme(SIR, n), 0.99)
    assert 0.0 <= value < single


def test_meta_distribution_threshold_overflow(fig2_params):
    s = PartitionScheme(SIR, 5000)
    assert model.meta_distribution_exact(fig2_params, s, 0.9) == 0.0
    assert model.density_reliable(fig2_params, s, 0.1) == 0.0
    assert model.meta_distribution_asymptotic(fig2_params, s, 0.1) == 0.0


@pytest.mark.slow
@pytest.mark.parametrize('mode, n', [(SIR, 1), (SIR, 2), (TIME, 4)])
def test_meta_distribution_integrates_to_mean(fig2_params, mode, n):
    # E[P_s] = int_0^1 P(P_s > x) dx
    s = PartitionScheme(mode, n)
    p = fig2_params.with_lambda(0.2)
    integral, _ = scipy.integrate.quad(lambda x: model.meta_distribution_exact(p, s, x), 0.0, 1.0,
                                       epsabs=1.0e-7, limit=100)
    assert integral == pytest.approx(model.moment(p, s, 1.0), abs=1e-5)


def test_meta_distribution_asymptotic_at_optimal_lambda(fig1_params):
    eps = 0.01
    for n in (1, 2, 5):
        s = PartitionScheme(SIR, n)
        lam0 = optimize.optimal_lambda_given_n(fig1_params, s, eps)
        p0 = fig1_params.with_lambda(lam0)
        expected = math.exp(-(1.0 - fig1_params.delta))
        assert model.meta_distribution_asymptotic(p0, s, eps) == pytest.approx(expected,
                                                                               rel=1e-12)
        assert model.density_reliable(p0, s, eps, MdMethod.ASYMPTOTIC) == pytest.approx(
            lam0*expected, rel=1e-12)


@pytest.mark.parametrize('eps', [0.01, 0.1])
def test_meta_distribution_asymptotic_grows_with_time_slots(fig2_params, eps):
    p = fig2_params.with_lambda(0.01)
    values = [model.meta_distribution_asymptotic(p, PartitionScheme(TIME, n), eps)
              for n in range(1, 65)]
    assert np.all(np.diff(values) > 0.0)


def test_meta_distribution_asymptotic_limits(fig1_params):
    s = PartitionScheme(SIR, 1)
    tiny = fig1_params.with_lambda(1.0e-12)
    assert model.meta_distribution_asymptotic(tiny, s, 0.01) == pytest.approx(1.0, abs=1e-12)

    # Literal formula as eps approaches 1
    delta = fig1_params.delta
    theta = model.sir_threshold(fig1_params, s)
    literal = math.exp(-specfun.constant_C_delta(delta)*theta**(delta/(1.0 - delta))
                       * fig1_params.lam**(1.0/(1.0 - delta)))
    assert model.meta_distribution_asymptotic(fig1_params, s, 1.0 - 1e-12) == pytest.approx(
        literal, rel=1e-9)


def test_meta_distribution_dispatch(fig1_params):
    s = PartitionScheme(SIR, 1)
    assert model.meta_distribution(fig1_params, s, 0.2, 'asymptotic') == \
        model.meta_distribution_asymptotic(fig1_params, s, 0.2)
    assert model.meta_distribution(fig1_params, s, 0.2, MdMethod.EXACT) == \
        model.meta_distribution_exact(fig1_params, s, 0.8)
    with pytest.raises(ValueError):
        model.meta_distribution(fig1_params, s, 0.2, 'simulated')


def test_ultrareliable_asymptote_improves(fig1_params):
    # -ln of the asymptotic over -ln of the exact meta distribution approaches 1 as eps -> 0
    s = PartitionScheme(SIR, 1)
    ratios = []
    for eps in (0.1, 0.003):
        exact = model.meta_distribution_exact(fig1_params, s, 1.0 - eps)
        asymptotic = model.meta_distribution_asymptotic(fig1_params, s, eps)
        ratios.append(math.log(asymptotic)/math.log(exact))
    assert abs(ratios[1] - 1.0) < abs(ratios[0] - 1.0)


def test_density_reliable_small_lambda(fig1_params):
    s = PartitionScheme(SIR, 1)
    tiny = fig1_params.with_lambda(1.0e-6)
    assert model.density_reliable(tiny, s, 0.01, 'asymptotic') == pytest.approx(1.0e-6, rel=1e-6)
    small = fig1_params.with_lambda(0.005)
    assert model.density_reliable(small, s, 0.01) == pytest.approx(0.005, rel=0.05)


def test_density_reliable_below_lambda(fig1_params):
    s = PartitionScheme(SIR, 1)
    value = model.density_reliable(fig1_params, s, 0.01)
    assert 0.0 < value <= fig1_params.lam

# --------------------------------------------------------------------------------------------------


def test_local_delay_single_band_diverges(fig2_params):
    for mode in Mode:
        assert model.local_delay(fig2_params, PartitionScheme(mode, 1)) == math.inf
        assert model.normalized_local_delay(fig2_params, PartitionScheme(mode, 1)) == math.inf


def test_local_delay_overflow(fig2_params):
    assert model.local_delay(fig2_params, PartitionScheme(SIR, 5000)) == math.inf


def test_local_delay_golden(fig2_params):
    mpmath.mp.dps = 30
    delta = mpmath.mpf(2)/3
    c = mpmath.pi*mpmath.gamma(1 - delta)*mpmath.gamma(1 + delta)
    theta = mpmath.sqrt(2) - 1
    expected = float(mpmath.exp(c*(theta/2)**delta))
    assert model.local_delay(fig2_params, PartitionScheme(SIR, 2)) == pytest.approx(expected,
                                                                                   rel=1e-12)


def test_adaptive_time_delay_values(fig2_params):
    assert model.local_delay(fig2_params, PartitionScheme(TIME, 3)) == pytest.approx(7.799,
                                                                                    abs=2e-3)
    assert model.local_delay(fig2_params, PartitionScheme(TIME, 4)) == pytest.approx(7.968,
                                                                                    abs=2e-3)


def test_normalized_local_delay(fig2_params):
    for n in (2, 5, 9):
        st = PartitionScheme(TIME, n)
        assert model.normalized_local_delay(fig2_params, st) == pytest.approx(
            model.local_delay(fig2_params, st)/0.25, rel=1e-14)
        ss = PartitionScheme(SIR, n)
        assert model.normalized_local_delay(fig2_params, ss) == pytest.approx(
            model.local_delay(fig2_params, ss)/(0.25*n), rel=1e-14)

# --------------------------------------------------------------------------------------------------


def test_moment_large_t_asymptote():
    p = NetworkParams(0.1, 4.0, 0.1, 1.0)
    s = PartitionScheme(SIR, 2)
    gaps = []
    for t in (1.0e2, 1.0e3, 1.0e4):
        log_ratio = model.log_moment(p, s, t).real - math.log(model.moment_large_t_asymptote(p, s,
                                                                                           t))
        gaps.append(abs(math.expm1(log_ratio)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.1


def test_moment_large_t_asymptote_limits(fig1_params):
    s = PartitionScheme(SIR, 1)
    assert model.moment_large_t_asymptote(fig1_params, s, 1.0e-12) == pytest.approx(1.0, abs=1e-6)
    tiny = fig1_params.with_lambda(1.0e-12)
    assert model.moment_large_t_asymptote(tiny, s, 10.0) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(DomainError):
        model.moment_large_t_asymptote(fig1_params, s, 0.0)

# --------------------------------------------------------------------------------------------------

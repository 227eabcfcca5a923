import math

import numpy as np
import pytest

from openrmt import (
    DensityParams,
    KappaDistribution,
    LogDensityValue,
    SingularConfigurationError,
    SpectrumConfiguration,
    canonicalize_conjugates,
    classify,
    log_density_kappa1,
    log_density_random_kappa,
    normalization_constants,
    wedge_factor,
)

CHI = KappaDistribution("chi", (3.0, 0.5))
UNIFORM = KappaDistribution("uniform", (0.5, 5.0))


def _config(*points):
    return classify(canonicalize_conjugates(np.array(points, dtype=complex)))


def test_normalization_constant_small_cases():
    # d(1, beta=2, gamma=1) = sqrt(pi) * 2^(3/2) * e, frozen from quadrature
    d = normalization_constants(DensityParams(2.0, 1)).d_even
    assert abs(d - math.sqrt(math.pi) * 2.0**1.5 * math.e) < 1e-12
    assert abs(d - 13.627444) < 1e-5

    # c(1, beta=2, gamma=1) = sqrt(2 pi)
    c = normalization_constants(DensityParams(2.0, 1)).c
    assert abs(c - math.sqrt(2.0 * math.pi)) < 1e-12


def test_normalization_constant_ratio():
    """d_odd/d_even = exp(-beta n / (2 gamma^2)) / 2 for every parameter set."""
    for beta in (1.0, 2.0, 4.0):
        for n in (1, 2, 5):
            for gamma in (0.7, 1.0, 2.0):
                consts = normalization_constants(DensityParams(beta, n, gamma))
                ratio = math.exp(consts.log_d_odd - consts.log_d_even)
                expected = math.exp(-beta * n / (2.0 * gamma * gamma)) / 2.0
                assert abs(ratio - expected) < 1e-12 * expected


def test_density_worked_value_beta_two():
    """Straight-line recomputation at the zeros {4, -2} with kappa = 3.

    At beta = 2 the modulus factors drop out, leaving Vandermonde,
    Gaussian, and coupling terms only.
    """
    config = _config(4.0, -2.0)
    params = DensityParams(2.0, 1, 1.0, UNIFORM)
    value = log_density_random_kappa(config, params)
    assert value.in_support
    assert abs(value.kappa_implied - 3.0) < 1e-12

    log_d = normalization_constants(params).log_d_even
    by_hand = (
        math.log(6.0)               # |z1 - z2|
        - 2.0 * 20.0 / 4.0          # exp(-beta n (z1^2 + z2^2) / (4 gamma^2))
        + 2.0 * 9.0 / 2.0           # exp(beta n kappa^2 / (2 gamma^2))
        + math.log(1.0 / 4.5)       # uniform kappa density at 3
        - 1.0 * math.log(3.0)       # kappa^(beta n - 1)
        - log_d
    )
    assert abs(value.log_value - by_hand) < 1e-12


def test_density_worked_value_beta_one_pair():
    """Conjugate pair at beta = 1 exercises every modulus factor."""
    x, y = 0.3, 0.4
    config = _config(complex(x, y), complex(x, -y))
    params = DensityParams(1.0, 1, 1.0, CHI)
    value = log_density_random_kappa(config, params)
    assert value.in_support

    modsq = x * x + y * y
    ksq = 1.0 - modsq
    kappa = math.sqrt(ksq)
    one_minus_z2 = abs(1.0 - complex(x, y) ** 2)
    log_d = normalization_constants(params).log_d_even
    by_hand = (
        math.log(2.0 * y)                            # Vandermonde
        + (-0.5) * math.log(one_minus_z2)            # pair factor, exponent (beta-2)/2
        - 1.0 * (2.0 * (x * x - y * y)) / 4.0        # Gaussian, z^2 + conj(z)^2
        + 2.0 * (-0.25) * math.log(ksq / one_minus_z2)  # two per-point modulus factors
        + 1.0 * ksq / 2.0                            # coupling exponential
        + math.log(CHI.density_at(kappa))
        - 0.0 * math.log(kappa)                      # kappa^(beta n - 1), beta n = 1
        - log_d
    )
    assert abs(value.log_value - by_hand) < 1e-12


def test_density_input_order_does_not_matter():
    params = DensityParams(2.0, 1, 1.0, CHI)
    a = log_density_random_kappa(_config(4.0, -2.0), params)
    b = log_density_random_kappa(_config(-2.0, 4.0), params)
    assert a.log_value == b.log_value


def test_density_out_of_support_by_coupling():
    # product of zeros above 1 leaves no real kappa
    value = log_density_random_kappa(_config(0.5, 2.5), DensityParams(2.0, 1, 1.0, CHI))
    assert not value.in_support
    assert value.log_value == -math.inf


def test_density_out_of_support_by_membership():
    # kappa is fine but two points sit between the outside pair inverses
    config = _config(-0.5, 0.5, 2.0, 3.0)
    value = log_density_random_kappa(config, DensityParams(2.0, 2, 1.0, CHI))
    assert not value.in_support
    assert value.kappa_implied is not None
    assert abs(value.kappa_implied - math.sqrt(2.5)) < 1e-12


def test_density_out_of_support_by_kappa_law():
    # implied kappa 3 falls outside a narrow uniform law
    narrow = KappaDistribution("uniform", (0.5, 1.0))
    value = log_density_random_kappa(_config(4.0, -2.0), DensityParams(2.0, 1, 1.0, narrow))
    assert not value.in_support
    assert abs(value.kappa_implied - 3.0) < 1e-12


def test_density_rejects_point_kappa_and_bad_count():
    config = _config(4.0, -2.0)
    with pytest.raises(ValueError):
        log_density_random_kappa(config, DensityParams(2.0, 1, 1.0, KappaDistribution("point", (1.0,))))
    with pytest.raises(ValueError):
        log_density_random_kappa(config, DensityParams(2.0, 2, 1.0, CHI))


def test_density_singular_at_unit_real_point():
    with pytest.raises(SingularConfigurationError):
        log_density_random_kappa(_config(1.0, 0.5), DensityParams(2.0, 1, 1.0, CHI))


def test_fixed_coupling_density_odd_count():
    """kappa = 1 variant: odd point count, no coupling density factor."""
    config = _config(0.3, 0.6 + 0.8j, 0.6 - 0.8j)
    params = DensityParams(2.0, 2, 1.0)
    value = log_density_kappa1(config, params)
    assert value.kappa_implied is None
    # |0.6 + 0.8i| = 1: the pair sits exactly on the circle
    assert value.boundary
    assert value.in_support
    assert math.isfinite(value.log_value)


def test_fixed_coupling_density_off_boundary():
    config = _config(0.3, 0.5 + 0.5j, 0.5 - 0.5j)
    params = DensityParams(1.0, 2, 1.0)
    value = log_density_kappa1(config, params)
    assert value.in_support
    assert not value.boundary
    assert math.isfinite(value.log_value)


def test_log_density_value_invariant():
    with pytest.raises(ValueError):
        LogDensityValue(log_value=0.5, kappa_implied=None, in_support=False)


def test_wedge_factor_counts():
    assert wedge_factor(0, 2) == 0.5
    assert wedge_factor(1, 0) == 1.0
    assert wedge_factor(2, 1) == 0.5
    assert wedge_factor(2, 3) == 1.0 / (2 * 6)
    assert wedge_factor(1, 1, count=3) == 1.0
    with pytest.raises(ValueError):
        wedge_factor(1, 1, count=4)
    with pytest.raises(ValueError):
        wedge_factor(-1, 0)


def test_density_params_validation():
    with pytest.raises(ValueError):
        DensityParams(0.0, 1)
    with pytest.raises(ValueError):
        DensityParams(2.0, 0)
    with pytest.raises(ValueError):
        DensityParams(2.0, 1, 0.0)

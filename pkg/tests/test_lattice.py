import math
import warnings

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given
from hypothesis import strategies as st

from metasurf.accel import AccelSpec
from metasurf.errors import DomainError, LatticePointError, RegimeWarning, WoodAnomaly
from metasurf.lattice import (GratingConfig, LatticeSums, greens_spatial, greens_spectral,
                              lattice_sums, sigma_matrix, sigma_p_asymptotic, sigma_p_direct)


def smooth_window(t, flat=0.3):
    t = np.abs(t)
    s = np.clip((t - flat) / (1 - flat), 0, 1)
    f = lambda u: np.where(u > 0, np.exp(-1 / np.where(u > 0, u, 1)), 0.0)  # noqa: E731
    return f(1 - s) / (f(1 - s) + f(s))


def windowed_sigma(cfg, p, half=40_000):
    """Oracle: scipy Hankel functions, smoothly truncated image sum."""
    m = np.arange(1, half + 1)
    w = smooth_window(m / (half + 1))
    h = sp.hankel1(p, cfg.k0 * m * cfg.d)
    right = np.exp(1j * cfg.alpha0 * m * cfg.d) * h
    left = (-1) ** p * np.exp(-1j * cfg.alpha0 * m * cfg.d) * h
    return complex(np.sum(w * (right + left)))


class TestGratingConfig:
    def test_defaults(self):
        cfg = GratingConfig(k0=2.0, theta=0.3)
        assert cfg.alpha0 == pytest.approx(2.0 * math.sin(0.3))
        assert cfg.n_orders == 8 and cfg.n_propagative == 1
        assert cfg.orders[0] == -8 and cfg.orders[-1] == 8

    def test_truncation_grows_with_propagating_orders(self):
        cfg = GratingConfig(k0=30.0, theta=0.1)
        count = sum(abs(cfg.alpha0 + n * cfg.K) < cfg.k0 for n in range(-50, 51))
        assert cfg.n_propagative == count == 10
        assert cfg.n_orders == 20

    def test_alpha0_representative(self):
        cfg = GratingConfig(k0=2.0, theta=0.3, alpha0=2.0 * math.sin(0.3) + 2 * math.pi)
        assert cfg.alpha(-1) == pytest.approx(2.0 * math.sin(0.3))
        with pytest.raises(DomainError):
            GratingConfig(k0=2.0, theta=0.3, alpha0=0.1)

    @pytest.mark.parametrize("kw", [dict(k0=0.0), dict(k0=-1.0), dict(k0=1.0, d=0.0),
                                    dict(k0=1.0, theta=math.pi / 2), dict(k0=float("nan"))])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            GratingConfig(**kw)

    def test_wood_anomaly_detected(self):
        k0 = 4.0
        theta = math.asin((k0 - 2 * math.pi) / k0)
        with pytest.raises(WoodAnomaly) as info:
            GratingConfig(k0=k0, theta=theta)
        assert info.value.order == 1
        with pytest.raises(WoodAnomaly):
            GratingConfig(k0=2 * math.pi)

    def test_frozen(self):
        cfg = GratingConfig(k0=1.0)
        with pytest.raises(AttributeError):
            cfg.k0 = 2.0


@pytest.mark.parametrize("k0,theta", [(2.0, 0.2), (4.5, -0.4), (0.3, 0.9)])
@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_sigma_direct_against_windowed_oracle(k0, theta, p):
    cfg = GratingConfig(k0=k0, theta=theta)
    got = sigma_p_direct(cfg, p, AccelSpec(tol=1e-12)).value
    ref = windowed_sigma(cfg, p)
    assert abs(got - ref) < 1e-7 * max(1.0, abs(ref))


def test_negative_order_symmetry():
    cfg = GratingConfig(k0=3.1, theta=0.4)
    for p in (1, 2, 3):
        assert abs(sigma_p_direct(cfg, -p).value - (-1) ** p * sigma_p_direct(cfg, p).value) < 1e-8
    sums = lattice_sums(cfg, p_max=3)
    assert sums[-3] == -sums[3] and sums[-2] == sums[2]


def test_normal_incidence_odd_sums_vanish():
    sums = lattice_sums(GratingConfig(k0=2.2, theta=0.0), p_max=3)
    assert abs(sums[1]) < 1e-12 and abs(sums[3]) < 1e-12


def test_imaginary_part_of_sigma0_is_the_radiation_sum():
    # Im(Sigma_0) + Im(H_0(0) self term) closes on the open orders:
    # Re(Sigma_0) = -1 + (2/d) sum_prop 1/beta_n.
    cfg = GratingConfig(k0=9.0, theta=0.35)
    s0 = lattice_sums(cfg, p_max=0)[0]
    n = cfg.orders
    beta = cfg.beta(n)
    prop = beta.imag == 0
    assert s0.real == pytest.approx(-1 + 2 / cfg.d * np.sum(1 / beta[prop].real), abs=1e-9)


def test_graf_addition_reproduces_the_toeplitz_convention():
    # Lattice Green function minus the self image, expanded about the origin,
    # has the coefficients Sigma_n of the matrix rows.
    cfg = GratingConfig(k0=2.3, theta=0.25)
    sums = lattice_sums(cfg, p_max=16, accel=AccelSpec(tol=1e-12))
    for x, y in [(0.12, 0.2), (-0.25, 0.1), (0.05, -0.3)]:
        r, phi = math.hypot(x, y), math.atan2(y, x)
        expansion = sum(sums[n] * sp.jv(n, cfg.k0 * r) * np.exp(1j * n * phi) for n in range(-16, 17))
        lhs = greens_spatial(cfg, x, y) - sp.hankel1(0, cfg.k0 * r)
        assert abs(lhs - expansion) < 1e-9


def test_sigma_matrix_structure():
    cfg = GratingConfig(k0=2.0, theta=0.3, n_multipole=1)
    sums = lattice_sums(cfg)
    mat = sigma_matrix(cfg, sums)
    s0, s1, s2 = sums[0], sums[1], sums[2]
    expected = np.array([[s0, -s1, s2], [s1, s0, -s1], [s2, s1, s0]])
    assert np.array_equal(mat, expected)


def test_sigma_matrix_missing_orders():
    cfg = GratingConfig(k0=2.0, n_multipole=2)
    with pytest.raises(KeyError):
        sigma_matrix(cfg, LatticeSums({0: 1.0, 1: 0.0}))


@pytest.mark.parametrize("p", [0, 1, 2])
def test_asymptotic_ladder(p):
    errs = []
    for ratio in (0.1, 0.05, 0.02):
        cfg = GratingConfig(k0=2 * math.pi * ratio, theta=0.3)
        ref = sigma_p_direct(cfg, p).value
        errs.append(abs(sigma_p_asymptotic(cfg, p) - ref) / abs(ref))
    assert errs[0] < 0.05
    assert errs[0] > errs[1] > errs[2]


def test_asymptotic_regime_warning_and_limits():
    with pytest.warns(RegimeWarning):
        sigma_p_asymptotic(GratingConfig(k0=3.0), 0)
    with pytest.raises(DomainError):
        sigma_p_asymptotic(GratingConfig(k0=0.1), 3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sums = lattice_sums(GratingConfig(k0=3.0), method="asymptotic")
    assert sums.method == "asymptotic" and set(sums.sigma) == {0, 1, 2}
    with pytest.raises(ValueError):
        lattice_sums(GratingConfig(k0=3.0), method="magic")


@given(x=st.floats(-2.0, 2.0), y=st.floats(0.1, 1.0), sign=st.sampled_from([-1.0, 1.0]))
def test_green_identity_property(x, y, sign):
    cfg = GratingConfig(k0=3.3, theta=-0.2)
    a, b = greens_spatial(cfg, x, sign * y), greens_spectral(cfg, x, sign * y)
    assert abs(a - b) < 1e-8


def test_green_quasi_periodicity():
    cfg = GratingConfig(k0=2.7, theta=0.5)
    g0 = greens_spectral(cfg, 0.3, 0.4)
    g1 = greens_spectral(cfg, 0.3 + cfg.d, 0.4)
    assert abs(g1 - np.exp(1j * cfg.alpha0 * cfg.d) * g0) < 1e-12


def test_green_singular_points():
    cfg = GratingConfig(k0=2.0)
    with pytest.raises(LatticePointError):
        greens_spatial(cfg, 2.0, 0.0)
    with pytest.raises(DomainError):
        greens_spectral(cfg, 0.3, 0.0)
    # on the line but between scatterers the image sum is fine
    assert np.isfinite(greens_spatial(cfg, 0.5, 0.0))


def test_lattice_sums_record_errors():
    sums = lattice_sums(GratingConfig(k0=2.0, theta=0.1))
    assert sums.tail_terms > 0 and max(sums.errors.values()) < 1e-8
    assert sums.p_max == 2


def test_asymptotic_normal_incidence_values():
    cfg = GratingConfig(k0=0.2 * math.pi)
    assert sigma_p_asymptotic(cfg, 1) == 0
    expected = (-1 - 2j / math.pi * 0.5772156649015329
                + 2j / math.pi * math.log(2 * cfg.K / cfg.k0) + cfg.K / (math.pi * cfg.k0))
    assert sigma_p_asymptotic(cfg, 0) == pytest.approx(expected, abs=1e-14)


def test_sigma_matrix_scalar_and_toeplitz():
    sums = LatticeSums({p: complex(p + 1, -p) for p in range(7)})
    assert sigma_matrix(GratingConfig(k0=1.0, n_multipole=0), sums).tolist() == [[1 + 0j]]
    mat = sigma_matrix(GratingConfig(k0=1.0, n_multipole=3), sums)
    for p in range(7):
        for q in range(7):
            assert mat[p, q] == sums[p - q]

"""Quasi-periodic lattice sums for a line of scatterers at (m*d, 0).

The Bloch phase convention is ``exp(1j * alpha0 * m * d)`` throughout, and
the order-p sum is

    Sigma_p = sum_{m != 0} exp(1j*alpha0*m*d) * sign(m)**p * H_p(k0*|m|*d).
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .accel import AccelSpec, SeriesResult, oscillatory_sum
from .errors import DomainError, LatticePointError, RegimeWarning, WoodAnomaly
from .specfun import EULER_GAMMA, beta_branch, hankel1


@dataclass(frozen=True)
class GratingConfig:
    """Physical scene: wavenumber, incidence angle, period and truncations.

    ``alpha0`` defaults to ``k0*sin(theta)``. It may be given explicitly only
    as ``k0*sin(theta) + j*K`` for an integer j (a different representative
    of the same Bloch class). ``n_orders`` (Fourier truncation N, orders
    -N..N) defaults to ``max(8, 2 * number of propagating orders)``.

    Construction fails with :class:`WoodAnomaly` if any diffraction order
    grazes the surface.
    """

    k0: float
    theta: float = 0.0
    d: float = 1.0
    n_orders: int = None
    n_multipole: int = 1
    alpha0: float = None
    wood_tol: float = 1e-12

    def __post_init__(self):
        if not (math.isfinite(self.k0) and self.k0 > 0):
            raise DomainError(f"k0 must be positive and finite, got {self.k0!r}")
        if not (math.isfinite(self.d) and self.d > 0):
            raise DomainError(f"period d must be positive and finite, got {self.d!r}")
        if not abs(self.theta) < math.pi / 2:
            raise DomainError(f"|theta| must be below pi/2, got {self.theta!r}")
        if self.n_multipole < 0:
            raise DomainError("n_multipole must be non-negative")
        physical = self.k0 * math.sin(self.theta)
        if self.alpha0 is None:
            object.__setattr__(self, "alpha0", physical)
        else:
            shift = (self.alpha0 - physical) / self.K
            if abs(shift - round(shift)) > 1e-9:
                raise DomainError("alpha0 must equal k0*sin(theta) modulo K")
        self._check_wood()
        if self.n_orders is None:
            object.__setattr__(self, "n_orders", max(8, 2 * self.n_propagative))
        elif self.n_orders < 0:
            raise DomainError("n_orders must be non-negative")

    def _check_wood(self):
        lo = math.floor((-self.k0 - self.alpha0) / self.K) - 1
        hi = math.ceil((self.k0 - self.alpha0) / self.K) + 1
        for n in range(lo, hi + 1):
            try:
                beta_branch(self.k0, self.alpha0 + n * self.K, rel_tol=self.wood_tol)
            except WoodAnomaly as exc:
                raise WoodAnomaly(
                    f"Wood anomaly: order {n} grazes (alpha_{n} = {self.alpha0 + n * self.K!r}, "
                    f"k0 = {self.k0!r})",
                    order=n,
                ) from exc

    @property
    def K(self):
        return 2.0 * math.pi / self.d

    @property
    def wavelength(self):
        return 2.0 * math.pi / self.k0

    @property
    def orders(self):
        return np.arange(-self.n_orders, self.n_orders + 1)

    def alpha(self, n):
        return self.alpha0 + np.asarray(n) * self.K

    def beta(self, n):
        return beta_branch(self.k0, self.alpha(n), rel_tol=self.wood_tol)

    @property
    def beta0(self):
        return self.beta(0)

    @property
    def n_propagative(self):
        lo = math.floor((-self.k0 - self.alpha0) / self.K) - 1
        hi = math.ceil((self.k0 - self.alpha0) / self.K) + 1
        n = np.arange(lo, hi + 1)
        return int(np.count_nonzero(self.alpha(n) ** 2 < self.k0 ** 2))


@dataclass(frozen=True)
class LatticeSums:
    """Sigma_p for p >= 0; negative orders follow Sigma_{-p} = (-1)^p Sigma_p."""

    sigma: dict
    method: str = "direct"
    tail_terms: int = 0
    errors: dict = field(default_factory=dict)

    def __getitem__(self, p):
        if p < 0:
            return (-1) ** (-p) * self.sigma[-p]
        return self.sigma[p]

    @property
    def p_max(self):
        return max(self.sigma)


def sigma_p_direct(cfg, p, accel=None):
    """Sigma_p by direct summation with Shanks-accelerated tails.

    Positive and negative m are summed as two one-sided series whose phase
    advances per term are ``(k0 +/- alpha0) d``.

    Returns:
        SeriesResult with the value, the summed error estimate of both
        tails and the total number of lattice terms used.
    """
    accel = accel or AccelSpec()
    kd, ad = cfg.k0 * cfg.d, cfg.alpha0 * cfg.d
    sign_left = -1.0 if p % 2 else 1.0

    def right(m):
        return hankel1(p, kd * m) * np.exp(1j * ad * m)

    def left(m):
        return sign_left * hankel1(p, kd * m) * np.exp(-1j * ad * m)

    r = oscillatory_sum(right, kd + ad, accel)
    l = oscillatory_sum(left, kd - ad, accel)
    return SeriesResult(r.value + l.value, r.error + l.error, r.terms + l.terms)


def sigma_p_asymptotic(cfg, p):
    """Small-period closed forms for Sigma_0, Sigma_1, Sigma_2.

    Valid for k0*d << 1; a :class:`RegimeWarning` is issued when
    ``k0*d >= 1``.
    """
    if p not in (0, 1, 2):
        raise DomainError("closed forms exist for p in {0, 1, 2} only")
    if cfg.k0 * cfg.d >= 1.0:
        warnings.warn(f"k0*d = {cfg.k0 * cfg.d:.3g} is outside the small-period regime",
                      RegimeWarning, stacklevel=2)
    k, a, K = cfg.k0, cfg.alpha0, cfg.K
    b = cfg.beta0
    if p == 0:
        return (-1.0 - 2j / math.pi * EULER_GAMMA + 2j / math.pi * math.log(2.0 * K / k)
                + K / (math.pi * b))
    if p == 1:
        return a / (math.pi * k) * (-2.0 + 1j * K / b)
    return (K / (math.pi * k * k) * (b * b - a * a) / b
            - 1j / (math.pi * k * k) * (K * K / 3.0 - b * b + a * a))


def lattice_sums(cfg, p_max=None, method="direct", accel=None):
    """Sigma_0 .. Sigma_{p_max}; ``p_max`` defaults to ``2 * n_multipole``."""
    p_max = 2 * cfg.n_multipole if p_max is None else p_max
    sigma, errors, terms = {}, {}, 0
    if method == "direct":
        for p in range(p_max + 1):
            res = sigma_p_direct(cfg, p, accel)
            sigma[p], errors[p] = res.value, res.error
            terms += res.terms
    elif method == "asymptotic":
        if p_max > 2:
            raise DomainError("asymptotic lattice sums are available up to p = 2")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            sigma = {p: sigma_p_asymptotic(cfg, p) for p in range(p_max + 1)}
    else:
        raise ValueError(f"unknown method {method!r}")
    return LatticeSums(sigma=sigma, method=method, tail_terms=terms, errors=errors)


def sigma_matrix(cfg, sums):
    """Toeplitz interaction matrix, entry (p, q) = Sigma_{p-q}, p, q = -N..N.

    Rows index the order of the regular wave arriving at the reference
    scatterer, columns the order of the outgoing wave of its copies.
    """
    n = cfg.n_multipole
    missing = [p for p in range(2 * n + 1) if p not in sums.sigma]
    if missing:
        raise KeyError(f"lattice sums missing for p = {missing}")
    idx = np.arange(-n, n + 1)
    diff = idx[:, None] - idx[None, :]
    out = np.empty(diff.shape, dtype=complex)
    for p in range(-2 * n, 2 * n + 1):
        out[diff == p] = sums[p]
    return out


def greens_spectral(cfg, x, y, tol=1e-17):
    """Plane-wave form (2/d) sum_n exp(i(alpha_n x + beta_n |y|)) / beta_n."""
    if y == 0:
        raise DomainError("the spectral series needs |y| > 0")
    ay = abs(y)
    reach = (-math.log(tol) / ay + cfg.k0 + abs(cfg.alpha0)) / cfg.K + 2
    n_max = int(math.ceil(reach))
    if n_max > 10_000_000:
        raise DomainError(f"|y| = {ay!r} too small for the spectral series")
    n = np.arange(-n_max, n_max + 1)
    beta = cfg.beta(n)
    terms = np.exp(1j * (cfg.alpha(n) * x + beta * ay)) / beta
    order = np.argsort(np.abs(terms))
    return complex(2.0 / cfg.d * np.sum(terms[order]))


def greens_spatial(cfg, x, y, accel=None):
    """Image sum sum_m H_0(k0 |r - m d e_x|) exp(i alpha0 m d).

    The central images are summed directly; both tails are accelerated.
    ``accel.max_terms`` caps the number of images per tail.
    """
    accel = accel or AccelSpec()
    d, k = cfg.d, cfg.k0
    nearest = round(x / d)
    if y == 0 and abs(x - nearest * d) <= 1e-12 * d:
        raise LatticePointError(f"({x!r}, {y!r}) coincides with scatterer {nearest}")

    def term(m):
        rho = np.hypot(x - m * d, y)
        return hankel1(0, k * rho) * np.exp(1j * cfg.alpha0 * m * d)

    mc = int(math.ceil(abs(x) / d + abs(y) / d)) + 2
    central = np.arange(-mc, mc + 1)
    value = np.sum(term(central))
    right = oscillatory_sum(lambda j: term(mc + j), (k + cfg.alpha0) * d, accel)
    left = oscillatory_sum(lambda j: term(-mc - j), (k - cfg.alpha0) * d, accel)
    return complex(value + right.value + left.value)


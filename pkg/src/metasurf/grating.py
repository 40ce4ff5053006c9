"""Diffraction orders, Rayleigh field and energy audit of the resonator line.

The field scattered by the array is the lattice sum of the multipole fields
b_n H_n^(1)(k0 r) exp(i n theta). Expanding it in plane waves gives, for
y > 0 (reflection) and y < 0 (transmission),

    r_n = K/(pi beta_n) * (Pz - (kappa+_n x M) / k0)
    t_n = delta_n0 + K/(pi beta_n) * (Pz - (kappa-_n x M) / k0)

with kappa+-_n = (alpha_n, +-beta_n), M = (Mx, My) as in
:class:`~metasurf.scatter.DipoleMoments` and ``a x b = a_x b_y - a_y b_x``.
The magnetic terms therefore carry a factor 1/k0 and couple through the
cross product with the wave vector.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import hankel1_orders


def fmt(value):
    """Fixed, platform-independent float rendering (17 significant digits)."""
    return format(float(value), ".16e")


def rt_coefficients(cfg, moments, n):
    """Reflection and transmission amplitudes for integer order(s) ``n``."""
    n = np.asarray(n)
    alpha = cfg.alpha(n)
    beta = cfg.beta(n)
    Pz, Mx, My = moments.Pz, moments.Mx, moments.My
    pref = cfg.K / (math.pi * beta)
    r = pref * (Pz + (beta * Mx - alpha * My) / cfg.k0)
    t = (n == 0) + pref * (Pz - (beta * Mx + alpha * My) / cfg.k0)
    return r, t


@dataclass(frozen=True)
class OrderTable:
    """Per-order data for n = -N..N; immutable after construction."""

    cfg: object
    moments: object
    n: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    r: np.ndarray
    t: np.ndarray

    @property
    def propagative(self):
        return (self.beta.imag == 0) & (self.beta.real > 0)

    @property
    def propagative_orders(self):
        return self.n[self.propagative]

    @property
    def evanescent_orders(self):
        return self.n[~self.propagative]

    @property
    def kappa_plus(self):
        return np.stack([self.alpha + 0j, self.beta], axis=-1)

    @property
    def kappa_minus(self):
        return np.stack([self.alpha + 0j, -self.beta], axis=-1)

    def row(self, n):
        i = int(n + self.cfg.n_orders)
        if not 0 <= i < self.n.size:
            raise IndexError(f"order {n} outside the table")
        return i

    def to_csv(self, fh=None):
        out = fh or io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["n", "alpha_n", "beta_re", "beta_im", "propagative",
                    "r_re", "r_im", "t_re", "t_im"])
        for i, n in enumerate(self.n):
            w.writerow([int(n), fmt(self.alpha[i]), fmt(self.beta[i].real), fmt(self.beta[i].imag),
                        int(self.propagative[i]), fmt(self.r[i].real), fmt(self.r[i].imag),
                        fmt(self.t[i].real), fmt(self.t[i].imag)])
        return out.getvalue() if fh is None else None

    def as_dict(self):
        return {
            "n": self.n.tolist(),
            "alpha_n": self.alpha.tolist(),
            "beta_n": [[b.real, b.imag] for b in self.beta],
            "propagative": self.propagative.tolist(),
            "r_n": [[z.real, z.imag] for z in self.r],
            "t_n": [[z.real, z.imag] for z in self.t],
        }


def order_table(cfg, moments, n_orders=None):
    n_orders = cfg.n_orders if n_orders is None else n_orders
    n = np.arange(-n_orders, n_orders + 1)
    r, t = rt_coefficients(cfg, moments, n)
    for arr in (r, t):
        arr.setflags(write=False)
    return OrderTable(cfg=cfg, moments=moments, n=n, alpha=cfg.alpha(n), beta=cfg.beta(n), r=r, t=t)


def field_eval(cfg, table, x, y, tol=1e-14):
    """Total field from the Rayleigh expansion at a point off the line y = 0.

    Evanescent orders are added (beyond the table if needed) until the
    next term falls below ``tol``.
    """
    if y == 0:
        raise DomainError("the plane-wave series is singular on y = 0; use surface traces instead")
    ay = abs(y)
    bound = max(1.0, float(np.max(np.abs(table.r))), float(np.max(np.abs(table.t))))
    reach = (math.log(bound / tol) / ay + cfg.k0 + abs(cfg.alpha0)) / cfg.K + 2
    n_max = max(int(math.ceil(reach)), int(table.n.max()))
    n = np.arange(-n_max, n_max + 1)
    r, t = rt_coefficients(cfg, table.moments, n)
    alpha, beta = cfg.alpha(n), cfg.beta(n)
    if y > 0:
        terms = r * np.exp(1j * (alpha * x + beta * y))
        incident = np.exp(1j * (cfg.alpha0 * x - cfg.beta0 * y))
    else:
        terms = t * np.exp(1j * (alpha * x - beta * y))
        incident = 0.0
    order = np.argsort(np.abs(terms))
    return complex(incident + np.sum(terms[order]))


def energy_balance(table):
    """Signed deficit 1 - sum over propagating orders of (beta_n/beta0)(|r_n|^2 + |t_n|^2).

    Zero for a lossless scatterer, positive when power is absorbed.
    """
    prop = table.propagative
    beta0 = table.beta[table.row(0)].real
    flux = table.beta[prop].real / beta0 * (np.abs(table.r[prop]) ** 2 + np.abs(table.t[prop]) ** 2)
    return float(1.0 - np.sum(flux))


def rt_tail_limit(cfg, moments, side=1):
    """Limits of (r_n, t_n) as n -> +infinity (``side=1``) or -infinity (``side=-1``).

    For n -> +inf they are (K m / (pi k0), -K m* / (pi k0)); for n -> -inf
    the roles of m and m* swap.
    """
    scale = cfg.K / (math.pi * cfg.k0)
    if side > 0:
        return scale * moments.m, -scale * moments.m_star
    return scale * moments.m_star, -scale * moments.m


def _flat_top(t, flat=0.3):
    """C-infinity window: 1 on |t| <= flat, 0 on |t| >= 1."""
    t = np.abs(t)
    s = np.clip((t - flat) / (1.0 - flat), 0.0, 1.0)

    def bump(u):
        safe = np.where(u > 0, u, 1.0)
        return np.where(u > 0, np.exp(-1.0 / safe), 0.0)

    return bump(1.0 - s) / (bump(1.0 - s) + bump(s))


def direct_field(cfg, moments, x, y, n_scatterers=10_000):
    """Scattered field by summing the multipole fields of individual rods.

    Uses ``n_scatterers`` rods centred on the origin with a smooth flat-top
    truncation window, which suppresses the truncation error of the slowly
    decaying, oscillating image series. Independent of the plane-wave route.
    """
    half = n_scatterers // 2
    m = np.arange(-half, half + 1)
    dx = x - m * cfg.d
    rho = np.hypot(dx, y)
    if np.any(rho == 0):
        raise DomainError("evaluation point coincides with a scatterer")
    ang = np.arctan2(y, dx)
    nm = moments.n_multipole
    H = hankel1_orders(nm, cfg.k0 * rho)
    local = moments.coeff(0) * H[0]
    for q in range(1, nm + 1):
        neg = (-1.0) ** q * H[q]
        local = local + moments.coeff(q) * H[q] * np.exp(1j * q * ang)
        local = local + moments.coeff(-q) * neg * np.exp(-1j * q * ang)
    weights = _flat_top(m / (half + 1))
    return complex(np.sum(weights * np.exp(1j * cfg.alpha0 * m * cfg.d) * local))

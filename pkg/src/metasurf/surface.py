"""Effective metasurface: impedance operators, Calderon projectors, transfer.

All operators act on quasi-periodic functions through their Fourier
coefficients u_n of exp(i alpha_n x), n = -N..N, and are diagonal in that
basis. Only coefficients are ever manipulated on the line y = 0; the
pointwise series there (a Dirac comb for the field jump) never converge.

Trace conventions: a :class:`TraceVector` stores the one-sided traces
(U, dU/dy) at y = 0+ (``side="top"``) or y = 0- (``side="bottom"``).
The jump-decomposition vectors are F+ = top traces and F- = -(bottom
traces), so that F = F+ + F- is the jump across the surface.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateJump, DomainError, RegimeError
from .grating import fmt

_ZERO = 1e-15


@dataclass(frozen=True)
class DiagonalOperator:
    """Fourier multiplier u_n -> symbol[n] * u_n.

    ``domain_weight`` and ``codomain_weight`` are the Sobolev exponents t of
    the spaces H^t the operator is meant to map between.
    """

    symbol: np.ndarray
    orders: np.ndarray
    domain_weight: float = 0.0
    codomain_weight: float = 0.0
    name: str = ""

    def __post_init__(self):
        sym = np.array(self.symbol, dtype=complex)
        if sym.shape != np.shape(self.orders):
            raise DomainError("symbol and orders must have the same shape")
        sym.setflags(write=False)
        object.__setattr__(self, "symbol", sym)

    def __call__(self, u):
        return self.symbol * np.asarray(u)

    def __matmul__(self, other):
        if not np.array_equal(self.orders, other.orders):
            raise DomainError("operators live on different truncations")
        return DiagonalOperator(self.symbol * other.symbol, self.orders, other.domain_weight,
                                self.codomain_weight, f"{self.name}{other.name}")

    def inverse(self):
        if np.any(self.symbol == 0):
            raise DomainError(f"operator {self.name or '?'} has a zero symbol")
        return DiagonalOperator(1.0 / self.symbol, self.orders, self.codomain_weight,
                                self.domain_weight, f"inv({self.name})")

    def __getitem__(self, n):
        return complex(self.symbol[int(n - self.orders[0])])


def impedance_Z(cfg, s=2.0):
    """Z: u_n -> i beta_n u_n, continuous from H^{-s/2} to H^{-s/2-1}."""
    n = cfg.orders
    return DiagonalOperator(1j * cfg.beta(n), n, -s / 2.0, -s / 2.0 - 1.0, "Z")


def admittance_Y(cfg, s=2.0):
    """Y = Z^{-1}: u_n -> u_n / (i beta_n)."""
    n = cfg.orders
    return DiagonalOperator(1.0 / (1j * cfg.beta(n)), n, -s / 2.0 - 1.0, -s / 2.0, "Y")


def sobolev_norm(u, s, alpha):
    """(sum_n (1 + alpha_n^2)^{s/2} |u_n|^2)^{1/2}, the H^{s/2} norm.

    Negative ``s`` gives the dual-space norms.
    """
    u = np.asarray(u)
    alpha = np.asarray(alpha, dtype=float)
    return float(np.sqrt(np.sum((1.0 + alpha * alpha) ** (s / 2.0) * np.abs(u) ** 2)))


def _as_symbol(block, size):
    if isinstance(block, DiagonalOperator):
        return block.symbol
    arr = np.asarray(block, dtype=complex)
    if arr.ndim == 0:
        return np.full(size, complex(arr))
    return arr


@dataclass(frozen=True)
class BlockOperator2x2:
    """[[a, b], [c, d]] with diagonal blocks (stored as symbol arrays)."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    orders: np.ndarray

    @classmethod
    def from_blocks(cls, a, b, c, d, orders):
        size = len(orders)
        return cls(*(_as_symbol(x, size) for x in (a, b, c, d)), orders=np.asarray(orders))

    def apply(self, u, du):
        u, du = np.asarray(u), np.asarray(du)
        return self.a * u + self.b * du, self.c * u + self.d * du

    def __matmul__(self, o):
        return BlockOperator2x2(
            self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d, self.orders,
        )

    def __add__(self, o):
        return BlockOperator2x2(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d, self.orders)

    def __sub__(self, o):
        return BlockOperator2x2(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d, self.orders)

    def restrict(self, n):
        i = int(n - self.orders[0])
        return np.array([[self.a[i], self.b[i]], [self.c[i], self.d[i]]])

    def to_dense(self):
        return np.block([[np.diag(self.a), np.diag(self.b)], [np.diag(self.c), np.diag(self.d)]])


@dataclass(frozen=True)
class TraceVector:
    """One-sided traces (U, dU/dy) at y = 0+ (top) or y = 0- (bottom)."""

    u: np.ndarray
    du: np.ndarray
    side: str = "top"

    def __post_init__(self):
        if self.side not in ("top", "bottom"):
            raise ValueError(f"side must be 'top' or 'bottom', got {self.side!r}")

    def signed(self):
        """The jump-decomposition vector: F+ for top, F- = -(traces) for bottom."""
        sgn = 1.0 if self.side == "top" else -1.0
        return sgn * np.asarray(self.u), sgn * np.asarray(self.du)

    def stacked(self):
        return np.concatenate([self.u, self.du])


def jump(top, bottom):
    """F = F+ + F-: coefficients of [U] and [dU/dy] across the surface."""
    fu, fdu = top.signed()
    gu, gdu = bottom.signed()
    return fu + gu, fdu + gdu


def surface_traces(cfg, table, field="total"):
    """Top and bottom traces built from the order table's r_n, t_n.

    ``field="total"`` includes the incident wave exp(i(alpha0 x - beta0 y));
    ``field="scattered"`` keeps only the radiated part (an outgoing solution
    on each side, the setting of the Calderon projectors).
    """
    delta = (table.n == 0).astype(float)
    ib = 1j * table.beta
    if field == "total":
        top = TraceVector(delta + table.r, ib * (table.r - delta), "top")
        bottom = TraceVector(table.t.copy(), -ib * table.t, "bottom")
    elif field == "scattered":
        top = TraceVector(table.r.copy(), ib * table.r, "top")
        bottom = TraceVector(table.t - delta, -ib * (table.t - delta), "bottom")
    else:
        raise ValueError(f"field must be 'total' or 'scattered', got {field!r}")
    return top, bottom


def calderon_projectors(cfg):
    """(P+, P-) = (1/2 [[1, Y], [Z, 1]], 1/2 [[1, -Y], [-Z, 1]])."""
    Z, Y = impedance_Z(cfg), admittance_Y(cfg)
    n = cfg.orders
    plus = BlockOperator2x2.from_blocks(0.5, 0.5 * Y.symbol, 0.5 * Z.symbol, 0.5, n)
    minus = BlockOperator2x2.from_blocks(0.5, -0.5 * Y.symbol, -0.5 * Z.symbol, 0.5, n)
    return plus, minus


def _ratio(num, den, what):
    out = np.zeros(num.shape, dtype=complex)
    small = np.abs(den) <= _ZERO
    bad = small & (np.abs(num) > _ZERO)
    if np.any(bad):
        raise DegenerateJump(f"{what}: vanishing denominator at a nonzero jump")
    out[~small] = num[~small] / den[~small]
    return out


def jump_operators(cfg, table, moments=None):
    """Per-solution jump operators (X, W) on L^2.

    With J_n = delta_n0 + r_n - t_n (field jump) and D_n = r_n + t_n - delta_n0
    (derivative jump divided by i beta_n):

        X: symbol D_n / (delta_n0 + r_n)      so that  Z X U(0+)   = [dU/dy]
        W: symbol J_n / (r_n - delta_n0)      so that  Y W dU(0+)  = [U]

    For n != 0 these are 1 + t_n/r_n and J/r_n. W is the zero operator when
    the field is continuous (J = 0, no Mx moment).
    """
    delta = (table.n == 0).astype(float)
    r, t = table.r, table.t
    field_jump = delta + r - t
    deriv_jump = r + t - delta
    x_sym = _ratio(deriv_jump, delta + r, "X")
    if np.all(np.abs(field_jump) <= _ZERO):
        w_sym = np.zeros_like(field_jump)
    else:
        w_sym = _ratio(field_jump, r - delta, "W")
    n = table.n
    return DiagonalOperator(x_sym, n, 0.0, 0.0, "X"), DiagonalOperator(w_sym, n, 0.0, 0.0, "W")


def transfer_operator(cfg, X, W):
    """T = [[1, -Y W], [-Z X, 1]]."""
    Z, Y = impedance_Z(cfg), admittance_Y(cfg)
    return BlockOperator2x2.from_blocks(1.0, -(Y @ W).symbol, -(Z @ X).symbol, 1.0, cfg.orders)


def transfer_apply(T, top):
    """Map top traces (U, dU/dy)(0+) to bottom traces (U, dU/dy)(0-).

    In the signed jump convention this is T F+ = -F-.
    """
    if top.side != "top":
        raise ValueError("transfer_apply expects top-side traces")
    u, du = T.apply(top.u, top.du)
    return TraceVector(u, du, "bottom")


def homogenized_transfer(cfg, b00):
    """Single-order transfer matrix [[1, 0], [-2i beta0 r/(1+r), 1]], r = 2 b00/(d beta0).

    Raises:
        RegimeError: if the wavelength is below 2d or a diffracted order
            propagates.
    """
    if cfg.wavelength < 2.0 * cfg.d or cfg.n_propagative != 1:
        raise RegimeError(
            f"homogenised limit needs lambda >= 2d and a single propagating order "
            f"(lambda/d = {cfg.wavelength / cfg.d:.4g}, {cfg.n_propagative} orders)"
        )
    beta0 = cfg.beta0.real
    r = 2.0 * b00 / (cfg.d * beta0)
    return np.array([[1.0, 0.0], [-2j * beta0 * r / (1.0 + r), 1.0]], dtype=complex)


def operators_csv(operators, fh=None):
    """CSV with one (re, im) column pair per operator symbol."""
    ops = list(operators)
    orders = ops[0].orders
    out = fh or io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    header = ["n"]
    for op in ops:
        header += [f"{op.name}_re", f"{op.name}_im"]
    w.writerow(header)
    for i, n in enumerate(orders):
        row = [int(n)]
        for op in ops:
            row += [fmt(op.symbol[i].real), fmt(op.symbol[i].imag)]
        w.writerow(row)
    return out.getvalue() if fh is None else None


def sobolev_ratio_bound(cfg):
    """sup_n |beta_n| / sqrt(1 + alpha_n^2): the H^{-1} -> H^{-2} norm of Z on the truncation."""
    n = cfg.orders
    return float(np.max(np.abs(cfg.beta(n)) / np.sqrt(1.0 + cfg.alpha(n) ** 2)))


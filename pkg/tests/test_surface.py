import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metasurf.errors import DegenerateJump, DomainError, RegimeError, WoodAnomaly
from metasurf.grating import order_table, rt_tail_limit
from metasurf.lattice import GratingConfig
from metasurf.pipeline import solve
from metasurf.scatter import DipoleMoments, dipole, monopole
from metasurf.surface import (BlockOperator2x2, DiagonalOperator, TraceVector, admittance_Y,
                              calderon_projectors, homogenized_transfer, impedance_Z, jump,
                              jump_operators, operators_csv, sobolev_norm, sobolev_ratio_bound,
                              surface_traces, transfer_apply, transfer_operator)
from metasurf.validation import transfer_defect, transfer_grid


def random_vector(rng, size):
    return rng.normal(size=size) + 1j * rng.normal(size=size)


class TestImpedance:
    cfg = GratingConfig(k0=5.0, theta=0.3, n_orders=64)

    def test_symbols(self):
        Z = impedance_Z(self.cfg)
        beta = self.cfg.beta(self.cfg.orders)
        prop = beta.imag == 0
        assert np.all(Z.symbol[prop].real == 0) and np.all(Z.symbol[prop].imag > 0)
        assert np.all(Z.symbol[~prop].imag == 0) and np.all(Z.symbol[~prop].real < 0)
        assert Z[2] == 1j * self.cfg.beta(2)

    def test_inverse_pair(self, rng):
        Z, Y = impedance_Z(self.cfg), admittance_Y(self.cfg)
        u = random_vector(rng, self.cfg.orders.size)
        assert np.max(np.abs(Y(Z(u)) - u) / np.abs(u)) < 1e-14
        assert np.max(np.abs((Y @ Z).symbol - 1)) < 1e-14
        assert np.max(np.abs(Z.inverse().symbol - Y.symbol)) < 1e-14 * np.max(np.abs(Y.symbol))
        assert (Y @ Z).domain_weight == Z.domain_weight

    def test_zero_symbol_has_no_inverse(self):
        op = DiagonalOperator(np.array([1.0, 0.0, 2.0]), np.arange(-1, 2))
        with pytest.raises(DomainError):
            op.inverse()
        with pytest.raises(DomainError):
            DiagonalOperator(np.ones(3), np.arange(-2, 3))

    def test_sobolev_mapping_bound(self, rng):
        # ||Z u||_{-2} <= C ||u||_{-1}; the sup over basis vectors is the norm
        cfg, Z = self.cfg, impedance_Z(self.cfg)
        alpha = cfg.alpha(cfg.orders)
        C = sobolev_ratio_bound(cfg)
        assert C <= max(1.0, cfg.k0)
        beta = np.abs(cfg.beta(cfg.orders))
        high = np.abs(alpha) > 2 * cfg.k0
        assert np.all(beta[high] / np.sqrt(1 + alpha[high] ** 2) < 1)
        for _ in range(20):
            u = random_vector(rng, alpha.size)
            ratio = sobolev_norm(Z(u), -4, alpha) / sobolev_norm(u, -2, alpha)
            assert ratio <= C * (1 + 1e-12)
        basis = [sobolev_norm(Z(e), -4, alpha) / sobolev_norm(e, -2, alpha) for e in np.eye(alpha.size)]
        assert max(basis) == pytest.approx(C, rel=1e-12)

    def test_wood_anomaly_blocks_construction(self):
        with pytest.raises(WoodAnomaly):
            impedance_Z(GratingConfig(k0=2 * math.pi))


class TestSobolev:
    alpha = np.array([-3.5, -1.2, 0.4, 2.0])

    def test_l2(self):
        u = np.array([1, 2j, -1, 0.5])
        assert sobolev_norm(u, 0, self.alpha) == pytest.approx(np.linalg.norm(u))

    def test_basis_vector(self):
        e = np.eye(4)[1]
        assert sobolev_norm(e, 3, self.alpha) == pytest.approx((1 + 1.2 ** 2) ** 0.75)

    @given(s1=st.floats(-4, 4), s2=st.floats(-4, 4))
    def test_monotone_in_s_for_large_frequencies(self, s1, s2):
        alpha = np.array([-3.0, 1.0, 2.5])
        u = np.array([0.3, 1j, -2.0])
        lo, hi = sorted((s1, s2))
        assert sobolev_norm(u, lo, alpha) <= sobolev_norm(u, hi, alpha) * (1 + 1e-15)


class TestProjectors:
    @pytest.mark.parametrize("N", [4, 16, 64])
    def test_algebra(self, rng, N):
        cfg = GratingConfig(k0=3.0, theta=-0.25, n_orders=N)
        plus, minus = calderon_projectors(cfg)
        size = 2 * (2 * N + 1)
        assert np.array_equal((plus + minus).to_dense(), np.eye(size))
        assert np.max(np.abs((plus @ plus - plus).to_dense())) < 1e-12
        assert np.max(np.abs((minus @ minus - minus).to_dense())) < 1e-12
        assert np.max(np.abs((plus @ minus).to_dense())) < 1e-12
        assert np.max(np.abs((minus @ plus).to_dense())) < 1e-12
        u, du = random_vector(rng, 2 * N + 1), random_vector(rng, 2 * N + 1)
        pu, pdu = plus.apply(u, du)
        ppu, ppdu = plus.apply(pu, pdu)
        assert np.max(np.abs(np.concatenate([ppu - pu, ppdu - pdu]))) < 1e-12 * np.max(np.abs(pu))

    @pytest.mark.parametrize("family", [lambda: monopole(1.1, 1), lambda: dipole(0.7, 2.1)])
    def test_projectors_split_a_radiating_jump(self, family):
        cfg = GratingConfig(k0=4.0, theta=0.3)
        sol = solve(cfg, family())
        top, bottom = surface_traces(cfg, sol.table, "scattered")
        F = jump(top, bottom)
        plus, minus = calderon_projectors(cfg)
        fp = np.concatenate(top.signed())
        fm = np.concatenate(bottom.signed())
        assert np.linalg.norm(np.concatenate(plus.apply(*F)) - fp) < 1e-10 * np.linalg.norm(fp)
        assert np.linalg.norm(np.concatenate(minus.apply(*F)) - fm) < 1e-10 * np.linalg.norm(fm)

    def test_block_restrict_and_dense(self):
        cfg = GratingConfig(k0=1.0, n_orders=2)
        plus, _ = calderon_projectors(cfg)
        blk = plus.restrict(0)
        assert blk[0, 0] == 0.5 and blk[1, 0] == 0.5j * cfg.beta0
        assert plus.to_dense().shape == (10, 10)
        ident = BlockOperator2x2.from_blocks(1.0, 0.0, 0.0, 1.0, cfg.orders)
        assert np.array_equal(ident.to_dense(), np.eye(10))


class TestTraces:
    def test_side_validation(self):
        with pytest.raises(ValueError):
            TraceVector(np.zeros(3), np.zeros(3), "left")

    def test_jump_decomposition(self, dipole_solution):
        cfg, table = dipole_solution.cfg, dipole_solution.table
        top, bottom = surface_traces(cfg, table)
        fu, fdu = jump(top, bottom)
        assert np.allclose(fu, top.u - bottom.u) and np.allclose(fdu, top.du - bottom.du)
        with pytest.raises(ValueError):
            surface_traces(cfg, table, "incident")

    def test_field_jump_is_carried_by_mx(self, dipole_solution):
        cfg, sol = dipole_solution.cfg, dipole_solution
        top, bottom = surface_traces(cfg, sol.table)
        fu, _ = jump(top, bottom)
        expected = 2 * cfg.K * sol.moments.Mx / (math.pi * cfg.k0)
        assert np.max(np.abs(fu - expected)) < 1e-12


class TestJumpOperators:
    def test_electric_only(self, monopole_solution):
        cfg, table = monopole_solution.cfg, monopole_solution.table
        X, W = jump_operators(cfg, table)
        assert np.all(W.symbol == 0)
        n = table.n != 0
        assert np.allclose(X.symbol[n], 2.0, atol=1e-14)
        r0 = table.r[table.row(0)]
        assert X[0] == pytest.approx(2 * r0 / (1 + r0), abs=1e-14)

    def test_no_scatterer(self):
        cfg = GratingConfig(k0=2.0, theta=0.1)
        table = order_table(cfg, DipoleMoments([0, 0, 0]))
        X, W = jump_operators(cfg, table)
        assert np.all(X.symbol == 0) and np.all(W.symbol == 0)
        T = transfer_operator(cfg, X, W)
        top, bottom = surface_traces(cfg, table)
        out = transfer_apply(T, top)
        assert np.allclose(out.u, bottom.u) and np.allclose(out.du, bottom.du)

    def test_degenerate_jump(self):
        cfg = GratingConfig(k0=2.0, theta=0.1)
        # force r_1 = 0 while the derivative jump at n = 1 stays finite
        table = order_table(cfg, DipoleMoments([0.25, 0, 0.25]))
        object.__setattr__(table, "r", np.where(table.n == 1, 0, table.r))
        with pytest.raises(DegenerateJump):
            jump_operators(cfg, table)

    def test_symbols_bounded_with_tail_limits(self):
        cfg = GratingConfig(k0=2.0, theta=0.35, n_orders=100)
        sol = solve(cfg, dipole(3.3, 1.8))
        X, W = jump_operators(cfg, sol.table)
        for op in (X, W):
            mod = np.abs(op.symbol)
            assert mod.min() > 1e-8 and mod.max() < 1e8
        m, ms = sol.moments.m, sol.moments.m_star
        assert X[100] == pytest.approx(1 - ms / m, rel=5e-3)
        assert W[100] == pytest.approx(1 + ms / m, rel=5e-3)
        assert X[-100] == pytest.approx(1 - m / ms, rel=5e-3)
        r_lim, _ = rt_tail_limit(cfg, sol.moments, 1)
        assert r_lim == pytest.approx(cfg.K * m / (math.pi * cfg.k0))


def test_transfer_maps_top_to_bottom_on_grid():
    worst = max(transfer_defect(cfg, s) for cfg, s in transfer_grid())
    assert worst < 1e-9


def test_transfer_apply_requires_top_traces(dipole_solution):
    cfg, table = dipole_solution.cfg, dipole_solution.table
    X, W = jump_operators(cfg, table)
    _, bottom = surface_traces(cfg, table)
    with pytest.raises(ValueError):
        transfer_apply(transfer_operator(cfg, X, W), bottom)


@pytest.mark.parametrize("k0,theta,phase", [(0.5, 0.3, 1.3), (2.0, -0.2, 4.0), (3.0, 0.0, 0.2)])
def test_homogenized_limit(k0, theta, phase):
    cfg = GratingConfig(k0=k0, theta=theta, n_multipole=0)
    sol = solve(cfg, monopole(phase))
    T = transfer_operator(cfg, *jump_operators(cfg, sol.table))
    hom = homogenized_transfer(cfg, sol.moments.Pz)
    assert np.max(np.abs(T.restrict(0) - hom)) < 1e-10
    i = sol.table.row(0)
    assert abs(sol.table.t[i] - 1 - sol.table.r[i]) < 1e-14


def test_homogenized_identity_and_regime():
    cfg = GratingConfig(k0=0.5)
    assert np.array_equal(homogenized_transfer(cfg, 0.0), np.eye(2))
    with pytest.raises(RegimeError):
        homogenized_transfer(GratingConfig(k0=4.0), 0.1)
    # a single open order is not enough once lambda < 2d
    cfg = GratingConfig(k0=3.5)
    assert cfg.n_propagative == 1
    with pytest.raises(RegimeError):
        homogenized_transfer(cfg, 0.1)


def test_operator_csv(dipole_solution):
    cfg, table = dipole_solution.cfg, dipole_solution.table
    X, W = jump_operators(cfg, table)
    text = operators_csv([impedance_Z(cfg), X, W])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["n", "Z_re", "Z_im", "X_re", "X_im", "W_re", "W_im"]
    assert len(rows) == cfg.orders.size + 1
    assert float(rows[1][3]) == X.symbol[0].real

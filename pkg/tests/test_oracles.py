"""Tests for the inequality checks, norm-equivalence machinery, and the
tangential-energy differential inequality."""

import numpy as np
import pytest

from mhdslab.fields import Field, VectorField
from mhdslab.grid import Parity, make_grid
from mhdslab.initdata import make_initial_state, random_solenoidal
from mhdslab.oracles import (
    check_anisotropic,
    check_differential_inequality,
    check_equivalence,
    check_hls,
    check_pressure,
    ensemble_equivalence,
    ensemble_max_ratio,
    random_scalar,
)
from mhdslab.solver import ModelVariant, run


def _separable_mode(grid, amplitude=1.0):
    X1, X2, X3 = grid.meshgrid()
    return Field.from_physical(amplitude * np.sin(X1) * np.sin(X2) * np.sin(X3),
                               Parity.ODD, grid)


class TestAnisotropic:
    def test_a1_closed_form(self, grid16):
        # f = g = h = sin(x1) sin(x2) sin(x3) on the (2 pi)^3 box:
        # lhs = (8/3)^3, every rhs factor = pi^(3/4), product = pi^(9/2)
        f = _separable_mode(grid16)
        chk = check_anisotropic("a1", f, f, f, quad_factor=8)
        lhs_exact = (8.0 / 3.0) ** 3
        rhs_exact = np.pi ** 4.5
        assert abs(chk.lhs - lhs_exact) < 1e-6 * lhs_exact
        assert abs(chk.rhs_core - rhs_exact) < 1e-10 * rhs_exact
        assert np.isfinite(chk.ratio)

    def test_a3_closed_form(self, grid16):
        # ||f g||_2 = (int sin^4)^{3/2} = (3 pi / 4)^{3/2}; rhs factors give pi^3
        f = _separable_mode(grid16)
        chk = check_anisotropic("a3", f, f)
        lhs_exact = (3.0 * np.pi / 4.0) ** 1.5
        rhs_exact = np.pi**3
        assert abs(chk.lhs - lhs_exact) < 1e-10 * lhs_exact
        assert abs(chk.rhs_core - rhs_exact) < 1e-10 * rhs_exact

    def test_zero_fields_degenerate(self, grid16):
        z = Field.zeros(Parity.EVEN, grid16)
        chk = check_anisotropic("a1", z, z, z, quad_factor=1)
        assert chk.degenerate
        assert np.isnan(chk.ratio)

    @pytest.mark.parametrize("name", ["a2", "a4", "a5", "a9"])
    def test_ratio_finite_on_random_fields(self, grid16, rng, name):
        fields = {"a2": 3, "a4": 1, "a5": 1, "a9": 1}[name]
        args = [random_scalar(grid16, rng) for _ in range(fields)]
        chk = check_anisotropic(name, *args, quad_factor=2)
        assert not chk.degenerate
        assert np.isfinite(chk.ratio) and chk.ratio > 0

    def test_cross_seed_stability_small_ensemble(self, grid16):
        r0 = ensemble_max_ratio("a1", grid16, 30, seed=0)
        r1 = ensemble_max_ratio("a1", grid16, 30, seed=1)
        assert max(r0, r1) <= 2.0 * min(r0, r1)

    def test_unknown_name_rejected(self, grid16):
        with pytest.raises(ValueError):
            check_anisotropic("a7", Field.zeros(Parity.EVEN, grid16))


class TestHls:
    def test_single_mode_multiplier_one(self, grid16):
        # |k_ang| = 1 mode: Lambda^{-a} acts as identity, so per-slice
        # lhs = ||f||_{L2(R^2)} and the ratio is ||f||_2 / ||f||_p
        X1, _, _ = grid16.meshgrid()
        f = Field.from_physical(np.sin(X1), Parity.EVEN, grid16)
        alpha = 0.95
        chk = check_hls(f, alpha)
        p = 2.0 / (1.0 + alpha)
        area = grid16.L1 * grid16.L2
        x1 = grid16.x1
        l2 = np.sqrt(np.sum(np.sin(x1) ** 2) / grid16.n1 * grid16.L1 * grid16.L2)
        lp = (np.sum(np.abs(np.sin(x1)) ** p) / grid16.n1 * area) ** (1.0 / p)
        assert abs(chk.ratio - l2 / lp) < 1e-10 * (l2 / lp)

    def test_alpha_out_of_range(self, grid16):
        f = Field.zeros(Parity.EVEN, grid16)
        with pytest.raises(ValueError):
            check_hls(f, 1.5)

    def test_requires_zero_horizontal_mean(self, grid16):
        f = Field.from_physical(np.full(grid16.shape, 1.0), Parity.EVEN, grid16)
        with pytest.raises(ValueError):
            check_hls(f, 0.5)

    def test_ensemble_stability(self, grid16):
        r0 = ensemble_max_ratio("a16", grid16, 30, seed=0)
        r1 = ensemble_max_ratio("a16", grid16, 30, seed=5)
        assert max(r0, r1) <= 2.0 * min(r0, r1)


class TestPressure:
    def test_zero_state_degenerate(self, grid16):
        u = VectorField.zeros(grid16)
        chk = check_pressure(u, None, m=3)
        assert chk.degenerate

    def test_shear_flow_has_no_pressure(self, grid16):
        _, X2, _ = grid16.meshgrid()
        u = VectorField.from_physical([0.5 * np.sin(X2), 0 * X2, 0 * X2], grid16)
        chk = check_pressure(u, None, m=3)
        # F = -u.grad u = 0 exactly for the shear flow
        assert chk.degenerate or chk.lhs < 1e-13

    def test_random_ensemble_ratio_finite(self, grid16):
        r0 = ensemble_max_ratio("a15", grid16, 20, seed=0)
        r1 = ensemble_max_ratio("a15", grid16, 20, seed=3)
        assert np.isfinite(r0) and np.isfinite(r1)
        assert max(r0, r1) <= 2.0 * min(r0, r1)

    def test_needs_m_at_least_two(self, grid16):
        with pytest.raises(ValueError):
            check_pressure(VectorField.zeros(grid16), None, m=1)


class TestEquivalence:
    def test_zero_degenerate(self, grid16):
        equiv, rels = check_equivalence(VectorField.zeros(grid16), 3)
        assert equiv.degenerate and rels.degenerate

    def test_pointwise_relations_exact(self, grid16, rng):
        u = random_solenoidal(grid16, rng)
        _, rels = check_equivalence(u, 3)
        assert rels.ratio < 1e-12

    def test_closed_form_small_case(self, grid16):
        # u = (0, A sin x1 cos x3, 0), m = 1: every piece is computable by
        # hand plus one 1D midpoint quadrature for the Z3 term.
        A = 0.7
        X1, _, X3 = grid16.meshgrid()
        u = VectorField.from_physical([0 * X1, A * np.sin(X1) * np.cos(X3), 0 * X1],
                                      grid16)
        equiv, _ = check_equivalence(u, 1)
        base = 2.0 * np.pi**3 * A**2  # ||u||^2 = ||d1 u||^2 = ||d3 u||^2 = ||w1||^2
        x3 = grid16.x3
        phi2 = (x3 / (1.0 + x3)) ** 2
        # ||Z3 u||^2 = A^2 * pi * 2pi * midpoint-quadrature of phi^2 sin^2
        q = np.sum(phi2 * np.sin(x3) ** 2) * (grid16.L3 / grid16.n3)
        z3 = A**2 * np.pi * 2.0 * np.pi * q
        lhs_exact = (2.0 * base + z3) + base
        rhs_exact = 2.0 * base + base
        assert abs(equiv.lhs - lhs_exact) < 1e-10 * lhs_exact
        assert abs(equiv.rhs_core - rhs_exact) < 1e-10 * rhs_exact

    def test_ensemble_bounds_stable(self, grid16):
        lo0, hi0 = ensemble_equivalence(grid16, 25, seed=0)
        lo1, hi1 = ensemble_equivalence(grid16, 25, seed=9)
        assert lo0 > 0 and np.isfinite(hi0)
        assert max(hi0, hi1) <= 2.0 * min(hi0, hi1)
        assert max(lo0, lo1) <= 2.0 * min(lo0, lo1)


class TestDifferentialInequality:
    def test_zero_trajectory(self):
        from mhdslab.conormal import DiagSample

        samples = [DiagSample(t=0.1 * i, eps=1e-2, variant="ns_viscous")
                   for i in range(5)]
        res = check_differential_inequality(samples)
        assert np.all(res == 0.0)

    def test_linear_regime_residual_nonpositive(self, grid16):
        st = make_initial_state(grid16, ModelVariant.ns(1e-2), seed=21,
                                amplitude=1e-4)
        res = run(st, T=0.5, dt=2e-3, diag_every=25, check_cfl=False)
        resid = check_differential_inequality(res.samples)
        scale = max(smp.dh_u_tan2 + smp.dh_w_tan2 for smp in res.samples)
        assert np.max(resid) <= 1e-8 * scale

    def test_needs_three_samples(self):
        from mhdslab.conormal import DiagSample

        with pytest.raises(ValueError):
            check_differential_inequality([DiagSample(t=0, eps=0, variant="ns_limit")])

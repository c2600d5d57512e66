"""Tests for conormal vector fields, tangential/conormal norms, the fractional
horizontal operator, and the energy-functional assembly."""

import numpy as np
import pytest

from mhdslab.conormal import (
    DiagSample,
    conormal_Z,
    energy_report,
    interpolation_ratio,
    lambda_h,
    multi_indices,
    norm_co,
    norm_co2,
    norm_co2_reference,
    norm_tan,
    norm_tan2,
    phi_default,
    sigma_from_s,
    weighted_dissipation,
)
from mhdslab.fields import Field, VectorField
from mhdslab.grid import Parity, evaluate_at_x3, make_grid
from mhdslab.initdata import random_solenoidal


class TestConormalZ:
    def test_z1_is_horizontal_derivative(self, grid16):
        X1, _, _ = grid16.meshgrid()
        f = Field.from_physical(np.sin(X1), Parity.EVEN, grid16)
        z = conormal_Z(f, 1)
        assert np.abs(z.physical() - np.cos(X1)).max() < 1e-12

    def test_z3_matches_weighted_derivative(self, grid16):
        # f = sin(pi x3/L3): Z3 f = phi * (pi/L3) cos(pi x3/L3); compare away
        # from the artificial top wall where the sine re-encoding truncates.
        _, _, X3 = grid16.meshgrid()
        f = Field.from_physical(np.sin(np.pi * X3 / grid16.L3), Parity.ODD, grid16)
        z = conormal_Z(f, 3)
        expected = (X3 / (1.0 + X3)) * (np.pi / grid16.L3) * np.cos(np.pi * X3 / grid16.L3)
        interior = X3 < 0.5 * grid16.L3
        err = np.abs(z.physical() - expected)[interior].max()
        assert err < 0.05

    def test_z3_of_coordinate_function(self):
        # f(x3) = x3 sampled in the Even basis (whose |x3| extension keeps the
        # truncated derivative pointwise-convergent): Z3 f tracks
        # phi(x3) = x3/(1+x3) in the interior.
        g = make_grid(8, 8, 64, 2 * np.pi, 2 * np.pi, 2 * np.pi)
        _, _, X3 = g.meshgrid()
        f = Field.from_physical(X3, Parity.EVEN, g).dealiased()
        z = conormal_Z(f, 3)
        phi = X3 / (1.0 + X3)
        interior = (X3 > 0.1 * g.L3) & (X3 < 0.5 * g.L3)
        err = np.abs(z.physical() - phi)[interior].max()
        assert err < 0.05 * phi[interior].max()

    def test_z3_vanishes_at_wall_odd(self, grid16, rng):
        f = Field.from_physical(rng.standard_normal(grid16.shape), Parity.ODD, grid16)
        z = conormal_Z(f.dealiased(), 3)
        assert z.parity is Parity.ODD
        vals = evaluate_at_x3(z.coeffs, z.parity, grid16, np.array([0.0]))
        assert np.abs(vals).max() < 1e-10

    def test_z3_even_keeps_parity_small_wall_value(self, grid16, rng):
        # Even-stored Z3 f has no structural zero at the wall; the value there
        # reflects phi(0) = 0 only through the O(h^2)-small first samples.
        f = Field.from_physical(rng.standard_normal(grid16.shape), Parity.EVEN, grid16)
        z = conormal_Z(f.dealiased(), 3)
        assert z.parity is Parity.EVEN
        vals = evaluate_at_x3(z.coeffs, z.parity, grid16, np.array([0.0]))
        h = grid16.L3 / grid16.n3
        from mhdslab.fields import derivative

        scale = derivative(f, 3).l2()
        assert np.abs(vals).max() < 5.0 * h * scale


class TestNorms:
    def test_multi_index_count(self):
        assert len(multi_indices(3)) == 20

    def test_zero_field(self, grid16):
        assert norm_co(Field.zeros(Parity.EVEN, grid16), 3) == 0.0

    def test_single_horizontal_mode_m1(self, grid16):
        # x3-independent mode A sin(x1), |k_ang| = 1: two terms, (1 + 1) A^2 vol/2
        A = 0.8
        X1, _, _ = grid16.meshgrid()
        f = Field.from_physical(A * np.sin(X1), Parity.EVEN, grid16)
        vol = grid16.volume
        expect = (1.0 + 1.0) * A**2 * vol / 2.0
        assert abs(norm_tan2(f, 1) - expect) < 1e-10 * expect
        # no vertical structure: Z3 f = 0, so co norm equals tan norm
        assert abs(norm_co2(f, 1) - expect) < 1e-10 * expect

    def test_dual_implementation(self, grid16, rng):
        v = random_solenoidal(grid16, rng)
        for f in v.components():
            a = norm_co2(f, 3)
            b = norm_co2_reference(f, 3)
            assert abs(a - b) < 1e-10 * max(a, 1e-30)

    def test_norm_chain(self, grid16, rng):
        v = random_solenoidal(grid16, rng)
        prev_tan, prev_co = 0.0, 0.0
        for m in range(4):
            t, c = norm_tan(v, m), norm_co(v, m)
            assert t <= c * (1.0 + 1e-12)
            assert t >= prev_tan and c >= prev_co
            prev_tan, prev_co = t, c


class TestLambda:
    def test_unit_wavenumber_multiplier(self, grid16):
        X1, _, _ = grid16.meshgrid()
        f = Field.from_physical(np.cos(X1), Parity.EVEN, grid16)
        out = lambda_h(f, -0.95)
        assert abs(out.l2() - f.l2()) < 1e-12 * f.l2()

    def test_index_two_multiplier(self, grid16):
        X1, _, _ = grid16.meshgrid()
        f = Field.from_physical(np.cos(2 * X1), Parity.EVEN, grid16)
        out = lambda_h(f, -0.95)
        assert abs(out.l2() - 2.0 ** (-0.95) * f.l2()) < 1e-12 * f.l2()

    def test_roundtrip(self, grid16, rng):
        f = Field.from_physical(rng.standard_normal(grid16.shape), Parity.ODD, grid16)
        c = f.coeffs.copy()
        c[0, 0, :] = 0.0
        f = Field(c, f.parity, f.grid)
        back = lambda_h(lambda_h(f, 0.95), -0.95)
        assert np.abs(back.coeffs - f.coeffs).max() < 1e-12

    def test_rejects_nonzero_mean(self, grid16):
        vals = np.full(grid16.shape, 1.0)
        f = Field.from_physical(vals, Parity.EVEN, grid16)
        with pytest.raises(ValueError):
            lambda_h(f, -0.5)

    def test_multiplier_nonnegative_radial(self, grid16, rng):
        f = Field.from_physical(rng.standard_normal(grid16.shape), Parity.EVEN, grid16)
        out = lambda_h(f, 0.5)
        kh = np.sqrt(grid16.kh2)
        assert np.allclose(out.coeffs, f.coeffs * kh**0.5)


class TestSigma:
    def test_endpoint_is_identity(self):
        s = 13.0 / 14.0 + 1e-13
        assert abs(sigma_from_s(s) - s) < 1e-10

    def test_reference_value(self):
        assert abs(sigma_from_s(0.95) - (0.95 - 0.3 / 6.3)) < 1e-12

    @pytest.mark.parametrize("bad", [0.5, 13.0 / 14.0, 1.0, 1.2])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            sigma_from_s(bad)


def _dissipation_sample(t, eps, A, vol, kz=1.0):
    """Analytic diagnostics of the decaying mode u = A e^{-eps t} cos(x3)."""
    amp2 = A**2 * np.exp(-2.0 * eps * t) * vol / 2.0
    smp = DiagSample(t=t, eps=eps, variant="mhd_viscous")
    smp.tan_m_u = np.sqrt(amp2)
    smp.l2_u = np.sqrt(amp2)
    smp.d3_tan2 = kz**2 * amp2
    smp.d3_u_tan2 = kz**2 * amp2
    return smp


class TestEnergyReport:
    def test_zero_trajectory(self):
        samples = [DiagSample(t=float(t), eps=1e-2, variant="mhd_viscous") for t in range(3)]
        reports = energy_report(samples, 3, 0.95)
        assert all(r.E == 0.0 and r.G == 0.0 and r.X == 0.0 for r in reports)

    def test_single_sample_is_sup_only(self):
        smp = DiagSample(t=0.0, eps=1e-2, variant="mhd_viscous", tan_m_u=2.0)
        rep = energy_report([smp], 3, 0.95)[0]
        assert rep.E1 == 4.0
        assert rep.e1_int_h == 0.0 and rep.e1_int_3 == 0.0

    def test_pure_dissipation_closed_form(self):
        # E1(T) = A^2 v (1 + (1 - e^{-2 eps T})) for u = A cos(x3) decaying at
        # rate eps; trapezoid integration converges to the closed form.
        A, eps, vol = 0.5, 1e-2, (2 * np.pi) ** 3
        ts = np.linspace(0.0, 2.0, 401)
        samples = [_dissipation_sample(t, eps, A, vol) for t in ts]
        rep = energy_report(samples, 3, 0.95)[-1]
        v2 = A**2 * vol / 2.0
        closed = v2 * (1.0 + (1.0 - np.exp(-2.0 * eps * 2.0)))
        assert abs(rep.E1 - closed) < 1e-6 * closed

    def test_non_monotone_times_rejected(self):
        samples = [DiagSample(t=0.0, eps=0.0, variant="ns_limit"),
                   DiagSample(t=0.0, eps=0.0, variant="ns_limit")]
        with pytest.raises(ValueError):
            energy_report(samples, 3, 0.95)


class TestWeightedDissipation:
    def test_zero_trajectory(self):
        samples = [DiagSample(t=float(t), eps=1e-2, variant="ns_viscous") for t in range(5)]
        out = weighted_dissipation(samples, 0.9)
        assert out["horizontal"] == 0.0 and out["vertical_eps"] == 0.0

    def test_constant_integrand_weight(self):
        # integrand 1 with weight (1+t)^sigma integrates to ((1+T)^{1+s}-1)/(1+s)
        sigma = sigma_from_s(0.95)
        ts = np.linspace(0.0, 3.0, 601)
        samples = []
        for t in ts:
            smp = DiagSample(t=float(t), eps=1e-2, variant="ns_viscous")
            smp.dh_u_tan2 = 1.0
            samples.append(smp)
        out = weighted_dissipation(samples, sigma)
        closed = ((1.0 + 3.0) ** (sigma + 1.0) - 1.0) / (sigma + 1.0)
        assert abs(out["horizontal"] - closed) < 1e-4 * closed


def test_interpolation_constant_stable_along_trajectory(grid16, rng):
    # the tangential interpolation bound holds with one constant per run:
    # the per-sample ratios stay within a fixed band along a trajectory
    from mhdslab.initdata import make_initial_state
    from mhdslab.solver import ModelVariant, run

    st = make_initial_state(grid16, ModelVariant.ns(1e-2), seed=31, amplitude=1e-2)
    res = run(st, T=1.0, dt=5e-3, diag_every=20, check_cfl=False)
    ratios = [interpolation_ratio(smp, 0.95) for smp in res.samples]
    assert all(np.isfinite(c) and c > 0 for c in ratios)
    assert max(ratios) <= 4.0 * min(ratios)

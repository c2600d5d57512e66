"""Tests for the RHS assembly and the integrating-factor RK4 stepper."""

import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from mhdslab.fields import Field, VectorField
from mhdslab.grid import Parity, make_grid
from mhdslab.initdata import make_initial_state
from mhdslab.solver import (
    BlowUpError,
    MhdState,
    ModelVariant,
    energy_identity_residual,
    rhs,
    run,
    solenoidality,
    step,
    vorticity_residual,
)


class TestVariants:
    def test_limit_requires_zero_eps(self):
        with pytest.raises(ValueError):
            ModelVariant("mhd_limit", 0.5)

    def test_viscous_requires_eps_in_unit_interval(self):
        for bad in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                ModelVariant("ns_viscous", bad)

    def test_magnetic_flag(self):
        assert ModelVariant.mhd(0.1).has_magnetic
        assert not ModelVariant.ns_limit().has_magnetic

    def test_mhd_state_requires_B(self, grid16):
        with pytest.raises(ValueError):
            MhdState(u=VectorField.zeros(grid16), B=None, t=0.0,
                     variant=ModelVariant.mhd(0.1))


def _single_mode_state(grid, eps, kx_idx, kz_idx, u0, B0):
    """Transverse j=2 mode: all nonlinear terms vanish identically."""
    uc = np.zeros(grid.kshape, complex)
    Bc = np.zeros(grid.kshape, complex)
    uc[kx_idx, 0, kz_idx] = u0
    Bc[kx_idx, 0, kz_idx] = B0
    u = VectorField(Field.zeros(Parity.EVEN, grid),
                    Field(uc, Parity.EVEN, grid),
                    Field.zeros(Parity.ODD, grid))
    B = VectorField(Field.zeros(Parity.EVEN, grid),
                    Field(Bc, Parity.EVEN, grid),
                    Field.zeros(Parity.ODD, grid))
    variant = ModelVariant.mhd(eps) if eps > 0 else ModelVariant.mhd_limit()
    return MhdState(u=u, B=B, t=0.0, variant=variant)


class TestRhs:
    def test_zero_state(self, grid16):
        st = MhdState(u=VectorField.zeros(grid16), B=VectorField.zeros(grid16),
                      t=0.0, variant=ModelVariant.mhd(1e-2))
        du, dB = rhs(st)
        assert du.l2() == 0.0 and dB.l2() == 0.0

    def test_shear_eigenfunction(self, grid16):
        # u = (A cos x3, 0, 0), B = 0: only the eps d3^2 term acts
        _, _, X3 = grid16.meshgrid()
        A, eps = 0.3, 1e-2
        u = VectorField.from_physical([A * np.cos(X3), 0 * X3, 0 * X3], grid16)
        st = MhdState(u=u, B=VectorField.zeros(grid16), t=0.0,
                      variant=ModelVariant.mhd(eps))
        du, dB = rhs(st)
        assert np.abs(du.c1.physical() + eps * A * np.cos(X3)).max() < 1e-12
        assert du.c2.l2() < 1e-14 and du.c3.l2() < 1e-14 and dB.l2() < 1e-14

    def test_linearized_mode_matrix(self, grid16):
        # tendency of (u2, B2) at mode k=(1,0,0) is [[-1, i], [i, -eps]]
        eps = 1e-2
        st = _single_mode_state(grid16, eps, 1, 0, 1.0, 0.0)
        du, dB = rhs(st)
        assert abs(du.c2.coeffs[1, 0, 0] - (-1.0)) < 1e-13
        assert abs(dB.c2.coeffs[1, 0, 0] - 1j) < 1e-13
        st = _single_mode_state(grid16, eps, 1, 0, 0.0, 1.0)
        du, dB = rhs(st)
        assert abs(du.c2.coeffs[1, 0, 0] - 1j) < 1e-13
        assert abs(dB.c2.coeffs[1, 0, 0] - (-eps)) < 1e-13

    def test_nonfinite_faults(self, grid16):
        u = VectorField.zeros(grid16)
        u.c1.coeffs[0, 0, 0] = np.nan
        st = MhdState(u=u, B=None, t=0.0, variant=ModelVariant.ns(1e-2))
        with pytest.raises(BlowUpError):
            rhs(st)


class TestStep:
    def test_zero_state_fixed(self, grid16):
        st = MhdState(u=VectorField.zeros(grid16), B=None, t=0.0,
                      variant=ModelVariant.ns(1e-2))
        out = step(st, 0.1)
        assert out.u.l2() == 0.0 and out.t == pytest.approx(0.1)

    def test_pure_dissipation_exact(self, grid16):
        # integrating factor handles the diagonal part exactly
        _, _, X3 = grid16.meshgrid()
        A, eps, T = 0.4, 1e-2, 1.0
        u = VectorField.from_physical([A * np.cos(X3), 0 * X3, 0 * X3], grid16)
        st = MhdState(u=u, B=VectorField.zeros(grid16), t=0.0,
                      variant=ModelVariant.mhd(eps))
        for _ in range(10):
            st = step(st, T / 10, check_cfl=False)
        expect = u.l2() * np.exp(-eps * T)
        assert abs(st.u.l2() - expect) < 1e-10 * expect

    @pytest.mark.parametrize("eps,kz_idx", [(1e-2, 0), (1e-2, 2), (0.0, 2)])
    def test_alfven_mode_matches_matrix_exponential(self, grid8, eps, kz_idx):
        u0, B0 = 2e-3, 1e-3 + 1e-3j
        st = _single_mode_state(grid8, eps, 1, kz_idx, u0, B0)
        T, dt = 1.0, 1e-3
        for _ in range(int(T / dt)):
            st = step(st, dt, check_cfl=False)
        kz = kz_idx * np.pi / grid8.L3
        M = np.array([[-(1.0 + eps * kz**2), 1j],
                      [1j, -(kz**2 + eps)]])
        expect = expm(M * T) @ np.array([u0, B0])
        got = np.array([st.u.c2.coeffs[1, 0, kz_idx], st.B.c2.coeffs[1, 0, kz_idx]])
        assert np.abs(got - expect).max() < 1e-6 * np.abs(expect).max()

    def test_fourth_order_self_convergence(self, grid8):
        st0 = make_initial_state(grid8, ModelVariant.mhd(1e-1), seed=3, amplitude=0.3)
        T = 0.4

        def solve(dt):
            s = st0.copy()
            for _ in range(int(round(T / dt))):
                s = step(s, dt, check_cfl=False)
            return s

        ref = solve(T / 64)
        errs = []
        for nsub in (4, 8, 16):
            s = solve(T / nsub)
            errs.append((s.u - ref.u).l2() + (s.B - ref.B).l2())
        orders = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
        assert min(orders) > 3.6, orders

    def test_cfl_warning(self, grid16):
        _, X2, _ = grid16.meshgrid()
        u = VectorField.from_physical([5.0 * np.sin(X2), 0 * X2, 0 * X2], grid16)
        st = MhdState(u=u, B=None, t=0.0, variant=ModelVariant.ns(1e-2))
        with pytest.warns(RuntimeWarning, match="CFL"):
            step(st, 1.0)

    def test_invalid_dt(self, grid16):
        st = MhdState(u=VectorField.zeros(grid16), B=None, t=0.0,
                      variant=ModelVariant.ns(1e-2))
        with pytest.raises(ValueError):
            step(st, -0.1)


class TestRun:
    def test_sampling_cadence(self, grid8):
        st = make_initial_state(grid8, ModelVariant.ns(1e-2), seed=0, amplitude=1e-3)
        res = run(st, T=10 * 1e-2, dt=1e-2, diag_every=5)
        assert [round(s.t, 10) for s in res.samples] == [0.0, 0.05, 0.1]

    def test_shear_exact_decay(self, grid16):
        _, X2, _ = grid16.meshgrid()
        A = 0.2
        u = VectorField.from_physical([A * np.sin(X2), 0 * X2, 0 * X2], grid16)
        st = MhdState(u=u, B=None, t=0.0, variant=ModelVariant.ns(1e-2))
        res = run(st, T=2.0, dt=1e-2, diag_every=100)
        expect = u.l2() * np.exp(-2.0)
        assert abs(res.final.u.l2() - expect) < 1e-8 * expect

    def test_energy_identity_small_run(self, grid16):
        st = make_initial_state(grid16, ModelVariant.mhd(1e-2), seed=5, amplitude=1e-2)
        res = run(st, T=0.3, dt=1e-3, diag_every=50, check_cfl=False)
        assert energy_identity_residual(res.samples) < 1e-6

    def test_solenoidality_and_parity_preserved(self, grid8):
        st = make_initial_state(grid8, ModelVariant.mhd(1e-2), seed=6, amplitude=5e-2)
        res = run(st, T=10.0, dt=1e-3, diag_every=10000, check_cfl=False)
        assert solenoidality(res.final) < 1e-10
        assert res.final.u.parities == st.u.parities
        # odd components still vanish on the walls after 10^4 steps
        from mhdslab.grid import evaluate_at_x3

        c = res.final.u.c3
        vals = evaluate_at_x3(c.coeffs, c.parity, grid8, np.array([0.0, grid8.L3]))
        assert np.abs(vals).max() < 1e-13

    def test_epsilon_continuity(self, grid8):
        # fixed data and grid: sup-t difference from the eps=0 run shrinks
        # monotonically as eps decreases over a decade
        T, dt = 1.0, 5e-3
        ref = run(make_initial_state(grid8, ModelVariant.mhd_limit(), seed=7,
                                     amplitude=5e-2),
                  T=T, dt=dt, diag_every=20, collect_states=True)
        diffs = []
        for eps in (1e-1, 3e-2, 1e-2):
            res = run(make_initial_state(grid8, ModelVariant.mhd(eps), seed=7,
                                         amplitude=5e-2),
                      T=T, dt=dt, diag_every=20, collect_states=True)
            d = max((su.u - sr.u).l2() + (su.B - sr.B).l2()
                    for (_, sr), (_, su) in zip(ref.states, res.states))
            diffs.append(d)
        assert diffs[0] > diffs[1] > diffs[2]

    def test_bad_arguments(self, grid8):
        st = make_initial_state(grid8, ModelVariant.ns(1e-2), seed=0, amplitude=1e-3)
        with pytest.raises(ValueError):
            run(st, T=-1.0, dt=1e-2, diag_every=1)
        with pytest.raises(ValueError):
            run(st, T=1.0, dt=3e-1, diag_every=1)  # not an integer multiple

    def test_snapshot_persistence(self, grid8, tmp_path):
        from mhdslab.fields import read_snapshot

        st = make_initial_state(grid8, ModelVariant.mhd(1e-2), seed=4, amplitude=1e-3)
        run(st, T=0.04, dt=1e-2, diag_every=2, snapshot_dir=tmp_path)
        files = sorted(tmp_path.glob("snap_*.json"))
        assert len(files) == 3  # steps 0, 2, 4
        fields, header = read_snapshot(files[-1].with_suffix(""))
        assert header["time"] == pytest.approx(0.04)
        assert set(fields) == {"u", "B"}


class TestVorticityResidual:
    def test_zero_state(self, grid16):
        st = MhdState(u=VectorField.zeros(grid16), B=VectorField.zeros(grid16),
                      t=0.0, variant=ModelVariant.mhd(1e-2))
        assert vorticity_residual(st) == 0.0

    def test_ns_vorticity_system(self, grid16):
        st = make_initial_state(grid16, ModelVariant.ns(1e-2), seed=11, amplitude=1e-2)
        assert vorticity_residual(st) < 1e-8

    def test_mhd_vorticity_system(self, grid16):
        st = make_initial_state(grid16, ModelVariant.mhd(1e-2), seed=12, amplitude=1e-2)
        assert vorticity_residual(st) < 1e-8

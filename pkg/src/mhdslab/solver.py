"""Right-hand sides for the four model variants and an integrating-factor RK4
stepper.

The evolved system is the perturbation form around the background field
b0 = (1, 0, 0): the velocity carries horizontal dissipation plus a small
vertical piece eps*d3^2, the magnetic perturbation carries vertical diffusion
plus a small horizontal piece eps*Delta_h, and the background enters through
the skew linear pair (d1 B, d1 u).  Pressure never appears explicitly; the
Leray projection removes it.

Time stepping is classical four-stage Runge-Kutta conjugated by the exact
per-mode exponential of the diagonal dissipation (Lawson form), so pure
dissipation is integrated exactly and the explicit part only sees the
advection/coupling terms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .conormal import DiagSample, compute_diagnostics
from .fields import (
    Field,
    VectorField,
    curl,
    derivative,
    leray_project,
)
from .grid import Parity, SpectralGrid, dealias, forward, inverse

VARIANT_KINDS = ("mhd_viscous", "mhd_limit", "ns_viscous", "ns_limit")


class BlowUpError(RuntimeError):
    """Raised when the state develops non-finite coefficients."""


@dataclass(frozen=True)
class ModelVariant:
    """Which system is evolved and with what dissipation parameter."""

    kind: str
    eps: float

    def __post_init__(self):
        if self.kind not in VARIANT_KINDS:
            raise ValueError(f"unknown variant kind {self.kind!r}")
        if self.kind.endswith("limit"):
            if self.eps != 0.0:
                raise ValueError("limit variants have eps = 0")
        elif not (0.0 < self.eps < 1.0):
            raise ValueError(f"eps={self.eps} must lie in (0, 1) for viscous variants")

    @property
    def has_magnetic(self) -> bool:
        return self.kind.startswith("mhd")

    @classmethod
    def mhd(cls, eps: float) -> "ModelVariant":
        return cls("mhd_viscous", eps)

    @classmethod
    def mhd_limit(cls) -> "ModelVariant":
        return cls("mhd_limit", 0.0)

    @classmethod
    def ns(cls, eps: float) -> "ModelVariant":
        return cls("ns_viscous", eps)

    @classmethod
    def ns_limit(cls) -> "ModelVariant":
        return cls("ns_limit", 0.0)

    @classmethod
    def make(cls, kind: str, eps: float = 0.0) -> "ModelVariant":
        return cls(kind, 0.0 if kind.endswith("limit") else eps)


@dataclass
class MhdState:
    """Velocity/magnetic perturbation pair at one instant."""

    u: VectorField
    B: VectorField | None
    t: float
    variant: ModelVariant

    def __post_init__(self):
        if self.variant.has_magnetic and self.B is None:
            raise ValueError("MHD variants require a magnetic field")
        if not self.variant.has_magnetic:
            self.B = None

    @property
    def grid(self) -> SpectralGrid:
        return self.u.grid

    def copy(self) -> "MhdState":
        return MhdState(self.u.copy(), self.B.copy() if self.B is not None else None,
                        self.t, self.variant)

    def is_finite(self) -> bool:
        arrays = [c.coeffs for c in self.u.components()]
        if self.B is not None:
            arrays += [c.coeffs for c in self.B.components()]
        return all(np.all(np.isfinite(a)) for a in arrays)

    def max_abs(self) -> float:
        m = self.u.max_abs()
        if self.B is not None:
            m = max(m, self.B.max_abs())
        return m

    def energy_l2_sq(self) -> float:
        e = self.u.l2() ** 2
        if self.B is not None:
            e += self.B.l2() ** 2
        return e


def dissipation_rates(grid: SpectralGrid, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-mode decay rates: (kh^2 + eps kz^2) for u, (kz^2 + eps kh^2) for B."""
    kh2 = grid.kh2
    kz2 = grid.kz**2
    return kh2 + eps * kz2, kz2 + eps * kh2


def _grad_physical(v: VectorField) -> list[list[np.ndarray]]:
    """g[i][j] = physical samples of d_i v_j."""
    return [[derivative(c, ax).physical() for c in v.components()] for ax in (1, 2, 3)]


def _transport_from_samples(a_phys, grad, parities, grid) -> VectorField:
    """Assemble a . grad v from physical samples of a and of grad v, dealiased."""
    comps = []
    for j in range(3):
        acc = a_phys[0] * grad[0][j] + a_phys[1] * grad[1][j] + a_phys[2] * grad[2][j]
        comps.append(Field(dealias(forward(acc, parities[j], grid), grid), parities[j], grid))
    return VectorField(*comps)


def _field_stacks(v: VectorField, grid: SpectralGrid):
    """Coefficient stacks (value + all first derivatives) grouped by parity.

    Even stack: [v1, v2, d1 v1, d1 v2, d2 v1, d2 v2, d3 v3];
    odd stack:  [v3, d1 v3, d2 v3, d3 v1, d3 v2].
    """
    kx, ky, kz = grid.kx, grid.ky, grid.kz
    c1, c2, c3 = (c.coeffs for c in v.components())
    even = np.stack([c1, c2, 1j * kx * c1, 1j * kx * c2,
                     1j * ky * c1, 1j * ky * c2, kz * c3])
    odd = np.stack([c3, 1j * kx * c3, 1j * ky * c3, -kz * c1, -kz * c2])
    return even, odd


def _unpack_grad(e: np.ndarray, o: np.ndarray):
    """(values, grad) from the physical stacks of _field_stacks."""
    vals = (e[0], e[1], o[0])
    grad = [
        (e[2], e[3], o[1]),  # d1 v
        (e[4], e[5], o[2]),  # d2 v
        (o[3], o[4], e[6]),  # d3 v
    ]
    return vals, grad


def _dot_grad(a, grad):
    return tuple(
        a[0] * grad[0][j] + a[1] * grad[1][j] + a[2] * grad[2][j] for j in range(3)
    )


def _nonstiff(state: MhdState) -> tuple[VectorField, VectorField | None, float]:
    """Advection plus background coupling, Leray-projected for u; no dissipation.

    Transforms are batched per parity (one inverse and one forward pair per
    call).  Also returns max |(u, B)| for the CFL monitor, since the physical
    fields are in hand anyway.
    """
    u, B = state.u, state.B
    grid = state.grid
    mask = grid.dealias_mask

    ue, uo = _field_stacks(u, grid)
    if B is not None:
        be, bo = _field_stacks(B, grid)
        even_phys = inverse(np.concatenate([ue, be]), Parity.EVEN, grid)
        odd_phys = inverse(np.concatenate([uo, bo]), Parity.ODD, grid)
        u_vals, u_grad = _unpack_grad(even_phys[:7], odd_phys[:5])
        B_vals, B_grad = _unpack_grad(even_phys[7:], odd_phys[5:])
    else:
        even_phys = inverse(ue, Parity.EVEN, grid)
        odd_phys = inverse(uo, Parity.ODD, grid)
        u_vals, u_grad = _unpack_grad(even_phys, odd_phys)
        B_vals = B_grad = None

    maxabs = max(float(np.abs(u_vals[j]).max()) for j in range(3))

    adv_uu = _dot_grad(u_vals, u_grad)
    if B is None:
        even_out = forward(np.stack([adv_uu[0], adv_uu[1]]), Parity.EVEN, grid)
        odd_out = forward(np.stack([adv_uu[2]]), Parity.ODD, grid)
        even_out *= mask
        odd_out *= mask
        adv = VectorField(
            Field(even_out[0], Parity.EVEN, grid),
            Field(even_out[1], Parity.EVEN, grid),
            Field(odd_out[0], Parity.ODD, grid),
        )
        return leray_project(-1.0 * adv), None, maxabs

    maxabs = max(maxabs, max(float(np.abs(B_vals[j]).max()) for j in range(3)))
    adv_BB = _dot_grad(B_vals, B_grad)
    adv_uB = _dot_grad(u_vals, B_grad)
    adv_Bu = _dot_grad(B_vals, u_grad)

    even_out = forward(np.stack([
        adv_uu[0], adv_uu[1], adv_BB[0], adv_BB[1],
        adv_uB[0], adv_uB[1], adv_Bu[0], adv_Bu[1],
    ]), Parity.EVEN, grid)
    odd_out = forward(np.stack([adv_uu[2], adv_BB[2], adv_uB[2], adv_Bu[2]]),
                      Parity.ODD, grid)
    even_out *= mask
    odd_out *= mask

    def vec(i_even, i_odd):
        return VectorField(
            Field(even_out[2 * i_even], Parity.EVEN, grid),
            Field(even_out[2 * i_even + 1], Parity.EVEN, grid),
            Field(odd_out[i_odd], Parity.ODD, grid),
        )

    adv_uu_v, adv_BB_v, adv_uB_v, adv_Bu_v = (vec(i, i) for i in range(4))
    d1B = VectorField(*(derivative(c, 1) for c in B.components()))
    d1u = VectorField(*(derivative(c, 1) for c in u.components()))

    du = leray_project(adv_BB_v - adv_uu_v + d1B)
    dB = adv_Bu_v - adv_uB_v + d1u
    return du, dB, maxabs


def rhs(state: MhdState) -> tuple[VectorField, VectorField | None]:
    """Full tendency (d_t u, d_t B), dealiased, including diagonal dissipation."""
    if not state.is_finite():
        raise BlowUpError(f"non-finite coefficients at t={state.t}")
    du, dB, _ = _nonstiff(state)
    lam_u, lam_B = dissipation_rates(state.grid, state.variant.eps)
    du = VectorField(*(
        Field(c.coeffs - lam_u * f.coeffs, c.parity, state.grid)
        for c, f in zip(du.components(), state.u.components())
    ))
    if state.B is not None:
        dB = VectorField(*(
            Field(c.coeffs - lam_B * f.coeffs, c.parity, state.grid)
            for c, f in zip(dB.components(), state.B.components())
        ))
    return du, dB


def _scale(v: VectorField, mult: np.ndarray) -> VectorField:
    return VectorField(*(Field(c.coeffs * mult, c.parity, v.grid) for c in v.components()))


def _axpy(v: VectorField, w: VectorField, a: float) -> VectorField:
    return VectorField(*(
        Field(cv.coeffs + a * cw.coeffs, cv.parity, v.grid)
        for cv, cw in zip(v.components(), w.components())
    ))


def _l2_dissipation(u: VectorField, B: VectorField | None) -> tuple[float, float]:
    """(||d_h u||^2 + ||d3 B||^2, ||d3 u||^2 + ||d_h B||^2), all plain L2."""
    grid = u.grid
    nw = grid.norm_weights()
    kh2 = grid.kh2
    kz2 = grid.kz**2

    def wsum(vec, mult):
        return sum(
            float(np.sum(np.abs(c.coeffs) ** 2 * mult * nw)) for c in vec.components()
        )

    dh = wsum(u, kh2)
    d3 = wsum(u, kz2)
    if B is not None:
        dh += wsum(B, kz2)
        d3 += wsum(B, kh2)
    return dh, d3


CFL_SAFETY = 0.5


def step(state: MhdState, dt: float, *, check_cfl: bool = True,
         quadrature: dict | None = None) -> MhdState:
    """Advance one step of size dt with integrating-factor RK4.

    The diagonal dissipation is applied through exact per-mode exponentials;
    the four explicit stages see only advection and coupling.  If `quadrature`
    is given, stage-weighted increments of the L2 dissipation integrals are
    accumulated into its 'diss_h' / 'diss_3' entries (fourth-order accurate,
    for discrete energy-balance checks).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    grid = state.grid
    eps = state.variant.eps
    lam_u, lam_B = dissipation_rates(grid, eps)
    Eu_half = np.exp(-0.5 * dt * lam_u)
    Eu_full = Eu_half**2
    has_B = state.B is not None
    if has_B:
        EB_half = np.exp(-0.5 * dt * lam_B)
        EB_full = EB_half**2

    def N(u, B):
        du, dB, m = _nonstiff(MhdState(u, B, state.t, state.variant))
        return du, dB, m

    u0, B0 = state.u, state.B
    ku1, kB1, maxabs = N(u0, B0)
    if check_cfl and maxabs > 0:
        limit = CFL_SAFETY * grid.min_spacing() / maxabs
        if dt > limit:
            warnings.warn(
                f"CFL violation at t={state.t:.6g}: dt={dt:.3g} exceeds {limit:.3g}",
                RuntimeWarning, stacklevel=2,
            )

    u_s2 = _scale(_axpy(u0, ku1, 0.5 * dt), Eu_half)
    B_s2 = _scale(_axpy(B0, kB1, 0.5 * dt), EB_half) if has_B else None
    ku2, kB2, _ = N(u_s2, B_s2)

    u_s3 = _axpy(_scale(u0, Eu_half), ku2, 0.5 * dt)
    B_s3 = _axpy(_scale(B0, EB_half), kB2, 0.5 * dt) if has_B else None
    ku3, kB3, _ = N(u_s3, B_s3)

    u_s4 = _axpy(_scale(u0, Eu_full), _scale(ku3, Eu_half), dt)
    B_s4 = _axpy(_scale(B0, EB_full), _scale(kB3, EB_half), dt) if has_B else None
    ku4, kB4, _ = N(u_s4, B_s4)

    u_new = _scale(u0, Eu_full)
    u_new = _axpy(u_new, _scale(ku1, Eu_full), dt / 6.0)
    u_new = _axpy(u_new, _scale(ku2, Eu_half), dt / 3.0)
    u_new = _axpy(u_new, _scale(ku3, Eu_half), dt / 3.0)
    u_new = _axpy(u_new, ku4, dt / 6.0)
    if has_B:
        B_new = _scale(B0, EB_full)
        B_new = _axpy(B_new, _scale(kB1, EB_full), dt / 6.0)
        B_new = _axpy(B_new, _scale(kB2, EB_half), dt / 3.0)
        B_new = _axpy(B_new, _scale(kB3, EB_half), dt / 3.0)
        B_new = _axpy(B_new, kB4, dt / 6.0)
    else:
        B_new = None

    if quadrature is not None:
        stages = [(u0, B0), (u_s2, B_s2), (u_s3, B_s3), (u_s4, B_s4)]
        wts = (dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0)
        for (us, Bs), w in zip(stages, wts):
            dh, d3 = _l2_dissipation(us, Bs)
            quadrature["diss_h"] = quadrature.get("diss_h", 0.0) + w * dh
            quadrature["diss_3"] = quadrature.get("diss_3", 0.0) + w * d3

    new_state = MhdState(u_new, B_new, state.t + dt, state.variant)
    if not new_state.is_finite():
        raise BlowUpError(f"solution lost finiteness during step ending at t={new_state.t}")
    return new_state


@dataclass
class TrajectoryResult:
    """Diagnostics (and optionally states) sampled along a fixed-step march."""

    samples: list[DiagSample]
    final: MhdState
    states: list[tuple[float, MhdState]] | None = None


def run(initial: MhdState, T: float, dt: float, diag_every: int, *,
        m: int = 3, s: float = 0.95, collect_states: bool = False,
        snapshot_dir=None, check_cfl: bool = True,
        progress: bool = False) -> TrajectoryResult:
    """Fixed-step march to T, recording diagnostics every diag_every steps.

    The final instant is always sampled.  Step faults propagate with the
    failing time attached.
    """
    if T <= 0 or dt <= 0 or diag_every < 1:
        raise ValueError("require T > 0, dt > 0, diag_every >= 1")
    nsteps = int(round(T / dt))
    if abs(nsteps * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError(f"T={T} is not an integer multiple of dt={dt}")

    quad = {"diss_h": 0.0, "diss_3": 0.0}
    state = initial
    eps = initial.variant.eps
    kind = initial.variant.kind

    def record(st: MhdState) -> DiagSample:
        return compute_diagnostics(
            st.u, st.B, t=st.t, eps=eps, variant=kind, m=m, s=s,
            int_diss_h_l2=quad["diss_h"], int_diss_3_l2=quad["diss_3"],
        )

    samples = [record(state)]
    states = [(state.t, state.copy())] if collect_states else None
    if snapshot_dir is not None:
        _write_state_snapshot(snapshot_dir, state, 0)

    t0 = initial.t
    for istep in range(1, nsteps + 1):
        try:
            state = step(state, dt, check_cfl=check_cfl, quadrature=quad)
        except BlowUpError as exc:
            raise BlowUpError(f"{exc} (step {istep} of {nsteps})") from None
        state.t = t0 + istep * dt  # index-based time: no accumulation drift
        if istep % diag_every == 0 or istep == nsteps:
            samples.append(record(state))
            if collect_states:
                states.append((state.t, state.copy()))
            if snapshot_dir is not None:
                _write_state_snapshot(snapshot_dir, state, istep)
            if progress:
                print(f"  t={state.t:.4g}  |u|_2={samples[-1].l2_u:.6g}", flush=True)

    return TrajectoryResult(samples=samples, final=state, states=states)


def _write_state_snapshot(snapshot_dir, state: MhdState, istep: int) -> None:
    from pathlib import Path

    from .fields import write_snapshot

    base = Path(snapshot_dir) / f"snap_{istep:08d}"
    fields = {"u": state.u}
    if state.B is not None:
        fields["B"] = state.B
    write_snapshot(base, fields, time=state.t, epsilon=state.variant.eps)


def energy_identity_residual(samples: list[DiagSample]) -> float:
    """Discrete residual of the L2 energy balance over a recorded trajectory.

    |Delta||(u,B)||^2 + 2*Int(diss_h) + 2*eps*Int(diss_3)| / ||(u0,B0)||^2,
    using the stage-accurate integrals carried by the samples.
    """
    first, last = samples[0], samples[-1]
    e0 = first.l2_u**2 + first.l2_B**2
    e1 = last.l2_u**2 + last.l2_B**2
    eps = last.eps
    residual = (e1 - e0) + 2.0 * (last.int_diss_h_l2 - first.int_diss_h_l2) \
        + 2.0 * eps * (last.int_diss_3_l2 - first.int_diss_3_l2)
    return abs(residual) / e0 if e0 > 0 else abs(residual)


def _transport(a: VectorField, f: VectorField) -> VectorField:
    """a . grad f for arbitrary parity combinations (internal, dealiased).

    Output parity per component is parity(a_1) * parity(f_j); all three terms
    of the sum agree for the (P, P, flip P)-structured fields used here.
    """
    grid = a.grid
    a_phys = a.physical()
    grad = _grad_physical(f)
    parities = tuple(
        Parity.EVEN if a.c1.parity is c.parity else Parity.ODD for c in f.components()
    )
    return _transport_from_samples(a_phys, grad, parities, grid)


def _transport_scalar_by_gradvec(gv: VectorField, f: Field) -> Field:
    """(gv . grad) f where gv is e.g. d_j B; returns a scalar field."""
    grid = f.grid
    gp = gv.physical()
    acc = sum(gp[i] * derivative(f, i + 1).physical() for i in range(3))
    return Field(dealias(forward(acc, _product_parity(gv, f), grid), grid),
                 _product_parity(gv, f), grid)


def _product_parity(gv: VectorField, f: Field) -> Parity:
    # parity of sum_i gv_i d_i f; all three terms agree for the fields used here
    p1 = Parity.EVEN if gv.c1.parity is f.parity else Parity.ODD
    return p1


def mhd_coupling_A(u: VectorField, B: VectorField) -> tuple[Field, Field]:
    """Quadratic source in the magnetic-vorticity equation.

    Component 1: d2 B . grad u3 - d3 B . grad u2 - d2 u . grad B3 + d3 u . grad B2;
    component 2: d3 B . grad u1 - d1 B . grad u3 - d3 u . grad B1 + d1 u . grad B3.
    """
    def dvec(v, ax):
        return VectorField(*(derivative(c, ax) for c in v.components()))

    d1u, d2u, d3u = dvec(u, 1), dvec(u, 2), dvec(u, 3)
    d1B, d2B, d3B = dvec(B, 1), dvec(B, 2), dvec(B, 3)
    T = _transport_scalar_by_gradvec
    A1 = T(d2B, u.c3) - T(d3B, u.c2) - T(d2u, B.c3) + T(d3u, B.c2)
    A2 = T(d3B, u.c1) - T(d1B, u.c3) - T(d3u, B.c1) + T(d1u, B.c3)
    return A1, A2


def vorticity_residual(state: MhdState) -> float:
    """Max relative mismatch between curl(rhs) and the curled-system right side.

    Checks the evolution of the horizontal vorticity components against the
    independently assembled transport/stretching/coupling form; zero (to
    round-off) for a correct tendency assembly.
    """
    u, B = state.u, state.B
    grid = state.grid
    eps = state.variant.eps
    du, dB = rhs(state)

    wu = curl(u)
    lhs_u = curl(du)
    adv_wu = _transport(u, wu)
    stretch_u = _transport(wu, u)

    kh2 = grid.kh2
    kz2 = grid.kz**2

    def diag_term(f: Field, mult) -> Field:
        return Field(-mult * f.coeffs, f.parity, grid)

    rhs_u = []
    for wc, ac, sc in zip(wu.components()[:2], adv_wu.components()[:2],
                          stretch_u.components()[:2]):
        rhs_u.append(-1.0 * ac + diag_term(wc, kh2) + eps * diag_term(wc, kz2) + sc)

    if B is not None:
        wB = curl(B)
        lhs_B = curl(dB)
        adv_wB = _transport(u, wB)
        mag_u = _transport(B, wB)          # B . grad w^B  (enters u-equation)
        mag_B = _transport(B, wu)          # B . grad w^u  (enters B-equation)
        stretch_B = _transport(wB, B)      # w^B . grad B
        A1, A2 = mhd_coupling_A(u, B)
        d1_wB = [derivative(c, 1) for c in wB.components()[:2]]
        d1_wu = [derivative(c, 1) for c in wu.components()[:2]]
        for i in range(2):
            rhs_u[i] = rhs_u[i] + mag_u.components()[i] - stretch_B.components()[i] + d1_wB[i]
        rhs_B = []
        for i, Ai in enumerate((A1, A2)):
            wc = wB.components()[i]
            r = (-1.0 * adv_wB.components()[i]
                 + diag_term(wc, kz2) + eps * diag_term(wc, kh2)
                 + Ai + mag_B.components()[i] + d1_wu[i])
            rhs_B.append(r)
    else:
        rhs_B = []
        lhs_B = None

    worst = 0.0
    pairs = list(zip(lhs_u.components()[:2], rhs_u))
    if lhs_B is not None:
        pairs += list(zip(lhs_B.components()[:2], rhs_B))
    for left, right in pairs:
        scale = max(left.l2(), right.l2())
        if scale == 0.0:
            continue
        worst = max(worst, (left - right).l2() / scale)
    return worst


def solenoidality(state: MhdState) -> float:
    """Relative divergence norm of (u, B); the state invariant monitor."""
    from .fields import div_norm, grad_norm

    out = 0.0
    for v in (state.u, state.B):
        if v is None:
            continue
        g = grad_norm(v)
        if g > 0:
            out = max(out, div_norm(v) / g)
    return out

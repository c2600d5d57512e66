"""Low-tech finite-difference reference solver used as a cross-implementation
oracle.

Second-order centered differences on a uniform cell-centered mesh (vertical
midpoints, matching the spectral collocation heights), explicit SSP-RK3 in
time, and an iterative pressure Poisson solve.  Slip walls are enforced by
reflection ghost cells: horizontal components and pressure mirror evenly,
vertical components mirror oddly.  Deliberately shares no code path with the
spectral solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .solver import ModelVariant

try:
    import pyamg

    _HAVE_PYAMG = True
except ImportError:  # pragma: no cover
    _HAVE_PYAMG = False


@dataclass(frozen=True)
class FdMesh:
    n1: int
    n2: int
    n3: int
    L1: float
    L2: float
    L3: float

    @property
    def h(self) -> tuple[float, float, float]:
        return (self.L1 / self.n1, self.L2 / self.n2, self.L3 / self.n3)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)

    @property
    def x3(self) -> np.ndarray:
        return (np.arange(self.n3) + 0.5) * (self.L3 / self.n3)


@dataclass
class FdState:
    """Collocated velocity (and optional magnetic) samples on an FdMesh."""

    u: np.ndarray  # (3, n1, n2, n3)
    B: np.ndarray | None
    t: float
    variant: ModelVariant
    mesh: FdMesh

    def copy(self) -> "FdState":
        return FdState(self.u.copy(), None if self.B is None else self.B.copy(),
                       self.t, self.variant, self.mesh)


# vertical ghost reflection signs: +1 even (u_h, B_h, p), -1 odd (u3, B3)
_COMPONENT_SIGN = (1.0, 1.0, -1.0)


def _pad_z(f: np.ndarray, sign: float) -> np.ndarray:
    out = np.empty((f.shape[0], f.shape[1], f.shape[2] + 2))
    out[:, :, 1:-1] = f
    out[:, :, 0] = sign * f[:, :, 0]
    out[:, :, -1] = sign * f[:, :, -1]
    return out


def _ddx(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)


def _ddz(f: np.ndarray, h: float, sign: float) -> np.ndarray:
    g = _pad_z(f, sign)
    return (g[:, :, 2:] - g[:, :, :-2]) / (2.0 * h)


def _lap_h(f: np.ndarray, hx: float, hy: float) -> np.ndarray:
    return (
        (np.roll(f, -1, axis=0) - 2.0 * f + np.roll(f, 1, axis=0)) / hx**2
        + (np.roll(f, -1, axis=1) - 2.0 * f + np.roll(f, 1, axis=1)) / hy**2
    )


def _d2z(f: np.ndarray, hz: float, sign: float) -> np.ndarray:
    g = _pad_z(f, sign)
    return (g[:, :, 2:] - 2.0 * g[:, :, 1:-1] + g[:, :, :-2]) / hz**2


def fd_divergence(v: np.ndarray, mesh: FdMesh) -> np.ndarray:
    hx, hy, hz = mesh.h
    return (
        _ddx(v[0], hx, 0) + _ddx(v[1], hy, 1) + _ddz(v[2], hz, _COMPONENT_SIGN[2])
    )


def _gradient_p(p: np.ndarray, mesh: FdMesh) -> np.ndarray:
    hx, hy, hz = mesh.h
    return np.stack([
        _ddx(p, hx, 0), _ddx(p, hy, 1), _ddz(p, hz, 1.0),
    ])


class PoissonSolver:
    """Iterative solver for the compact 7-point Laplacian with periodic
    horizontal directions and homogeneous Neumann walls.

    Assembled and solved in the sign-flipped (positive semidefinite) form so
    that conjugate-gradient acceleration of the multigrid cycles applies.
    """

    def __init__(self, mesh: FdMesh, tol: float = 1e-9):
        self.mesh = mesh
        self.tol = tol
        self.matrix = self._assemble()
        if _HAVE_PYAMG:
            self.amg = pyamg.ruge_stuben_solver(self.matrix.tocsr())
        else:
            self.amg = None
        self._last = np.zeros(mesh.n1 * mesh.n2 * mesh.n3)

    def _assemble(self) -> sp.spmatrix:
        mesh = self.mesh
        hx, hy, hz = mesh.h

        def periodic_1d(n, h):
            main = -2.0 * np.ones(n)
            off = np.ones(n - 1)
            A = sp.diags([off, main, off], [-1, 0, 1], format="lil")
            A[0, n - 1] += 1.0
            A[n - 1, 0] += 1.0
            return (A / h**2).tocsr()

        def neumann_1d(n, h):
            main = -2.0 * np.ones(n)
            main[0] = -1.0
            main[-1] = -1.0
            off = np.ones(n - 1)
            return (sp.diags([off, main, off], [-1, 0, 1]) / h**2).tocsr()

        Ax = periodic_1d(mesh.n1, hx)
        Ay = periodic_1d(mesh.n2, hy)
        Az = neumann_1d(mesh.n3, hz)
        Ix = sp.identity(mesh.n1)
        Iy = sp.identity(mesh.n2)
        Iz = sp.identity(mesh.n3)
        return (-(
            sp.kron(sp.kron(Ax, Iy), Iz)
            + sp.kron(sp.kron(Ix, Ay), Iz)
            + sp.kron(sp.kron(Ix, Iy), Az)
        )).tocsr()

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        flat = -rhs.ravel()
        flat = flat - flat.mean()
        if self.amg is not None:
            x = self.amg.solve(flat, x0=self._last, tol=self.tol, accel="cg")
        else:  # pragma: no cover
            from scipy.sparse.linalg import cg

            x, info = cg(self.matrix, flat, x0=self._last, rtol=self.tol, maxiter=5000)
            if info != 0:
                raise RuntimeError(f"pressure Poisson CG failed to converge (info={info})")
        resid = np.linalg.norm(self.matrix @ x - flat)
        scale = np.linalg.norm(flat)
        if scale > 0 and resid > 100.0 * self.tol * scale:
            raise RuntimeError("pressure Poisson solve did not reach tolerance")
        self._last = x
        x = x - x.mean()
        return x.reshape(self.mesh.shape)


def _advect(v: np.ndarray, f: np.ndarray, mesh: FdMesh, signs) -> np.ndarray:
    hx, hy, hz = mesh.h
    out = np.empty_like(f)
    for j in range(f.shape[0]):
        out[j] = (
            v[0] * _ddx(f[j], hx, 0)
            + v[1] * _ddx(f[j], hy, 1)
            + v[2] * _ddz(f[j], hz, signs[j])
        )
    return out


def fd_rhs(state: FdState, poisson: PoissonSolver) -> tuple[np.ndarray, np.ndarray | None]:
    """Projected tendency of the perturbation system on the FD mesh."""
    mesh = state.mesh
    hx, hy, hz = mesh.h
    eps = state.variant.eps
    u, B = state.u, state.B

    du = -_advect(u, u, mesh, _COMPONENT_SIGN)
    for j in range(3):
        du[j] += _lap_h(u[j], hx, hy) + eps * _d2z(u[j], hz, _COMPONENT_SIGN[j])
    if B is not None:
        du += _advect(B, B, mesh, _COMPONENT_SIGN)
        du += _ddx(B, hx, 1)  # d1 B, axis 1 of the stacked array is x1
        dB = -_advect(u, B, mesh, _COMPONENT_SIGN) + _advect(B, u, mesh, _COMPONENT_SIGN)
        dB += _ddx(u, hx, 1)
        for j in range(3):
            dB[j] += _d2z(B[j], hz, _COMPONENT_SIGN[j]) + eps * _lap_h(B[j], hx, hy)
    else:
        dB = None

    p = poisson.solve(fd_divergence(du, mesh))
    du -= _gradient_p(p, mesh)
    return du, dB


def fd_step(state: FdState, dt: float, poisson: PoissonSolver | None = None) -> FdState:
    """One explicit SSP-RK3 step with per-stage pressure projection."""
    if poisson is None:
        poisson = PoissonSolver(state.mesh)

    def stage(s: FdState) -> FdState:
        du, dB = fd_rhs(s, poisson)
        return FdState(s.u + dt * du,
                       None if dB is None else s.B + dt * dB,
                       s.t + dt, s.variant, s.mesh)

    s1 = stage(state)
    s2 = stage(s1)
    s2 = FdState(0.75 * state.u + 0.25 * s2.u,
                 None if state.B is None else 0.75 * state.B + 0.25 * s2.B,
                 state.t + 0.5 * dt, state.variant, state.mesh)
    s3 = stage(s2)
    u_new = state.u / 3.0 + 2.0 / 3.0 * s3.u
    B_new = None if state.B is None else state.B / 3.0 + 2.0 / 3.0 * s3.B
    return FdState(u_new, B_new, state.t + dt, state.variant, state.mesh)


def fd_stable_dt(mesh: FdMesh, variant: ModelVariant, safety: float = 0.55) -> float:
    """Explicit diffusion stability bound for the RK3 scheme.

    RK3 covers the negative real axis out to about 2.5; the advective and
    coupling scales of the small-data runs are far below the diffusive one.
    """
    hx, hy, hz = mesh.h
    rate = 2.0 / hx**2 + 2.0 / hy**2  # horizontal viscosity on u
    eps = variant.eps
    rate_z = 2.0 * max(eps, 1.0 if variant.has_magnetic else eps) / hz**2
    return safety * 2.5 / (rate + rate_z)


def fd_run(state: FdState, T: float, dt: float | None = None) -> FdState:
    """March to time T; dt defaults to the diffusion stability bound."""
    if dt is None:
        dt = fd_stable_dt(state.mesh, state.variant)
    nsteps = max(1, int(np.ceil(T / dt)))
    dt = T / nsteps
    poisson = PoissonSolver(state.mesh)
    for _ in range(nsteps):
        state = fd_step(state, dt, poisson)
        if not np.all(np.isfinite(state.u)):
            raise RuntimeError(f"FD solution lost finiteness at t={state.t}")
    return state


def fd_state_from_spectral(spec_state, shape: tuple[int, int, int]) -> FdState:
    """Sample a spectral state onto an FD mesh of the given shape."""
    from .grid import evaluate_physical

    grid = spec_state.grid
    mesh = FdMesh(shape[0], shape[1], shape[2], grid.L1, grid.L2, grid.L3)
    u = np.stack([
        evaluate_physical(c.coeffs, c.parity, grid, shape)
        for c in spec_state.u.components()
    ])
    B = None
    if spec_state.B is not None:
        B = np.stack([
            evaluate_physical(c.coeffs, c.parity, grid, shape)
            for c in spec_state.B.components()
        ])
    return FdState(u=u, B=B, t=spec_state.t, variant=spec_state.variant, mesh=mesh)


def fd_l2(v: np.ndarray, mesh: FdMesh) -> float:
    cell = (mesh.L1 * mesh.L2 * mesh.L3) / (mesh.n1 * mesh.n2 * mesh.n3)
    return float(np.sqrt(np.sum(v**2) * cell))

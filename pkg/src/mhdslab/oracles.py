"""Independent correctness machinery: ratio checks for the anisotropic trilinear
and interpolation inequalities, the Hardy-Littlewood-Sobolev bound, the
pressure estimate, the norm-equivalence relations, and the tangential-energy
differential inequality.

The constants in these inequalities are non-constructive, so every check
evaluates lhs / rhs_core (the right side stripped of its constant) and the
test layer asserts boundedness and cross-seed stability of the ratio, never a
specific value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conormal import DiagSample, conormal_Z, lambda_h, norm_co2, norm_tan2
from .fields import (
    Field,
    VectorField,
    advect,
    curl,
    derivative,
    divergence,
    gradient,
    solve_pressure,
)
from .grid import Parity, SpectralGrid, coeff_norm2, dealias, evaluate_physical, forward
from .solver import MhdState

ANISOTROPIC_NAMES = ("a1", "a2", "a3", "a4", "a5", "a9")


@dataclass
class InequalityCheck:
    """One evaluated inequality: lhs, constant-free rhs, and their ratio."""

    name: str
    lhs: float
    rhs_core: float
    degenerate: bool = False

    @property
    def ratio(self) -> float:
        if self.degenerate or self.rhs_core == 0.0:
            return float("nan")
        return self.lhs / self.rhs_core


def _quad_values(f: Field, factor: int) -> np.ndarray:
    g = f.grid
    if factor == 1:
        return f.physical()
    shape = (factor * g.n1, factor * g.n2, factor * g.n3)
    return evaluate_physical(f.coeffs, f.parity, g, shape)


def _abs_integral(fields: Sequence[Field], factor: int) -> float:
    """Quadrature of |f*g*...| on a refined collocation grid."""
    g = fields[0].grid
    prod = np.ones((factor * g.n1, factor * g.n2, factor * g.n3))
    for f in fields:
        prod = prod * _quad_values(f, factor)
    cell = g.volume / prod.size
    return float(np.sum(np.abs(prod)) * cell)


def _dnorm(f: Field, *axes: int) -> float:
    g = f
    for ax in axes:
        g = derivative(g, ax)
    return g.l2()


def _h_power_norm(f: Field, order: int) -> float:
    """|| |grad_h|^order f ||_2 via the |k_h|^(2*order) multiplier."""
    g = f.grid
    return float(np.sqrt(coeff_norm2(f.coeffs, f.parity, g, g.kh2**order)))


def check_anisotropic(name: str, *fields: Field, s: float = 0.95,
                      axes: tuple[int, int, int] = (1, 2, 3),
                      quad_factor: int = 2) -> InequalityCheck:
    """Evaluate one of the anisotropic product/interpolation inequalities.

    Arity by name: a1/a2 take (f, g, h); a3 takes (f, g); a4/a5/a9 take (f).
    `axes` supplies the distinct directions (i, j, k) where the statement
    involves them; `s` only matters for a9.
    """
    if name not in ANISOTROPIC_NAMES:
        raise ValueError(f"unknown inequality {name!r}")
    i, j, k = axes
    if len({i, j, k}) != 3:
        raise ValueError("axes must be three distinct directions")

    if name == "a1":
        f, g, h = fields
        lhs = _abs_integral([f, g, h], quad_factor)
        rhs = (
            np.sqrt(f.l2() * _dnorm(f, 1))
            * np.sqrt(g.l2() * _dnorm(g, 2))
            * np.sqrt(h.l2() * _dnorm(h, 3))
        )
    elif name == "a2":
        f, g, h = fields
        lhs = _abs_integral([f, g, h], quad_factor)
        rhs = (
            (f.l2() * _dnorm(f, i) * _dnorm(f, j) * _dnorm(f, i, j)) ** 0.25
            * np.sqrt(g.l2() * _dnorm(g, k))
            * h.l2()
        )
    elif name == "a3":
        f, g = fields
        fg = f.physical() * g.physical()
        lhs = float(np.sqrt(np.sum(fg**2) * f.grid.cell_volume))
        rhs = (
            (f.l2() * _dnorm(f, i) * _dnorm(f, j) * _dnorm(f, i, j)) ** 0.25
            * np.sqrt(g.l2() * _dnorm(g, k))
        )
    elif name == "a4":
        (f,) = fields
        lhs = float(np.abs(_quad_values(f, quad_factor)).max())
        rhs = 0.0
        for order in range(3):
            a = _h_power_norm(f, order)
            b = _h_power_norm(derivative(f, 3), order)
            rhs += np.sqrt(a * b)
    elif name == "a5":
        (f,) = fields
        z1 = conormal_Z(f, 3)
        z3 = conormal_Z(conormal_Z(z1, 3), 3)
        nf, nz3 = f.l2(), z3.l2()
        lhs = z1.l2()
        rhs = nf + nf**0.75 * nz3**0.25 + nf ** (2.0 / 3.0) * nz3 ** (1.0 / 3.0)
    else:  # a9
        (f,) = fields
        vals = f.physical()
        g = f.grid
        sup_vert = np.abs(vals).max(axis=2)  # L_inf in x3 per horizontal point
        area = (g.L1 / g.n1) * (g.L2 / g.n2)
        p = 2.0 / s
        lhs = float((np.sum(sup_vert**p) * area) ** (1.0 / p))
        bracket = f.l2() * _dnorm(f, 2) + _dnorm(f, 1) * _dnorm(f, 1, 2)
        rhs = (
            bracket ** ((1.0 - s) / 2.0)
            * f.l2() ** ((2.0 * s - 1.0) / 2.0)
            * np.sqrt(_dnorm(f, 3))
        )

    degenerate = rhs == 0.0
    return InequalityCheck(name=name, lhs=float(lhs), rhs_core=float(rhs),
                           degenerate=degenerate)


def check_hls(f: Field, alpha_exp: float, q: int = 2) -> InequalityCheck:
    """Hardy-Littlewood-Sobolev on horizontal slices: ||Lambda^-a f||_2 vs ||f||_p.

    With q = 2 the admissible range is alpha in (0, 1) and p = 2/(1+alpha).
    The reported ratio is the worst slice.
    """
    if q != 2:
        raise ValueError("only q = 2 is implemented")
    if not (0.0 < alpha_exp < 1.0):
        raise ValueError(f"alpha={alpha_exp} outside (0, 1)")
    grid = f.grid
    lam = lambda_h(f, -alpha_exp)
    lam_vals = lam.physical()
    vals = f.physical()
    area = (grid.L1 / grid.n1) * (grid.L2 / grid.n2)
    p = 2.0 / (1.0 + alpha_exp)

    worst = 0.0
    any_valid = False
    for l in range(grid.n3):
        lhs = np.sqrt(np.sum(lam_vals[:, :, l] ** 2) * area)
        rhs = (np.sum(np.abs(vals[:, :, l]) ** p) * area) ** (1.0 / p)
        if rhs > 0:
            any_valid = True
            worst = max(worst, lhs / rhs)
    if not any_valid:
        return InequalityCheck("a16", 0.0, 0.0, degenerate=True)
    return InequalityCheck("a16", worst, 1.0)


def check_pressure(u: VectorField, B: VectorField | None, m: int) -> InequalityCheck:
    """Pressure bound: ||grad p||_{H^{m-1}_co} vs ||F|| + ||div F|| with
    F = B.grad B - u.grad u and p solved from Laplace(p) = div F per mode."""
    if m < 2:
        raise ValueError("pressure estimate needs m >= 2")
    F = -1.0 * advect(u, u)
    if B is not None:
        F = F + advect(B, B)
    p = solve_pressure(F)
    gp = gradient(p)
    lhs = np.sqrt(norm_co2(gp, m - 1))
    rhs = np.sqrt(norm_co2(F, m - 1)) + np.sqrt(norm_co2(divergence(F), m - 2))
    return InequalityCheck("a15", float(lhs), float(rhs), degenerate=rhs == 0.0)


def check_equivalence(u: VectorField, m: int) -> tuple[InequalityCheck, InequalityCheck]:
    """Norm-equivalence ratio and the pointwise vorticity/divergence relations.

    First check: lhs = ||u||_{H^m_co}^2 + ||d3 u||_{H^{m-1}_co}^2 against
    rhs = ||u||_{H^m_tan}^2 + ||w_h||_{H^{m-1}_co}^2; the ratio must stay in a
    fixed [r_low, r_high] over ensembles.  Second check: residual of
    d3 u1 = w2 + d1 u3 and d3 u3 = -d1 u1 - d2 u2 (zero for solenoidal data).
    """
    w = curl(u)
    d3u = [derivative(c, 3) for c in u.components()]
    lhs = norm_co2(u, m) + sum(norm_co2(g, m - 1) for g in d3u)
    rhs = norm_tan2(u, m) + norm_co2(w.c1, m - 1) + norm_co2(w.c2, m - 1)
    equiv = InequalityCheck("b5", float(lhs), float(rhs), degenerate=rhs == 0.0)

    rel1 = d3u[0] - (w.c2 + derivative(u.c3, 1))
    rel2 = d3u[2] + derivative(u.c1, 1) + derivative(u.c2, 2)
    resid = np.sqrt(rel1.l2() ** 2 + rel2.l2() ** 2)
    scale = np.sqrt(sum(g.l2() ** 2 for g in d3u))
    rels = InequalityCheck("b2", float(resid), float(scale), degenerate=scale == 0.0)
    return equiv, rels


def check_differential_inequality(samples: Sequence[DiagSample]) -> np.ndarray:
    """Signed residual of the tangential-energy differential inequality.

    residual(t) = d/dt(||u||_{H^m_tan}^2 + ||w_h||_{H^{m-1}_tan}^2)
                  + (||d_h u||^2 + ||d_h w_h||^2) + eps (||d3 u||^2 + ||d3 w_h||^2),
    evaluated with centered differences at interior samples; nonpositive (up
    to small-data nonlinearity) along admissible trajectories.
    """
    if len(samples) < 3:
        raise ValueError("need at least three samples")
    t = np.array([smp.t for smp in samples])
    energy = np.array([smp.tan_m_u**2 + smp.tan_m1_wu**2 for smp in samples])
    dh = np.array([smp.dh_u_tan2 + smp.dh_w_tan2 for smp in samples])
    d3 = np.array([smp.d3_u_tan2 + smp.d3_w_tan2 for smp in samples])
    eps = samples[0].eps
    dEdt = (energy[2:] - energy[:-2]) / (t[2:] - t[:-2])
    return dEdt + dh[1:-1] + eps * d3[1:-1]


# ---------------------------------------------------------------------------
# Random ensembles
# ---------------------------------------------------------------------------

def random_scalar(grid: SpectralGrid, rng: np.random.Generator,
                  parity: Parity | None = None) -> Field:
    """Random band-limited scalar with the |k|^-2 ensemble spectrum."""
    if parity is None:
        parity = Parity.EVEN if rng.integers(2) == 0 else Parity.ODD
    vals = rng.standard_normal(grid.shape)
    c = dealias(forward(vals, parity, grid), grid)
    c = c / (1.0 + grid.k2)
    return Field(c, parity, grid)


def ensemble_max_ratio(name: str, grid: SpectralGrid, n_samples: int, seed: int,
                       s: float = 0.95, quad_factor: int = 2) -> float:
    """Max lhs/rhs_core ratio of an anisotropic inequality over random fields."""
    from .initdata import random_solenoidal

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        if name in ("a1", "a2"):
            fgh = [random_scalar(grid, rng) for _ in range(3)]
            chk = check_anisotropic(name, *fgh, quad_factor=quad_factor)
        elif name == "a3":
            fg = [random_scalar(grid, rng) for _ in range(2)]
            chk = check_anisotropic(name, *fg, quad_factor=quad_factor)
        elif name in ("a4", "a5", "a9"):
            chk = check_anisotropic(name, random_scalar(grid, rng), s=s,
                                    quad_factor=quad_factor)
        elif name == "a15":
            u = random_solenoidal(grid, rng)
            B = random_solenoidal(grid, rng)
            chk = check_pressure(u, B, m=3)
        elif name == "a16":
            f = random_scalar(grid, rng)
            c = f.coeffs.copy()
            c[0, 0, :] = 0.0
            chk = check_hls(Field(c, f.parity, grid), alpha_exp=s)
        else:
            raise ValueError(f"unknown ensemble inequality {name!r}")
        if not chk.degenerate:
            worst = max(worst, chk.ratio)
    return worst


def ensemble_equivalence(grid: SpectralGrid, n_samples: int, seed: int,
                         m: int = 3) -> tuple[float, float]:
    """(min, max) of the b5 equivalence ratio over random solenoidal states."""
    from .initdata import random_solenoidal

    rng = np.random.default_rng(seed)
    lo, hi = np.inf, 0.0
    for _ in range(n_samples):
        u = random_solenoidal(grid, rng)
        equiv, rels = check_equivalence(u, m)
        if equiv.degenerate:
            continue
        if rels.ratio > 1e-10:
            raise AssertionError("pointwise vorticity relations violated")
        lo = min(lo, equiv.ratio)
        hi = max(hi, equiv.ratio)
    return float(lo), float(hi)


def check_state_equivalence(state: MhdState, m: int):
    """Equivalence checks for both fields of a state (u always, B when present)."""
    out = [check_equivalence(state.u, m)]
    if state.B is not None:
        out.append(check_equivalence(state.B, m))
    return out

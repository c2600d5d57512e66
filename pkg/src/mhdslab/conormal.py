"""Conormal vector fields, tangential/conormal Sobolev norms, fractional
horizontal operators, and the energy functionals used to instrument runs.

Derivative-counting convention: both the tangential and conormal norms sum
over multi-indices once each, i.e.

    ||f||_{H^m_tan}^2 = sum_{a1+a2<=m} ||d1^a1 d2^a2 f||^2,
    ||f||_{H^m_co}^2  = sum_{a1+a2+a3<=m} ||Z1^a1 Z2^a2 Z3^a3 f||^2,

so tan <= co holds term by term.  ||d_h g||^2 always means
||d1 g||^2 + ||d2 g||^2 (an extra |k_h|^2 multiplier).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dfield
from typing import Callable, Sequence

import numpy as np

from .fields import Field, VectorField, curl, derivative
from .grid import Parity, SpectralGrid, forward, inverse

S_LOW = 13.0 / 14.0
S_HIGH = 1.0


def phi_default(x3: np.ndarray) -> np.ndarray:
    """Boundary-degenerate weight x3/(1+x3): vanishes at the wall, ~1 far away."""
    return x3 / (1.0 + x3)


def sigma_from_s(s: float) -> float:
    """Weight exponent sigma = s - (14s-13)/(6(2-s)) for the decay machinery."""
    if not (S_LOW < s < S_HIGH):
        raise ValueError(f"s={s} outside the admissible interval (13/14, 1)")
    return s - (14.0 * s - 13.0) / (6.0 * (2.0 - s))


def conormal_Z(f: Field, k: int, phi: Callable[[np.ndarray], np.ndarray] = phi_default) -> Field:
    """Tangential vector field Z_k: Z_1, Z_2 are plain derivatives, Z_3 = phi(x3) d3.

    Z_3 f is re-encoded in the parity basis of f, which is exact at the
    collocation points; the representation carries a small truncation error
    near the artificial wall x3 = L3 only.
    """
    if k in (1, 2):
        return derivative(f, k)
    if k != 3:
        raise ValueError(f"k must be 1, 2 or 3, got {k}")
    grid = f.grid
    d3 = derivative(f, 3)
    w = phi(grid.x3)
    vals = inverse(d3.coeffs, d3.parity, grid) * w
    return Field(forward(vals, f.parity, grid), f.parity, grid)


def multi_indices(m: int) -> list[tuple[int, int, int]]:
    """All (a1, a2, a3) with a1+a2+a3 <= m; 20 indices for m = 3."""
    return [
        (a1, a2, a3)
        for a1, a2, a3 in itertools.product(range(m + 1), repeat=3)
        if a1 + a2 + a3 <= m
    ]


def _horizontal_table(grid: SpectralGrid, q: int) -> np.ndarray:
    """sum_{a1+a2<=q} kx^{2 a1} ky^{2 a2}, shape (n1, n2, 1)."""
    kx2 = grid.kx**2
    ky2 = grid.ky**2
    out = np.zeros_like(kx2 + ky2)
    for a1 in range(q + 1):
        for a2 in range(q + 1 - a1):
            out = out + kx2**a1 * ky2**a2
    return out


def _z3_chain(f: Field, depth: int, phi) -> list[Field]:
    chain = [f]
    for _ in range(depth):
        chain.append(conormal_Z(chain[-1], 3, phi))
    return chain


def _weighted_sum(coeffs: np.ndarray, parity: Parity, grid: SpectralGrid,
                  multiplier: np.ndarray) -> float:
    return float(np.sum(np.abs(coeffs) ** 2 * multiplier * grid.norm_weights()))


def _scalar_fields(v) -> list[Field]:
    if isinstance(v, Field):
        return [v]
    return list(v.components())


def norm_tan2(v, m: int, extra: np.ndarray | None = None) -> float:
    """Squared tangential norm; `extra` is an optional |multiplier|^2 weight."""
    total = 0.0
    for f in _scalar_fields(v):
        mult = _horizontal_table(f.grid, m)
        if extra is not None:
            mult = mult * extra
        total += _weighted_sum(f.coeffs, f.parity, f.grid, mult)
    return total


def norm_co2(v, m: int, extra: np.ndarray | None = None, phi=phi_default) -> float:
    """Squared conormal norm via precomposed Z3 chains and horizontal tables."""
    total = 0.0
    for f in _scalar_fields(v):
        grid = f.grid
        for a3, g in enumerate(_z3_chain(f, m, phi)):
            mult = _horizontal_table(grid, m - a3)
            if extra is not None:
                mult = mult * extra
            total += _weighted_sum(g.coeffs, g.parity, grid, mult)
    return total


def norm_tan(v, m: int) -> float:
    return float(np.sqrt(norm_tan2(v, m)))


def norm_co(v, m: int) -> float:
    return float(np.sqrt(norm_co2(v, m)))


def norm_co2_reference(v, m: int, phi=phi_default) -> float:
    """Literal sum over Z^alpha by recursive application; oracle for norm_co2."""
    total = 0.0
    for f in _scalar_fields(v):
        for a1, a2, a3 in multi_indices(m):
            g = f
            for _ in range(a3):
                g = conormal_Z(g, 3, phi)
            for _ in range(a2):
                g = conormal_Z(g, 2, phi)
            for _ in range(a1):
                g = conormal_Z(g, 1, phi)
            total += g.l2() ** 2
    return total


def lambda_h(f: Field, s_exp: float, mean_tol: float = 1e-8) -> Field:
    """Fractional horizontal operator: multiply each mode by |k_h|^s_exp.

    Negative exponents require (numerically) zero horizontal mean; the k_h = 0
    column is annihilated.  Vertical structure is untouched.
    """
    grid = f.grid
    kh = np.sqrt(grid.kh2)
    if s_exp < 0:
        total = np.sum(np.abs(f.coeffs) ** 2)
        mean_mass = np.sum(np.abs(f.coeffs[0, 0, :]) ** 2)
        if total > 0 and mean_mass > mean_tol**2 * total:
            raise ValueError(
                "lambda_h with negative exponent requires zero horizontal mean"
            )
        with np.errstate(divide="ignore"):
            mult = np.where(kh > 0, kh**s_exp, 0.0)
    else:
        mult = kh**s_exp
    return Field(f.coeffs * mult, f.parity, grid)


def lambda_norm(v, s_exp: float) -> float:
    """L2 norm of Lambda_h^{s_exp} applied componentwise."""
    return float(np.sqrt(sum(lambda_h(f, s_exp).l2() ** 2 for f in _scalar_fields(v))))


# ---------------------------------------------------------------------------
# Per-sample diagnostics and energy functionals
# ---------------------------------------------------------------------------

@dataclass
class DiagSample:
    """Instantaneous norms recorded along a trajectory.

    Norm fields are unsquared; dissipation integrands (suffix ``2``) are
    squared, matching how they enter the time integrals.  The ``int_*`` pair
    holds stage-accurate cumulative L2 dissipation integrals supplied by the
    stepper.
    """

    t: float
    eps: float
    variant: str
    l2_u: float = 0.0
    l2_B: float = 0.0
    linf_u: float = 0.0
    tan_m_u: float = 0.0
    tan_m_B: float = 0.0
    co_m_u: float = 0.0
    co_m_B: float = 0.0
    co_m1_wu: float = 0.0
    co_m1_wB: float = 0.0
    tan_m1_wu: float = 0.0
    co_m1_d3u: float = 0.0
    co_m1_d3B: float = 0.0
    lam_u: float = 0.0
    lam_w: float = 0.0
    tan_norms: tuple = ()
    co_norms: tuple = ()
    dh_tan2: float = 0.0
    d3_tan2: float = 0.0
    dh_w_co2: float = 0.0
    d3_w_co2: float = 0.0
    d1B_co2: float = 0.0
    dh_co2: float = 0.0
    dh3_co2: float = 0.0
    d3_co2: float = 0.0
    d33_co2: float = 0.0
    dh_u_tan2: float = 0.0
    dh_w_tan2: float = 0.0
    d3_u_tan2: float = 0.0
    d3_w_tan2: float = 0.0
    diss_h_l2: float = 0.0
    diss_3_l2: float = 0.0
    int_diss_h_l2: float = 0.0
    int_diss_3_l2: float = 0.0


def compute_diagnostics(u: VectorField, B: VectorField | None, *, t: float,
                        eps: float, variant: str, m: int, s: float,
                        phi=phi_default,
                        int_diss_h_l2: float = 0.0,
                        int_diss_3_l2: float = 0.0) -> DiagSample:
    """Evaluate every norm the energy functionals and decay diagnostics consume."""
    grid = u.grid
    kh2 = grid.kh2

    wu = curl(u)
    wu_h = [wu.c1, wu.c2]
    d3u = [derivative(c, 3) for c in u.components()]
    d33u = [derivative(g, 3) for g in d3u]
    d3wu_h = [derivative(c, 3) for c in wu_h]

    def tan2(fields, mm, extra=None):
        return sum(norm_tan2(f, mm, extra) for f in fields)

    def co2(fields, mm, extra=None):
        return sum(norm_co2(f, mm, extra, phi) for f in fields)

    sample = DiagSample(t=t, eps=eps, variant=variant)
    sample.int_diss_h_l2 = int_diss_h_l2
    sample.int_diss_3_l2 = int_diss_3_l2

    sample.l2_u = u.l2()
    sample.linf_u = u.max_abs()
    sample.tan_m_u = float(np.sqrt(norm_tan2(u, m)))
    sample.co_m_u = float(np.sqrt(norm_co2(u, m, None, phi)))
    sample.co_m1_wu = float(np.sqrt(co2(wu_h, m - 1)))
    sample.tan_m1_wu = float(np.sqrt(tan2(wu_h, m - 1)))
    sample.co_m1_d3u = float(np.sqrt(co2(d3u, m - 1)))

    mean_free_u = VectorField(
        Field(_zero_hmean(u.c1.coeffs), u.c1.parity, grid),
        Field(_zero_hmean(u.c2.coeffs), u.c2.parity, grid),
        Field(_zero_hmean(u.c3.coeffs), u.c3.parity, grid),
    )
    sample.lam_u = lambda_norm(mean_free_u, -s)
    wu_h_meanfree = [Field(_zero_hmean(f.coeffs), f.parity, grid) for f in wu_h]
    sample.lam_w = float(np.sqrt(sum(lambda_h(f, -s).l2() ** 2 for f in wu_h_meanfree)))

    sample.dh_u_tan2 = norm_tan2(u, m, kh2)
    sample.dh_w_tan2 = tan2(wu_h, m - 1, kh2)
    sample.d3_u_tan2 = tan2(d3u, m, None)
    sample.d3_w_tan2 = tan2(d3wu_h, m - 1, None)

    diss_h = norm_tan2(u, 0, kh2)  # ||d_h u||_{L2}^2
    diss_3 = sum(g.l2() ** 2 for g in d3u)  # ||d3 u||_{L2}^2

    if B is not None:
        wB = curl(B)
        wB_h = [wB.c1, wB.c2]
        d3B = [derivative(c, 3) for c in B.components()]
        d33B = [derivative(g, 3) for g in d3B]
        d3wB_h = [derivative(c, 3) for c in wB_h]
        d1B = [derivative(c, 1) for c in B.components()]

        sample.l2_B = B.l2()
        sample.tan_m_B = float(np.sqrt(norm_tan2(B, m)))
        sample.co_m_B = float(np.sqrt(norm_co2(B, m, None, phi)))
        sample.co_m1_wB = float(np.sqrt(co2(wB_h, m - 1)))
        sample.co_m1_d3B = float(np.sqrt(co2(d3B, m - 1)))

        # E1 integrands: ||(d_h u, d3 B)||^2 and ||(d3 u, d_h B)||^2 in H^m_tan
        sample.dh_tan2 = norm_tan2(u, m, kh2) + tan2(d3B, m, None)
        sample.d3_tan2 = tan2(d3u, m, None) + norm_tan2(B, m, kh2)
        # E2 integrands over H^{m-1}_co of the horizontal vorticities
        sample.dh_w_co2 = co2(wu_h, m - 1, kh2) + co2(d3wB_h, m - 1)
        sample.d3_w_co2 = co2(d3wu_h, m - 1) + co2(wB_h, m - 1, kh2)
        sample.d1B_co2 = co2(d1B, m - 1)
        # X integrands
        sample.dh_co2 = norm_co2(u, m, kh2, phi) + co2(d3B, m)
        sample.dh3_co2 = co2(d3u, m - 1, kh2) + co2(d33B, m - 1)
        sample.d3_co2 = co2(d3u, m) + norm_co2(B, m, kh2, phi)
        d3B_h = d3B[:2]
        sample.d33_co2 = co2(d33u, m - 1) + co2(d3B_h, m - 1, kh2)

        diss_h += sum(g.l2() ** 2 for g in d3B)
        diss_3 += norm_tan2(B, 0, kh2)
    else:
        sample.dh_tan2 = sample.dh_u_tan2
        sample.d3_tan2 = sample.d3_u_tan2
        sample.dh_w_co2 = co2(wu_h, m - 1, kh2)
        sample.d3_w_co2 = co2(d3wu_h, m - 1)
        sample.dh_co2 = norm_co2(u, m, kh2, phi)
        sample.dh3_co2 = co2(d3u, m - 1, kh2)
        sample.d3_co2 = co2(d3u, m)
        sample.d33_co2 = co2(d33u, m - 1)

    sample.diss_h_l2 = diss_h
    sample.diss_3_l2 = diss_3

    uB = list(u.components()) + (list(B.components()) if B is not None else [])
    sample.tan_norms = tuple(
        float(np.sqrt(sum(norm_tan2(f, k) for f in uB))) for k in range(m + 1)
    )
    sample.co_norms = tuple(
        float(np.sqrt(sum(norm_co2(f, k, None, phi) for f in uB))) for k in range(m + 1)
    )
    return sample


def _zero_hmean(coeffs: np.ndarray) -> np.ndarray:
    out = coeffs.copy()
    out[0, 0, :] = 0.0
    return out


@dataclass
class EnergyReport:
    """Snapshot plus running time-integrated values of the energy functionals.

    Sup parts and accumulated dissipation integrals are stored separately;
    E1/E2/E/G/X are the assembled combinations.
    """

    t: float
    e1_sup: float
    e1_int_h: float
    e1_int_3: float
    e2_sup: float
    e2_int_h: float
    e2_int_3: float
    g_int: float
    x_inst: float
    x_int: float
    x_int_eps: float
    E1: float
    E2: float
    E: float
    G: float
    X: float
    tan_norms: tuple = ()
    co_norms: tuple = ()
    lambda_norms: tuple = ()


def energy_report(samples: Sequence[DiagSample], m: int, s_exp: float) -> list[EnergyReport]:
    """Assemble E1, E2, E, G and X along a diagnostic series.

    Sup parts are running maxima; time integrals use the trapezoid rule on the
    sampling grid.  Time stamps must be strictly increasing.
    """
    ts = [smp.t for smp in samples]
    if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
        raise ValueError("non-monotone time stamps in diagnostic series")

    reports: list[EnergyReport] = []
    sup_tan = 0.0
    sup_w = 0.0
    ints = {k: 0.0 for k in ("e1h", "e13", "e2h", "e23", "g", "xh", "x3")}
    prev: DiagSample | None = None
    for smp in samples:
        eps = smp.eps
        tan2_uB = smp.tan_m_u**2 + smp.tan_m_B**2
        w2_co = smp.co_m1_wu**2 + smp.co_m1_wB**2
        sup_tan = max(sup_tan, tan2_uB)
        sup_w = max(sup_w, w2_co)
        if prev is not None:
            h = smp.t - prev.t
            for key, attr in (
                ("e1h", "dh_tan2"), ("e13", "d3_tan2"),
                ("e2h", "dh_w_co2"), ("e23", "d3_w_co2"),
                ("g", "d1B_co2"),
            ):
                ints[key] += 0.5 * h * (getattr(prev, attr) + getattr(smp, attr))
            ints["xh"] += 0.5 * h * (
                (prev.dh_co2 + prev.dh3_co2) + (smp.dh_co2 + smp.dh3_co2)
            )
            ints["x3"] += 0.5 * h * (
                (prev.d3_co2 + prev.d33_co2) + (smp.d3_co2 + smp.d33_co2)
            )
        e1 = sup_tan + 2.0 * ints["e1h"] + 2.0 * eps * ints["e13"]
        e2 = sup_w + 2.0 * ints["e2h"] + 2.0 * eps * ints["e23"]
        x_inst = (smp.co_m_u**2 + smp.co_m_B**2 + smp.co_m1_d3u**2 + smp.co_m1_d3B**2)
        x = x_inst + ints["xh"] + eps * ints["x3"]
        reports.append(EnergyReport(
            t=smp.t,
            e1_sup=sup_tan, e1_int_h=ints["e1h"], e1_int_3=ints["e13"],
            e2_sup=sup_w, e2_int_h=ints["e2h"], e2_int_3=ints["e23"],
            g_int=ints["g"], x_inst=x_inst, x_int=ints["xh"], x_int_eps=ints["x3"],
            E1=e1, E2=e2, E=e1 + e2, G=ints["g"], X=x,
            tan_norms=smp.tan_norms, co_norms=smp.co_norms,
            lambda_norms=(smp.lam_u, smp.lam_w),
        ))
        prev = smp
    return reports


def weighted_dissipation(samples: Sequence[DiagSample], sigma_exp: float) -> dict[str, float]:
    """Trapezoid integrals of (1+t)^sigma-weighted tangential dissipation.

    Returns the horizontal integral and the epsilon-weighted vertical one,
    as in the decay machinery's closing estimate.
    """
    horiz = 0.0
    vert = 0.0
    prev: DiagSample | None = None
    for smp in samples:
        if prev is not None:
            h = smp.t - prev.t
            wprev = (1.0 + prev.t) ** sigma_exp
            wcur = (1.0 + smp.t) ** sigma_exp
            horiz += 0.5 * h * (
                wprev * (prev.dh_u_tan2 + prev.dh_w_tan2)
                + wcur * (smp.dh_u_tan2 + smp.dh_w_tan2)
            )
            vert += 0.5 * h * smp.eps * (
                wprev * (prev.d3_u_tan2 + prev.d3_w_tan2)
                + wcur * (smp.d3_u_tan2 + smp.d3_w_tan2)
            )
        prev = smp
    return {"horizontal": horiz, "vertical_eps": vert}


def interpolation_ratio(sample: DiagSample, s: float) -> float:
    """Per-sample constant in the tangential interpolation bound.

    Ratio of ||u||_{H^m_tan}^2 to the bound
    (||Lambda^{-s} u|| + ||u||_{H^m_tan})^{2/(1+s)} * ||d_h u||_{H^m_tan}^{2s/(1+s)};
    finite along decaying trajectories.
    """
    num = sample.tan_m_u**2
    dh = np.sqrt(sample.dh_u_tan2)
    base = sample.lam_u + sample.tan_m_u
    denom = base ** (2.0 / (1.0 + s)) * dh ** (2.0 * s / (1.0 + s))
    if denom == 0.0:
        return float("nan") if num == 0.0 else float("inf")
    return float(num / denom)

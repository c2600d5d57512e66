"""Random initial data: Leray-projected, parity-compatible, band-limited fields
with a prescribed smallness amplitude.

Two spectral envelopes are provided: a smooth |k|^-2 profile for verification
ensembles, and a decay profile whose horizontal spectrum behaves like
|k_h|^(s-1) near k_h = 0 so that the negative-order horizontal norm of the
data is finite and algebraic time decay is observable on a wide box.
"""

from __future__ import annotations

import numpy as np

from .conormal import norm_co2
from .fields import VELOCITY_PARITY, Field, VectorField, derivative, leray_project
from .grid import SpectralGrid, dealias, forward
from .solver import MhdState, ModelVariant


def _random_coeffs(grid: SpectralGrid, rng: np.random.Generator, parities):
    comps = []
    for p in parities:
        vals = rng.standard_normal(grid.shape)
        comps.append(Field(dealias(forward(vals, p, grid), grid), p, grid))
    return VectorField(*comps)


def _envelope_ensemble(grid: SpectralGrid) -> np.ndarray:
    return 1.0 / (1.0 + grid.k2)


def _envelope_decay(grid: SpectralGrid, s: float) -> np.ndarray:
    kh = np.sqrt(grid.kh2)
    with np.errstate(divide="ignore"):
        horiz = np.where(kh > 0, kh ** (s - 1.0), 0.0)
    return horiz / (1.0 + grid.k2) ** 2


def random_solenoidal(grid: SpectralGrid, rng: np.random.Generator, *,
                      envelope: np.ndarray | None = None,
                      zero_hmean: bool = True) -> VectorField:
    """Random divergence-free velocity-parity field, dealiased, unnormalized."""
    v = _random_coeffs(grid, rng, VELOCITY_PARITY)
    if envelope is None:
        envelope = _envelope_ensemble(grid)
    v = VectorField(*(Field(c.coeffs * envelope, c.parity, grid) for c in v.components()))
    if zero_hmean:
        for c in v.components():
            c.coeffs[0, 0, :] = 0.0
    return leray_project(v)


def smallness_norm_sq(u: VectorField, B: VectorField | None, m: int) -> float:
    """Smallness measure of admissible data: ||.||_{H^m_co}^2 + ||d3 .||_{H^{m-1}_co}^2."""
    total = norm_co2(u, m)
    total += sum(norm_co2(derivative(c, 3), m - 1) for c in u.components())
    if B is not None:
        total += norm_co2(B, m)
        total += sum(norm_co2(derivative(c, 3), m - 1) for c in B.components())
    return total


def make_initial_state(grid: SpectralGrid, variant: ModelVariant, *, seed: int,
                       amplitude: float, m: int = 3, profile: str = "ensemble",
                       s: float = 0.95) -> MhdState:
    """Draw a random admissible state and scale its smallness norm to amplitude.

    profile 'ensemble' uses the smooth |k|^-2 spectrum; 'decay' uses the
    |k_h|^(s-1) horizontal profile needed for decay experiments.
    """
    rng = np.random.default_rng(seed)
    if profile == "ensemble":
        env = _envelope_ensemble(grid)
    elif profile == "decay":
        env = _envelope_decay(grid, s)
    else:
        raise ValueError(f"unknown profile {profile!r}")

    u = random_solenoidal(grid, rng, envelope=env)
    B = random_solenoidal(grid, rng, envelope=env) if variant.has_magnetic else None

    norm = np.sqrt(smallness_norm_sq(u, B, m))
    scale = amplitude / norm if norm > 0 else 0.0
    u = scale * u
    if B is not None:
        B = scale * B
    return MhdState(u=u, B=B, t=0.0, variant=variant)

"""Slab discretization: Fourier lattice in the horizontal, sine/cosine in the vertical.

The computational domain is the box [0, L1) x [0, L2) x [0, L3], periodic in the
two horizontal directions and bounded by slip walls at x3 = 0 and x3 = L3.  A
scalar field is stored as a complex coefficient array of shape
(n1, n2//2 + 1, n3): axis 0 carries the full signed FFT lattice
exp(2*pi*i*k*x1/L1), axis 1 the nonnegative half of the x2 lattice (fields are
real, so the negative-k2 modes are the implicit conjugates), and axis 2 carries
either cosine modes cos(k*pi*x3/L3) (Even parity) or sine modes
sin(k*pi*x3/L3) (Odd parity), with slot index equal to the vertical mode
number.  Odd fields have slot k=0 identically zero.

Physical samples live on the collocation grid x1_i = i*L1/n1, x2_j = j*L2/n2,
x3_l = (l + 1/2)*L3/n3 (vertical midpoints, so the walls are not grid points
and both vertical bases share one grid).

Normalization: coefficients are plain mode amplitudes and the L2 norm is the
coefficient sum weighted by L1*L2*pw(k2)*w3(k3), where pw = 2 for interior k2
columns (conjugate pairs) and 1 for k2 = 0 or Nyquist, and w3(0) = L3,
w3(k>=1) = L3/2.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import fft as sfft

# Worker count handed to scipy.fft; set_workers() rebinds it process-wide.
_workers = min(4, os.cpu_count() or 1)


def set_workers(n: int) -> None:
    """Set the thread count used by all transforms."""
    global _workers
    _workers = max(1, int(n))


class Parity(Enum):
    """Reflection symmetry about the wall x3 = 0.

    Even fields (cosine basis) have d3 f = 0 on the walls; Odd fields (sine
    basis) vanish there.  Both hold exactly, by basis construction.
    """

    EVEN = "even"
    ODD = "odd"

    def flip(self) -> "Parity":
        return Parity.ODD if self is Parity.EVEN else Parity.EVEN


@dataclass(frozen=True)
class SpectralGrid:
    """Immutable slab grid: mode lattices, dealias mask, and quadrature data."""

    n1: int
    n2: int
    n3: int
    L1: float
    L2: float
    L3: float
    kx: np.ndarray = field(repr=False)  # (n1,1,1) angular, 2*pi*idx/L1
    ky: np.ndarray = field(repr=False)  # (1,n2//2+1,1), nonnegative half
    kz: np.ndarray = field(repr=False)  # (1,1,n3) vertical, pi*k/L3
    dealias_mask: np.ndarray = field(repr=False)  # (n1,n2//2+1,n3) bool
    pair_w: np.ndarray = field(repr=False)  # (1,n2//2+1,1) conjugate-pair weights

    @property
    def shape(self) -> tuple[int, int, int]:
        """Physical sample shape."""
        return (self.n1, self.n2, self.n3)

    @property
    def kshape(self) -> tuple[int, int, int]:
        """Spectral coefficient shape (half spectrum along axis 1)."""
        return (self.n1, self.n2 // 2 + 1, self.n3)

    @property
    def kh2(self) -> np.ndarray:
        """|k_h|^2 multiplier, shape (n1, n2//2+1, 1)."""
        return self.kx**2 + self.ky**2

    @property
    def k2(self) -> np.ndarray:
        """|k|^2 multiplier, shape matching coefficients."""
        return self.kx**2 + self.ky**2 + self.kz**2

    @property
    def x1(self) -> np.ndarray:
        return np.arange(self.n1) * (self.L1 / self.n1)

    @property
    def x2(self) -> np.ndarray:
        return np.arange(self.n2) * (self.L2 / self.n2)

    @property
    def x3(self) -> np.ndarray:
        return (np.arange(self.n3) + 0.5) * (self.L3 / self.n3)

    @property
    def cell_volume(self) -> float:
        return (self.L1 / self.n1) * (self.L2 / self.n2) * (self.L3 / self.n3)

    @property
    def volume(self) -> float:
        return self.L1 * self.L2 * self.L3

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Physical coordinates broadcast to full (n1,n2,n3) arrays."""
        return np.meshgrid(self.x1, self.x2, self.x3, indexing="ij")

    def vertical_weights(self) -> np.ndarray:
        """Parseval weight per vertical slot, shape (n3,): L3 for k=0, L3/2 else."""
        w = np.full(self.n3, self.L3 / 2.0)
        w[0] = self.L3
        return w

    def norm_weights(self) -> np.ndarray:
        """Full Parseval weight L1*L2*pair_w*w3, broadcastable to coefficients."""
        return (self.L1 * self.L2) * self.pair_w * self.vertical_weights()

    def min_spacing(self) -> float:
        return min(self.L1 / self.n1, self.L2 / self.n2, self.L3 / self.n3)


def _signed_indices(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n).astype(int)


def make_grid(n1: int, n2: int, n3: int, L1: float, L2: float, L3: float) -> SpectralGrid:
    """Build a slab grid with wavenumber lattices and the 2/3-rule dealias mask."""
    for name, n in (("n1", n1), ("n2", n2), ("n3", n3)):
        if n < 4 or n % 2 != 0:
            raise ValueError(f"{name}={n}: grid counts must be even and >= 4")
    for name, L in (("L1", L1), ("L2", L2), ("L3", L3)):
        if not (L > 0):
            raise ValueError(f"{name}={L}: lengths must be positive")

    ix = _signed_indices(n1)
    iy = np.arange(n2 // 2 + 1)
    iz = np.arange(n3)
    kx = (2.0 * np.pi / L1) * ix.astype(float)
    ky = (2.0 * np.pi / L2) * iy.astype(float)
    kz = (np.pi / L3) * iz.astype(float)

    # Keep |index| <= floor((n-1)/3) per axis.  This is the 2/3 rule; the
    # (n-1) form also drops the edge mode when 3 | n, where +K,+K products
    # would alias back onto -K and contaminate the retained band.
    cut1 = (n1 - 1) // 3
    cut2 = (n2 - 1) // 3
    cut3 = (n3 - 1) // 3
    mask = (
        (np.abs(ix)[:, None, None] <= cut1)
        & (iy[None, :, None] <= cut2)
        & (iz[None, None, :] <= cut3)
    )

    pair_w = np.where((iy > 0) & (iy < n2 // 2), 2.0, 1.0)[None, :, None]

    return SpectralGrid(
        n1=n1, n2=n2, n3=n3, L1=float(L1), L2=float(L2), L3=float(L3),
        kx=kx[:, None, None], ky=ky[None, :, None], kz=kz[None, None, :],
        dealias_mask=mask, pair_w=pair_w,
    )


def _check_kshape(arr: np.ndarray, grid: SpectralGrid) -> None:
    if arr.shape[-3:] != grid.kshape:
        raise ValueError(f"coefficient shape {arr.shape} does not match grid {grid.kshape}")


def forward(values: np.ndarray, parity: Parity, grid: SpectralGrid) -> np.ndarray:
    """Physical samples -> spectral coefficients for the given parity.

    Accepts leading batch dimensions; the grid occupies the last three axes.
    """
    if values.shape[-3:] != grid.shape:
        raise ValueError(f"array shape {values.shape} does not match grid {grid.shape}")
    n3 = grid.n3
    c = sfft.rfft2(values, axes=(-3, -2), workers=_workers) / (grid.n1 * grid.n2)
    if parity is Parity.EVEN:
        y = sfft.dct(c, type=2, axis=-1, workers=_workers)
        y /= n3
        y[..., 0] *= 0.5
        return y
    y = sfft.dst(c, type=2, axis=-1, workers=_workers)
    out = np.zeros_like(y)
    out[..., 1:] = y[..., :-1] / n3  # dst-II index k <-> frequency k+1; drop freq n3
    return out


def inverse(coeffs: np.ndarray, parity: Parity, grid: SpectralGrid) -> np.ndarray:
    """Spectral coefficients -> real physical samples (batch dims allowed)."""
    _check_kshape(coeffs, grid)
    if parity is Parity.EVEN:
        tmp = coeffs.copy()
        tmp[..., 1:] *= 0.5
        vals = sfft.dct(tmp, type=3, axis=-1, workers=_workers)
    else:
        tmp = np.zeros_like(coeffs)
        tmp[..., :-1] = coeffs[..., 1:] * 0.5
        vals = sfft.dst(tmp, type=3, axis=-1, workers=_workers)
    out = sfft.irfft2(vals, s=(grid.n1, grid.n2), axes=(-3, -2), workers=_workers)
    return np.ascontiguousarray(out * (grid.n1 * grid.n2))


def dealias(coeffs: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Zero every mode outside the 2/3 mask (orthogonal projection)."""
    _check_kshape(coeffs, grid)
    return np.where(grid.dealias_mask, coeffs, 0.0)


def coeff_norm2(coeffs: np.ndarray, parity: Parity, grid: SpectralGrid,
                multiplier: np.ndarray | None = None) -> float:
    """Squared L2 norm from coefficients, optionally with a |multiplier|^2 weight.

    ``multiplier`` is a broadcastable nonnegative array (e.g. |k_h|^2) applied
    to |c|^2 before the Parseval sum.
    """
    mag = np.abs(coeffs) ** 2
    if multiplier is not None:
        mag = mag * multiplier
    return float(np.sum(mag * grid.norm_weights()))


def evaluate_at_x3(coeffs: np.ndarray, parity: Parity, grid: SpectralGrid,
                   x3: np.ndarray) -> np.ndarray:
    """Evaluate the vertical interpolant at arbitrary heights.

    Returns horizontal-spectral / vertical-physical data of shape
    (n1, n2//2+1, len(x3)); used for boundary checks and cross-grid sampling.
    """
    x3 = np.atleast_1d(np.asarray(x3, dtype=float))
    karr = grid.kz.ravel()
    phase = np.outer(karr, x3)  # (n3, nx3)
    basis = np.cos(phase) if parity is Parity.EVEN else np.sin(phase)
    return np.tensordot(coeffs, basis, axes=([2], [0]))


def evaluate_physical(coeffs: np.ndarray, parity: Parity, grid: SpectralGrid,
                      shape: tuple[int, int, int]) -> np.ndarray:
    """Resample onto another collocation grid of the same box.

    Horizontal resampling is done by coefficient padding/truncation on the
    full spectrum; the vertical interpolant is evaluated at the target
    midpoints.  Cold path, used for cross-grid comparisons.
    """
    m1, m2, m3 = shape
    x3 = (np.arange(m3) + 0.5) * (grid.L3 / m3)
    half = evaluate_at_x3(coeffs, parity, grid, x3)  # (n1, n2//2+1, m3)

    # rebuild the full ky spectrum from the stored half
    n1, n2 = grid.n1, grid.n2
    full = np.zeros((n1, n2, m3), dtype=complex)
    full[:, : n2 // 2 + 1] = half
    ix_flip = np.mod(-np.arange(n1), n1)
    for iy in range(n2 // 2 + 1, n2):
        full[:, iy] = np.conj(half[ix_flip, n2 - iy])

    out = np.zeros((m1, m2, m3), dtype=complex)
    ix_src = _signed_indices(n1)
    iy_src = _signed_indices(n2)
    keep1 = np.abs(ix_src) <= (min(n1, m1) // 2 - 1)
    keep2 = np.abs(iy_src) <= (min(n2, m2) // 2 - 1)
    src1 = np.nonzero(keep1)[0]
    src2 = np.nonzero(keep2)[0]
    dst1 = np.mod(ix_src[src1], m1)
    dst2 = np.mod(iy_src[src2], m2)
    out[np.ix_(dst1, dst2)] = full[np.ix_(src1, src2)]
    vals = sfft.ifft2(out, axes=(0, 1), workers=_workers) * (m1 * m2)
    return np.ascontiguousarray(vals.real)

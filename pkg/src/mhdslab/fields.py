"""Vector-field calculus on the slab: derivatives, div/curl, Leray projection,
and dealiased advection products, all parity-aware.

Parity algebra used throughout: horizontal derivatives preserve parity, the
vertical derivative flips it, and pointwise products multiply parities
(Even*Even = Odd*Odd = Even, Even*Odd = Odd).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import (
    Parity,
    SpectralGrid,
    coeff_norm2,
    dealias,
    forward,
    inverse,
)

VELOCITY_PARITY = (Parity.EVEN, Parity.EVEN, Parity.ODD)
VORTICITY_PARITY = (Parity.ODD, Parity.ODD, Parity.EVEN)


@dataclass
class Field:
    """One scalar component: complex spectral coefficients plus a parity tag."""

    coeffs: np.ndarray
    parity: Parity
    grid: SpectralGrid

    @classmethod
    def zeros(cls, parity: Parity, grid: SpectralGrid) -> "Field":
        return cls(np.zeros(grid.kshape, dtype=complex), parity, grid)

    @classmethod
    def from_physical(cls, values: np.ndarray, parity: Parity, grid: SpectralGrid) -> "Field":
        return cls(forward(values, parity, grid), parity, grid)

    def physical(self) -> np.ndarray:
        return inverse(self.coeffs, self.parity, self.grid)

    def copy(self) -> "Field":
        return Field(self.coeffs.copy(), self.parity, self.grid)

    def dealiased(self) -> "Field":
        return Field(dealias(self.coeffs, self.grid), self.parity, self.grid)

    def l2(self) -> float:
        return float(np.sqrt(coeff_norm2(self.coeffs, self.parity, self.grid)))

    def __add__(self, other: "Field") -> "Field":
        _require_same_parity(self, other)
        return Field(self.coeffs + other.coeffs, self.parity, self.grid)

    def __sub__(self, other: "Field") -> "Field":
        _require_same_parity(self, other)
        return Field(self.coeffs - other.coeffs, self.parity, self.grid)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.coeffs * scalar, self.parity, self.grid)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(-self.coeffs, self.parity, self.grid)


def _require_same_parity(a: Field, b: Field) -> None:
    if a.parity is not b.parity:
        raise ValueError(f"parity mismatch: {a.parity} vs {b.parity}")


@dataclass
class VectorField:
    """Three scalar components sharing one grid.

    Velocity/magnetic-type fields carry parity (Even, Even, Odd), which encodes
    the slip condition u3 = d3 u_h = 0 on the walls; curls carry (Odd, Odd, Even).
    """

    c1: Field
    c2: Field
    c3: Field

    @property
    def grid(self) -> SpectralGrid:
        return self.c1.grid

    @property
    def parities(self) -> tuple[Parity, Parity, Parity]:
        return (self.c1.parity, self.c2.parity, self.c3.parity)

    @property
    def slip_compatible(self) -> bool:
        return self.parities == VELOCITY_PARITY

    def components(self) -> tuple[Field, Field, Field]:
        return (self.c1, self.c2, self.c3)

    @classmethod
    def zeros(cls, grid: SpectralGrid, parities=VELOCITY_PARITY) -> "VectorField":
        return cls(*(Field.zeros(p, grid) for p in parities))

    @classmethod
    def from_physical(cls, values, grid: SpectralGrid, parities=VELOCITY_PARITY) -> "VectorField":
        return cls(*(Field.from_physical(v, p, grid) for v, p in zip(values, parities)))

    def physical(self) -> list[np.ndarray]:
        return [c.physical() for c in self.components()]

    def copy(self) -> "VectorField":
        return VectorField(*(c.copy() for c in self.components()))

    def dealiased(self) -> "VectorField":
        return VectorField(*(c.dealiased() for c in self.components()))

    def l2(self) -> float:
        return float(np.sqrt(sum(c.l2() ** 2 for c in self.components())))

    def max_abs(self) -> float:
        return max(float(np.abs(c.physical()).max()) for c in self.components())

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(*(a + b for a, b in zip(self.components(), other.components())))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(*(a - b for a, b in zip(self.components(), other.components())))

    def __mul__(self, scalar: float) -> "VectorField":
        return VectorField(*(c * scalar for c in self.components()))

    __rmul__ = __mul__


def inner(f: Field, g: Field) -> float:
    """L2 inner product of two real fields, evaluated in coefficient space."""
    _require_same_parity(f, g)
    grid = f.grid
    s = np.sum(np.conj(f.coeffs) * g.coeffs * grid.norm_weights())
    return float(s.real)


def vector_inner(v: VectorField, w: VectorField) -> float:
    return sum(inner(a, b) for a, b in zip(v.components(), w.components()))


def derivative(f: Field, axis: int) -> Field:
    """Exact spectral derivative; axis 3 flips the parity."""
    grid = f.grid
    if axis == 1:
        return Field(1j * grid.kx * f.coeffs, f.parity, grid)
    if axis == 2:
        return Field(1j * grid.ky * f.coeffs, f.parity, grid)
    if axis == 3:
        if f.parity is Parity.EVEN:
            # d3 cos(k z) = -k sin(k z)
            return Field(-grid.kz * f.coeffs, Parity.ODD, grid)
        # d3 sin(k z) = k cos(k z)
        return Field(grid.kz * f.coeffs, Parity.EVEN, grid)
    raise ValueError(f"axis must be 1, 2 or 3, got {axis}")


def horizontal_laplacian(f: Field) -> Field:
    return Field(-f.grid.kh2 * f.coeffs, f.parity, f.grid)


def divergence(v: VectorField) -> Field:
    d = derivative(v.c1, 1) + derivative(v.c2, 2) + derivative(v.c3, 3)
    return d


def div_norm(v: VectorField) -> float:
    return divergence(v).l2()


def grad_norm(v: VectorField) -> float:
    return float(np.sqrt(sum(
        derivative(c, ax).l2() ** 2 for c in v.components() for ax in (1, 2, 3)
    )))


def curl(v: VectorField) -> VectorField:
    w1 = derivative(v.c3, 2) - derivative(v.c2, 3)
    w2 = derivative(v.c1, 3) - derivative(v.c3, 1)
    w3 = derivative(v.c2, 1) - derivative(v.c1, 2)
    return VectorField(w1, w2, w3)


def gradient(p: Field) -> VectorField:
    return VectorField(derivative(p, 1), derivative(p, 2), derivative(p, 3))


def leray_project(v: VectorField) -> VectorField:
    """Orthogonal projection onto divergence-free fields.

    Per mode this is v + g*(d.v)/|k|^2 in the mixed Fourier/sine-cosine
    representation, where d and g are the divergence and gradient symbols.
    The k=0 mode is untouched in the horizontal components; the vertical
    zero slot is structurally empty for Odd fields.
    """
    if not v.slip_compatible:
        raise ValueError("leray_project expects velocity-type parity (Even, Even, Odd)")
    grid = v.grid
    div = divergence(v).coeffs
    k2 = grid.k2
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(k2 > 0, div / k2, 0.0)
    # g = (i kx, i ky, -kz) applied to phi
    return VectorField(
        Field(v.c1.coeffs + 1j * grid.kx * phi, Parity.EVEN, grid),
        Field(v.c2.coeffs + 1j * grid.ky * phi, Parity.EVEN, grid),
        Field(v.c3.coeffs + (-grid.kz) * phi, Parity.ODD, grid),
    )


def solve_pressure(forcing: VectorField) -> Field:
    """Solve Laplace(p) = div(forcing) mode-by-mode; p is an Even scalar.

    The horizontal-mean vertical-mean mode of p is set to zero.  The gradient
    of the result equals forcing minus its Leray projection.
    """
    grid = forcing.grid
    div = divergence(forcing).coeffs
    k2 = grid.k2
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(k2 > 0, -div / k2, 0.0)
    return Field(p, Parity.EVEN, grid)


def _parity_product(pa: Parity, pb: Parity) -> Parity:
    return Parity.EVEN if pa is pb else Parity.ODD


def advect_scalar(a_phys: list[np.ndarray], f: Field) -> Field:
    """a . grad f with the advecting field already in physical space."""
    grid = f.grid
    acc = np.zeros(grid.shape)
    for ai, axis in zip(a_phys, (1, 2, 3)):
        acc += ai * derivative(f, axis).physical()
    out = forward(acc, f.parity, grid)
    return Field(dealias(out, grid), f.parity, grid)


def advect(a: VectorField, f):
    """Convective derivative a . grad f, dealiased; f may be a Field or VectorField.

    Output parity matches f componentwise: each term a_i * d_i f has the parity
    of f (Even*same, Odd*flipped), so the sum is parity-pure.
    """
    if not a.slip_compatible:
        raise ValueError("advecting field must have velocity-type parity")
    a_phys = a.physical()
    if isinstance(f, Field):
        return advect_scalar(a_phys, f)
    return VectorField(*(advect_scalar(a_phys, c) for c in f.components()))


def write_snapshot(path: str | Path, fields: dict[str, VectorField], *,
                   time: float, epsilon: float) -> None:
    """Persist vector fields as flat binary plus a JSON sidecar header.

    Layout: for each named field, components in order (c1, c2, c3), each a
    C-order (n1, n2//2 + 1, n3) half-spectrum complex array stored as
    interleaved little-endian float64 (re, im) pairs, concatenated in the
    order listed in the header.
    """
    path = Path(path)
    names = sorted(fields)
    grid = fields[names[0]].grid
    blobs = []
    for name in names:
        for c in fields[name].components():
            blobs.append(np.ascontiguousarray(c.coeffs, dtype="<c16").tobytes())
    path.with_suffix(".bin").write_bytes(b"".join(blobs))
    header = {
        "n1": grid.n1, "n2": grid.n2, "n3": grid.n3,
        "L1": grid.L1, "L2": grid.L2, "L3": grid.L3,
        "fields": names,
        "parity": {name: [p.value for p in fields[name].parities] for name in names},
        "time": time,
        "epsilon": epsilon,
        "layout": "per field, components c1,c2,c3; C-order (n1, n2//2+1, n3) "
                  "half-spectrum complex128 as little-endian float64 (re,im) pairs",
    }
    path.with_suffix(".json").write_text(json.dumps(header, indent=2))


def read_snapshot(path: str | Path):
    """Load a snapshot written by write_snapshot.

    Returns (fields, header) where fields maps name -> VectorField.
    """
    from .grid import make_grid

    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    grid = make_grid(header["n1"], header["n2"], header["n3"],
                     header["L1"], header["L2"], header["L3"])
    raw = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<c16")
    per_comp = int(np.prod(grid.kshape))
    fields = {}
    offset = 0
    for name in header["fields"]:
        comps = []
        for pval in header["parity"][name]:
            block = raw[offset:offset + per_comp].reshape(grid.kshape).copy()
            comps.append(Field(block, Parity(pval), grid))
            offset += per_comp
        fields[name] = VectorField(*comps)
    return fields, header

"""Periodic computational grids and spectral field operations.

The 1D grid discretizes a large periodic interval [-X, X) standing in for
the real line; fields of interest decay exponentially, so the boundary sits
in the numerical tail. The 2D grid is the tensor product with a periodic
transverse coordinate y in [0, 2*pi*L), whose integer Fourier modes carry
wavenumbers n/L.

All quadrature is the trapezoid rule on the uniform periodic grid (exact
weight h per node), which is spectrally accurate for smooth periodic
integrands.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatch, ModeOutOfRange

_MAGIC = b"NLSF"
_VERSION = 1


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-half_width, half_width).

    Attributes:
        n: Number of nodes (even, positive).
        half_width: Half-length X of the periodic interval.
    """

    n: int
    half_width: float

    def __post_init__(self) -> None:
        if self.n <= 0 or self.n % 2 != 0:
            raise ValueError(f"n must be even and positive, got {self.n}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def spacing(self) -> float:
        """Node spacing h = 2X/n, also the quadrature weight."""
        return 2.0 * self.half_width / self.n

    @cached_property
    def nodes(self) -> NDArray[np.float64]:
        """Nodes -X + j*h for j = 0..n-1 (right endpoint excluded)."""
        return -self.half_width + self.spacing * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> NDArray[np.float64]:
        """Angular wavenumbers in FFT layout for period 2X."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    @cached_property
    def second_derivative_matrix(self) -> NDArray[np.float64]:
        """Dense spectral d2/dx2 matrix (real symmetric).

        Built by applying the Fourier symbol -k^2 to the identity; symmetry
        is enforced exactly so dense symmetric eigensolvers apply.
        """
        symbol = -(self.wavenumbers**2)
        cols = np.fft.ifft(symbol[:, None] * np.fft.fft(np.eye(self.n), axis=0), axis=0).real
        return 0.5 * (cols + cols.T)

    def reflection_indices(self) -> NDArray[np.intp]:
        """Index permutation realizing x -> -x on the periodic nodes."""
        return (-np.arange(self.n)) % self.n


@dataclass(frozen=True)
class Grid2D:
    """Tensor grid on [-X, X) x [0, 2*pi*L).

    Attributes:
        gx: Longitudinal grid.
        ny: Number of transverse nodes (even, positive).
        period_scale: L; transverse period is 2*pi*L and mode n has
            wavenumber n/L.
    """

    gx: Grid1D
    ny: int
    period_scale: float

    def __post_init__(self) -> None:
        if self.ny <= 0 or self.ny % 2 != 0:
            raise ValueError(f"ny must be even and positive, got {self.ny}")
        if not self.period_scale > 0:
            raise ValueError(f"period_scale must be positive, got {self.period_scale}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.gx.n, self.ny)

    @property
    def spacing_y(self) -> float:
        return 2.0 * np.pi * self.period_scale / self.ny

    @property
    def cell_area(self) -> float:
        """Quadrature weight per node, h_x * h_y."""
        return self.gx.spacing * self.spacing_y

    @cached_property
    def y_nodes(self) -> NDArray[np.float64]:
        return self.spacing_y * np.arange(self.ny)

    @cached_property
    def y_wavenumbers(self) -> NDArray[np.float64]:
        """Wavenumbers n/L in FFT layout."""
        return np.fft.fftfreq(self.ny, d=1.0 / self.ny) / self.period_scale


GridLike = Grid1D | Grid2D


def _check_shape(values: NDArray, grid: GridLike) -> None:
    expected = (grid.n,) if isinstance(grid, Grid1D) else grid.shape
    if values.shape != expected:
        raise DimensionMismatch(f"field shape {values.shape} does not match grid {expected}")


@dataclass(frozen=True)
class Field:
    """A sampled function paired with its grid.

    kind is derived from the dtype: complex arrays are "complex", anything
    else is stored as float64 and reported "real".
    """

    values: NDArray
    grid: GridLike

    def __post_init__(self) -> None:
        _check_shape(self.values, self.grid)

    @property
    def kind(self) -> str:
        return "complex" if np.iscomplexobj(self.values) else "real"


def apply_laplacian(values: NDArray, grid: GridLike) -> NDArray:
    """Spectral Laplacian of a field (1D: d2/dx2; 2D adds d2/dy2).

    Real input returns a real array; complex input stays complex.
    """
    _check_shape(values, grid)
    if isinstance(grid, Grid1D):
        out = np.fft.ifft(-(grid.wavenumbers**2) * np.fft.fft(values))
    else:
        k2 = grid.gx.wavenumbers[:, None] ** 2 + grid.y_wavenumbers[None, :] ** 2
        out = np.fft.ifft2(-k2 * np.fft.fft2(values))
    return out if np.iscomplexobj(values) else out.real


def apply_laplacian_fd(values: NDArray, grid: GridLike) -> NDArray:
    """Second-order centered finite-difference Laplacian (periodic).

    Cross-validation partner for apply_laplacian; agrees to O(h^2) on
    smooth fields.
    """
    _check_shape(values, grid)
    if isinstance(grid, Grid1D):
        h2 = grid.spacing**2
        return (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / h2
    hx2 = grid.gx.spacing**2
    hy2 = grid.spacing_y**2
    lap_x = (np.roll(values, -1, axis=0) - 2.0 * values + np.roll(values, 1, axis=0)) / hx2
    lap_y = (np.roll(values, -1, axis=1) - 2.0 * values + np.roll(values, 1, axis=1)) / hy2
    return lap_x + lap_y


def inner_product(f: NDArray, g: NDArray, grid: GridLike) -> float:
    """Real L2 pairing Re sum f * conj(g) * weight."""
    _check_shape(f, grid)
    if f.shape != g.shape:
        raise DimensionMismatch(f"operand shapes differ: {f.shape} vs {g.shape}")
    w = grid.spacing if isinstance(grid, Grid1D) else grid.cell_area
    return float(np.real(np.sum(f * np.conjugate(g))) * w)


def l2_norm(f: NDArray, grid: GridLike) -> float:
    return float(np.sqrt(inner_product(f, f, grid)))


def h1_norm(f: NDArray, grid: Grid1D) -> float:
    """Sobolev norm sqrt(||f||^2 + ||f'||^2) with a spectral derivative."""
    _check_shape(f, grid)
    df = np.fft.ifft(1j * grid.wavenumbers * np.fft.fft(f))
    if not np.iscomplexobj(f):
        df = df.real
    return float(np.sqrt(inner_product(f, f, grid) + inner_product(df, df, grid)))


def project_mode(values: NDArray, grid: Grid2D, n: int) -> NDArray[np.complex128]:
    """Transverse Fourier coefficient u_n(x) = (1/2piL) int u e^{-iny/L} dy.

    Raises:
        ModeOutOfRange: if |n| >= ny/2 (mode not resolved by the grid).
    """
    _check_shape(values, grid)
    if abs(n) >= grid.ny // 2:
        raise ModeOutOfRange(f"mode {n} not resolved with ny={grid.ny}")
    return np.asarray(np.fft.fft(values, axis=1)[:, n % grid.ny] / grid.ny, dtype=np.complex128)


def write_field(path, field: Field) -> None:
    """Dump a field in the NLSF binary format.

    Little-endian: magic "NLSF", version u32, dims u32 x 2 (1D fields use
    dims (n, 1)), kind u8 (0 real, 1 complex), then (re, im) f64 pairs with
    x as the fastest index.
    """
    vals = np.asarray(field.values)
    if isinstance(field.grid, Grid1D):
        dims = (field.grid.n, 1)
        flat = vals.astype(np.complex128)
    else:
        dims = field.grid.shape
        flat = vals.astype(np.complex128).ravel(order="F")
    header = _MAGIC + struct.pack("<IIIB", _VERSION, dims[0], dims[1], 1 if field.kind == "complex" else 0)
    pairs = np.empty(2 * flat.size, dtype="<f8")
    pairs[0::2] = flat.real
    pairs[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pairs.tobytes())


def read_field(path, grid: GridLike) -> Field:
    """Read an NLSF dump back onto a grid (shape must match)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != _MAGIC:
        raise ValueError("not an NLSF file")
    version, nx, ny, kind = struct.unpack("<IIIB", raw[4:17])
    if version != _VERSION:
        raise ValueError(f"unsupported NLSF version {version}")
    pairs = np.frombuffer(raw[17:], dtype="<f8")
    if pairs.size != 2 * nx * ny:
        raise ValueError("payload size does not match header dims")
    flat = pairs[0::2] + 1j * pairs[1::2]
    if isinstance(grid, Grid1D):
        if (nx, ny) != (grid.n, 1):
            raise DimensionMismatch(f"dump dims {(nx, ny)} do not match grid ({grid.n}, 1)")
        vals = flat
    else:
        if (nx, ny) != grid.shape:
            raise DimensionMismatch(f"dump dims {(nx, ny)} do not match grid {grid.shape}")
        vals = flat.reshape(grid.shape, order="F")
    if kind == 0:
        vals = vals.real.copy()
    return Field(values=vals, grid=grid)

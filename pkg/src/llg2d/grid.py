"""Periodic 2D grid and Fourier-spectral differential operators.

Conventions:

* Physical fields are real ``float64`` arrays whose last two axes are
  ``(nx, ny)``; leading axes (vector components, stacked fields) broadcast
  through every operator.
* The forward transform is the unnormalized real FFT over the last two axes
  and the inverse carries the ``1/(nx*ny)`` factor.  Every operator is
  specified by its physical-space action, so nothing downstream depends on
  this normalization choice.
* Wavenumbers follow FFT ordering: index ``j`` maps to ``(2*pi/L)*j`` for
  ``j <= N/2`` and ``(2*pi/L)*(j - N)`` above.
* First derivatives zero the Nyquist column (the unpaired mode has no
  sign-consistent odd derivative on a real grid); the Laplacian keeps it.
* No dealiasing by default.  A grid built with ``dealias=True`` exposes a
  2/3-rule truncation that time steppers apply to nonlinear products only;
  all reproduction runs leave it off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid2D",
    "build_grid",
    "forward",
    "inverse",
    "laplacian",
    "gradient",
    "helmholtz_solve",
    "dealias_product",
]


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Uniform periodic rectangle with precomputed wavenumber tables."""

    nx: int
    ny: int
    lx: float
    ly: float
    x0: float
    y0: float
    dealias: bool
    x: np.ndarray  # (nx,) node coordinates x0 + j*lx/nx
    y: np.ndarray  # (ny,)
    kx: np.ndarray  # (nx,) angular wavenumbers, FFT ordering
    ky: np.ndarray  # (ny,)
    X: np.ndarray  # (nx, ny) coordinate meshes, "ij" indexing
    Y: np.ndarray
    _ikx: np.ndarray  # (nx, 1) derivative table, Nyquist zeroed
    _iky: np.ndarray  # (1, ny//2+1) half-spectrum derivative table
    _k2: np.ndarray  # (nx, ny//2+1) |k|^2, Nyquist kept
    _mask: np.ndarray  # (nx, ny//2+1) 2/3-rule keep-mask

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return (self.lx / self.nx) * (self.ly / self.ny)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid2D):
            return NotImplemented
        return (self.nx, self.ny, self.lx, self.ly, self.x0, self.y0) == (
            other.nx,
            other.ny,
            other.lx,
            other.ly,
            other.x0,
            other.y0,
        )

    def __hash__(self) -> int:
        return hash((self.nx, self.ny, self.lx, self.ly, self.x0, self.y0))

    def __repr__(self) -> str:
        return (
            f"Grid2D(nx={self.nx}, ny={self.ny}, lx={self.lx:g}, ly={self.ly:g}, "
            f"x0={self.x0:g}, y0={self.y0:g})"
        )


def build_grid(
    nx: int,
    ny: int,
    lx: float,
    ly: float,
    *,
    x0: float = 0.0,
    y0: float = 0.0,
    dealias: bool = False,
) -> Grid2D:
    """Build a periodic grid on ``[x0, x0+lx) x [y0, y0+ly)``.

    ``nx`` and ``ny`` must be even and at least 4 (real-transform symmetry
    and a minimal resolution floor); ``lx, ly`` must be positive.
    """
    if nx != int(nx) or ny != int(ny):
        raise ValueError(f"grid sizes must be integers, got nx={nx!r}, ny={ny!r}")
    nx, ny = int(nx), int(ny)
    if nx < 4 or ny < 4:
        raise ValueError(f"grid sizes must be >= 4, got nx={nx}, ny={ny}")
    if nx % 2 or ny % 2:
        raise ValueError(f"grid sizes must be even, got nx={nx}, ny={ny}")
    if lx <= 0 or ly <= 0:
        raise ValueError(f"domain lengths must be positive, got lx={lx}, ly={ly}")

    x = x0 + (lx / nx) * np.arange(nx)
    y = y0 + (ly / ny) * np.arange(ny)
    kx = 2.0 * np.pi * np.fft.fftfreq(nx, d=lx / nx)
    ky = 2.0 * np.pi * np.fft.fftfreq(ny, d=ly / ny)
    ky_half = 2.0 * np.pi * np.fft.rfftfreq(ny, d=ly / ny)

    kx_d = kx.copy()
    kx_d[nx // 2] = 0.0
    ky_d = ky_half.copy()
    ky_d[-1] = 0.0

    k2 = kx[:, None] ** 2 + ky_half[None, :] ** 2
    mask = (np.abs(kx[:, None]) <= (2.0 / 3.0) * np.abs(kx).max()) & (
        ky_half[None, :] <= (2.0 / 3.0) * ky_half.max()
    )

    X, Y = np.meshgrid(x, y, indexing="ij")
    return Grid2D(
        nx=nx,
        ny=ny,
        lx=float(lx),
        ly=float(ly),
        x0=float(x0),
        y0=float(y0),
        dealias=bool(dealias),
        x=x,
        y=y,
        kx=kx,
        ky=ky,
        X=X,
        Y=Y,
        _ikx=1j * kx_d[:, None],
        _iky=1j * ky_d[None, :],
        _k2=k2,
        _mask=mask,
    )


def forward(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    """Unnormalized real FFT over the last two axes."""
    return np.fft.rfft2(f)


def inverse(grid: Grid2D, fh: np.ndarray) -> np.ndarray:
    """Inverse transform back to the physical grid (carries 1/(nx*ny))."""
    return np.fft.irfft2(fh, s=grid.shape)


def laplacian(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    """Spectral Laplacian; exact for resolved modes."""
    return inverse(grid, -grid._k2 * forward(grid, f))


def gradient(grid: Grid2D, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectral gradient ``(df/dx, df/dy)``."""
    fh = forward(grid, f)
    return inverse(grid, grid._ikx * fh), inverse(grid, grid._iky * fh)


def helmholtz_solve(grid: Grid2D, f: np.ndarray, c: float) -> np.ndarray:
    """Solve ``(I - c*Laplacian) u = f`` mode-wise; exact inverse for c > 0."""
    if c <= 0:
        raise ValueError(f"helmholtz_solve requires c > 0, got c={c}")
    return inverse(grid, forward(grid, f) / (1.0 + c * grid._k2))


def dealias_product(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    """Apply the 2/3-rule truncation when the grid enables it; no-op otherwise."""
    if not grid.dealias:
        return f
    return inverse(grid, grid._mask * forward(grid, f))

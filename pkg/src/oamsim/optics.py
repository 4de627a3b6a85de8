"""Scalar Fourier optics on centered grids.

All spectral transforms use the half-sample-centered DFT: with spatial
samples at ``(j - n/2 + 1/2) * pitch`` the frequencies sit at
``(k - n/2 + 1/2) / extent``. This transform is unitary and keeps the
90 degree rotational symmetry of the lattice, so it never mixes azimuthal
charges that a rotationally symmetric operator should preserve.
"""

from __future__ import annotations

import numpy as np

from .fieldgrid import ComplexField, GridSpec
from .hologram import HologramSpec


class NyquistError(ValueError):
    """Requested spatial frequencies are not representable on the grid."""


def _centered_phase(n: int, sign: int):
    c = -n / 2 + 0.5
    k = np.arange(n)
    pre = np.exp(sign * 2j * np.pi * c * k / n)
    post = np.exp(sign * 2j * np.pi * (c * k + c * c) / n)
    return pre, post


def cdft2(a: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Unitary 2D DFT with half-sample-centered input and output indices."""
    n = a.shape[0]
    sign = 1 if inverse else -1
    pre, post = _centered_phase(n, sign)
    b = a * pre[None, :] * pre[:, None]
    b = np.fft.ifft2(b, norm="ortho") if inverse else np.fft.fft2(b, norm="ortho")
    return b * post[None, :] * post[:, None]


def frequency_grid(grid: GridSpec) -> GridSpec:
    """Grid of spatial frequencies (cycles/mm) matching ``cdft2`` output."""
    return GridSpec(grid.n, 1.0 / grid.pitch)


def nyquist(grid: GridSpec) -> float:
    return 0.5 / grid.pitch


def angular_spectrum(f: ComplexField, distance: float, wavelength: float) -> ComplexField:
    """Exact scalar free-space propagation; evanescent waves are dropped."""
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    if nyquist(f.grid) * np.sqrt(2) >= 1.0 / wavelength:
        raise NyquistError("grid pitch too fine: transverse frequencies reach the evanescent cut-off")
    if distance == 0:
        return f
    fx, fy = frequency_grid(f.grid).mesh()
    arg = 1.0 / wavelength**2 - fx**2 - fy**2
    kernel = np.where(arg > 0, np.exp(2j * np.pi * distance * np.sqrt(np.maximum(arg, 0.0))), 0.0)
    return f.with_samples(cdft2(cdft2(f.samples) * kernel, inverse=True))


def far_field(f: ComplexField) -> ComplexField:
    """Spectrum of ``f`` sampled on its frequency grid.

    Samples approximate the continuous transform, so ``power()`` is the same
    in both planes.
    """
    return ComplexField(frequency_grid(f.grid), cdft2(f.samples) * f.grid.n * f.grid.pitch**2)


def extract_order(f_after_mask: ComplexField, spec: HologramSpec, n: int) -> ComplexField:
    """Complex envelope of the n-th diffraction order behind a grating.

    Demodulates the n-th carrier, keeps spatial frequencies within half the
    carrier spacing (a disk, so azimuthal charge is preserved) and returns
    to the original grid.
    """
    grid = f_after_mask.grid
    cutoff = spec.line_density / 2
    if abs(n) * spec.line_density + cutoff > nyquist(grid):
        raise NyquistError(
            f"order {n} at {spec.line_density} lines/mm exceeds the grid Nyquist limit {nyquist(grid):.4g}"
        )
    X, _ = grid.mesh()
    demod = f_after_mask.samples * np.exp(-2j * np.pi * n * X / spec.period)
    fx, fy = frequency_grid(grid).mesh()
    window = fx**2 + fy**2 < cutoff**2
    return f_after_mask.with_samples(cdft2(cdft2(demod) * window, inverse=True))

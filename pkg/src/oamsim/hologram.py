"""Blazed fork holograms: full phase masks and the idealized first-order action."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fieldgrid import ComplexField, GridSpec

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class HologramSpec:
    """Fork phase grating.

    ``dislocation_offset`` is the lateral position (mm) of the fork center
    relative to the beam axis. Lengths in mm, ``line_density`` in lines/mm.
    """

    delta_m: int = 1
    line_density: float = 20.0
    dislocation_offset: tuple[float, float] = (0.0, 0.0)
    blaze_depth: float = TWO_PI
    first_order_efficiency: float = 0.18
    aperture: float = 5.0

    def __post_init__(self):
        if int(self.delta_m) != self.delta_m:
            raise ValueError("delta_m must be an integer")
        if not self.line_density > 0:
            raise ValueError("line_density must be positive")
        if not 0 < self.blaze_depth <= TWO_PI:
            raise ValueError("blaze_depth must lie in (0, 2*pi]")
        if not 0 <= self.first_order_efficiency <= 1:
            raise ValueError("first_order_efficiency must lie in [0, 1]")
        if not self.aperture > 0:
            raise ValueError("aperture must be positive")
        object.__setattr__(self, "dislocation_offset", tuple(float(v) for v in self.dislocation_offset))

    @property
    def period(self) -> float:
        return 1.0 / self.line_density


def rotate_180(spec: HologramSpec) -> HologramSpec:
    """Flip the plate: the fork reverses handedness and its offset mirrors in x.

    The blazed order stays on the +1 side (the fiber follows it).
    """
    dx, dy = spec.dislocation_offset
    return replace(spec, delta_m=-spec.delta_m, dislocation_offset=(-dx, dy))


def fork_azimuth(spec: HologramSpec, grid: GridSpec) -> np.ndarray:
    _, phi = grid.polar(center=spec.dislocation_offset)
    return phi


def spiral_phase(spec: HologramSpec, grid: GridSpec) -> np.ndarray:
    """exp(i delta_m phi') about the displaced dislocation."""
    if spec.delta_m == 0:
        return np.ones((grid.n, grid.n), dtype=complex)
    X, Y = grid.mesh()
    dx, dy = X - spec.dislocation_offset[0], Y - spec.dislocation_offset[1]
    rho = np.hypot(dx, dy)
    m = abs(spec.delta_m)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(rho > 0, (dx + 1j * np.sign(spec.delta_m) * dy) / rho, 1.0)
    return unit**m


def aperture_mask(spec: HologramSpec, grid: GridSpec) -> np.ndarray:
    X, Y = grid.mesh()
    half = spec.aperture / 2
    return (np.abs(X) <= half) & (np.abs(Y) <= half)


def transmittance(spec: HologramSpec, grid: GridSpec) -> ComplexField:
    """Phase-only mask exp(i * blaze * saw(delta_m phi' + 2 pi x / period)).

    ``saw`` maps phase onto [0, 1). Outside the aperture the mask is zero.
    """
    X, _ = grid.mesh()
    theta = spec.delta_m * fork_azimuth(spec, grid) + TWO_PI * X / spec.period
    if spec.blaze_depth == TWO_PI:
        # saw is exact modulo 2 pi here; skip the mod to avoid jumps in rounding
        t = np.exp(1j * theta)
    else:
        t = np.exp(1j * spec.blaze_depth * np.mod(theta, TWO_PI) / TWO_PI)
    return ComplexField(grid, np.where(aperture_mask(spec, grid), t, 0))


def order_amplitude(blaze_depth: float, n: int) -> complex:
    """Fourier coefficient of exp(i b saw(theta)) for order n."""
    x = blaze_depth / TWO_PI - n
    if x == 0:
        return 1.0 + 0j
    return (np.exp(1j * TWO_PI * x) - 1) / (1j * TWO_PI * x)


def apply_first_order(f: ComplexField, spec: HologramSpec) -> ComplexField:
    """Idealized +1 order: add the fork charge, scale by sqrt(efficiency), no carrier."""
    return f.with_samples(f.samples * spiral_phase(spec, f.grid) * np.sqrt(spec.first_order_efficiency))

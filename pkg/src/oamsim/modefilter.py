"""Hologram plus mono-mode fiber as a projective measurement on the OAM basis."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .fieldgrid import ComplexField, GridSpec, inner_product
from .hologram import HologramSpec, apply_first_order, spiral_phase, transmittance
from .lgmodes import BeamParams, ModeIndex, eval_lg, gaussian
from .optics import extract_order

DEFAULT_TRUNCATION = 4
NORM_SLACK = 1e-9


class TruncationError(ValueError):
    """A projector does not cover the OAM range a state needs."""


@dataclass(frozen=True)
class FilterConfig:
    """Mode filter: optional hologram in front of a fiber coupler.

    ``hologram=None`` means the hologram is taken out of the beam entirely.
    """

    hologram: HologramSpec | None = None
    fiber_waist: float = 0.2
    fiber_offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.fiber_waist > 0:
            raise ValueError("fiber_waist must be positive")
        object.__setattr__(self, "fiber_offset", tuple(float(v) for v in self.fiber_offset))


@dataclass(frozen=True, eq=False)
class ProjectionVector:
    """Detection amplitudes a_l = <filter|l> for l in [-L, L]."""

    L: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex, copy=True)
        if self.L < 0 or a.shape != (2 * self.L + 1,):
            raise ValueError(f"need {2 * self.L + 1} amplitudes for L={self.L}, got shape {a.shape}")
        if np.sum(np.abs(a) ** 2) > 1 + NORM_SLACK:
            raise ValueError("projection amplitudes exceed unit norm")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def pure(cls, l: int, L: int) -> ProjectionVector:
        a = np.zeros(2 * L + 1, dtype=complex)
        a[l + L] = 1
        return cls(L, a)

    @classmethod
    def from_dict(cls, amps: dict[int, complex], L: int) -> ProjectionVector:
        a = np.zeros(2 * L + 1, dtype=complex)
        for l, v in amps.items():
            a[l + L] = v
        return cls(L, a)

    def amp(self, l: int) -> complex:
        if abs(l) > self.L:
            raise TruncationError(f"charge {l} outside projector truncation L={self.L}")
        return complex(self.amplitudes[l + self.L])

    def total(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def truncated(self, L: int) -> ProjectionVector:
        if L > self.L:
            raise TruncationError("cannot widen a projector by truncation")
        return ProjectionVector(L, self.amplitudes[self.L - L : self.L + L + 1])


def filter_for_mode(l: int, fiber_waist: float = 0.2, hologram: HologramSpec | None = None) -> FilterConfig:
    """Filter tuned to detect charge ``l``: fork with delta_m = -l.

    ``l = 0`` uses the same plate with the dislocation moved out (delta_m = 0).
    """
    base = hologram if hologram is not None else HologramSpec()
    return FilterConfig(replace(base, delta_m=-l, dislocation_offset=(0.0, 0.0)), fiber_waist)


def fiber_mode(filt: FilterConfig, grid: GridSpec) -> ComplexField:
    return gaussian(BeamParams(filt.fiber_waist), grid, center=filt.fiber_offset)


def detection_mode(filt: FilterConfig, grid: GridSpec) -> ComplexField:
    """Fiber mode sent backwards through the conjugate filter (thin-element model)."""
    g = fiber_mode(filt, grid)
    if filt.hologram is None:
        return g
    h = filt.hologram
    return g.with_samples(g.samples * np.conj(spiral_phase(h, grid)) * np.sqrt(h.first_order_efficiency))


def _forward(filt: FilterConfig, f: ComplexField, wave: bool) -> ComplexField:
    if filt.hologram is None:
        return f
    if not wave:
        return apply_first_order(f, filt.hologram)
    h = filt.hologram
    t = transmittance(h, f.grid)
    return extract_order(f.with_samples(f.samples * t.samples), h, 1)


def effective_projector(
    filt: FilterConfig,
    beam: BeamParams,
    grid: GridSpec,
    L: int = DEFAULT_TRUNCATION,
    wave: bool = False,
) -> ProjectionVector:
    """Amplitudes <fiber | filter | LG_l> for l in [-L, L].

    With ``wave=True`` the hologram acts through its full phase mask and the
    first diffraction order is extracted by Fourier filtering; the mask then
    sets the efficiency (the scalar ``first_order_efficiency`` is not used).
    """
    g = fiber_mode(filt, grid)
    amps = [
        inner_product(g, _forward(filt, eval_lg(ModeIndex(l), beam, grid), wave))
        for l in range(-L, L + 1)
    ]
    return ProjectionVector(L, np.array(amps))


def reciprocal_projector(filt: FilterConfig, beam: BeamParams, grid: GridSpec, L: int = DEFAULT_TRUNCATION) -> ProjectionVector:
    d = detection_mode(filt, grid)
    amps = [inner_product(d, eval_lg(ModeIndex(l), beam, grid)) for l in range(-L, L + 1)]
    return ProjectionVector(L, np.array(amps))


@lru_cache(maxsize=8)
def _filtered_modes(hologram: HologramSpec | None, beam: BeamParams, grid: GridSpec, L: int) -> np.ndarray:
    filt = FilterConfig(hologram)
    stack = np.array(
        [_forward(filt, eval_lg(ModeIndex(l), beam, grid), wave=False).samples for l in range(-L, L + 1)]
    )
    stack.setflags(write=False)
    return stack


def scan_projectors(
    filt: FilterConfig,
    offsets,
    beam: BeamParams,
    grid: GridSpec,
    L: int = DEFAULT_TRUNCATION,
) -> list[ProjectionVector]:
    """``effective_projector`` at each fiber offset, in input order.

    ``filt.fiber_offset`` is ignored; ``offsets`` replaces it. The displaced
    fiber Gaussian is separable in x and y, so all offsets are evaluated
    together as two matrix contractions per mode.
    """
    offsets = np.asarray(offsets, dtype=float).reshape(-1, 2)
    if len(offsets) == 0:
        return []
    if not grid.contains(offsets[:, 0], offsets[:, 1]):
        raise ValueError("scan offsets fall outside the grid")
    x = grid.coords()
    w = filt.fiber_waist
    gx = np.exp(-((x[None, :] - offsets[:, 0:1]) ** 2) / w**2)
    gy = np.exp(-((x[None, :] - offsets[:, 1:2]) ** 2) / w**2)
    scale = np.sqrt(2 / np.pi) / w * grid.pitch**2
    stack = _filtered_modes(filt.hologram, beam, grid, L)
    # stack[l, iy, ix]: contract x with gx (BLAS), then y with gy
    gxt = gx.T.astype(complex)
    amps = np.empty((len(offsets), stack.shape[0]), dtype=complex)
    for i, h in enumerate(stack):
        amps[:, i] = scale * np.sum(gy * (h @ gxt).T, axis=1)
    return [ProjectionVector(L, a) for a in amps]

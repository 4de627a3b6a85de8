"""Laguerre-Gaussian modes at the waist plane and OAM decompositions."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, pi, sqrt

import numpy as np

from .fieldgrid import ComplexField, GridSpec, inner_product, sample_at

MAX_RADIAL_INDEX = 4

SIGNAL_WAVELENGTH_MM = 702e-6
PUMP_WAVELENGTH_MM = 351e-6


@dataclass(frozen=True)
class ModeIndex:
    l: int
    p: int = 0

    def __post_init__(self):
        if int(self.l) != self.l or int(self.p) != self.p:
            raise ValueError("mode indices must be integers")
        if self.p < 0:
            raise ValueError(f"radial index p must be >= 0, got {self.p}")


@dataclass(frozen=True)
class BeamParams:
    """Beam geometry in mm: waist radius at the evaluation plane and wavelength."""

    waist: float = 0.2
    wavelength: float = SIGNAL_WAVELENGTH_MM

    def __post_init__(self):
        if not self.waist > 0:
            raise ValueError(f"waist must be positive, got {self.waist}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def rayleigh_range(self) -> float:
        return pi * self.waist**2 / self.wavelength


def assoc_laguerre(p: int, alpha: float, x):
    """Generalized Laguerre polynomial L_p^alpha(x) by upward recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if p == 0:
        return prev
    cur = 1.0 + alpha - x
    for k in range(1, p):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def lg_normalization(l: int, p: int, waist: float) -> float:
    return sqrt(2 * factorial(p) / (pi * factorial(p + abs(l)))) / waist


def lg_value(mode: ModeIndex, beam: BeamParams, x, y):
    """Unit-power LG amplitude at arbitrary points, axis at the origin.

    Positive ``l`` means phase increasing counterclockwise, exp(+i l phi).
    No Gouy or curvature phase: every mode is taken at its waist.
    """
    if mode.p > MAX_RADIAL_INDEX:
        raise ValueError(f"radial index above {MAX_RADIAL_INDEX} not supported")
    w = beam.waist
    al = abs(mode.l)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = (x * x + y * y) / (w * w)
    radial = (2 * r2) ** (al / 2) * assoc_laguerre(mode.p, al, 2 * r2) * np.exp(-r2)
    # (x + i y)^|l| / r^|l| is exp(i |l| phi) without the atan2 branch cut
    if al:
        rho = np.sqrt(x * x + y * y)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(rho > 0, (x + 1j * np.sign(mode.l) * y) / rho, 1.0)
        azimuthal = unit**al
    else:
        azimuthal = 1.0
    return lg_normalization(mode.l, mode.p, w) * radial * azimuthal


def eval_lg(mode: ModeIndex, beam: BeamParams, grid: GridSpec, center=(0.0, 0.0)) -> ComplexField:
    X, Y = grid.mesh()
    return ComplexField(grid, lg_value(mode, beam, X - center[0], Y - center[1]))


def gaussian(beam: BeamParams, grid: GridSpec, center=(0.0, 0.0)) -> ComplexField:
    return eval_lg(ModeIndex(0, 0), beam, grid, center)


def oam_spectrum(f: ComplexField, L: int, n_rings: int | None = None, n_angles: int = 512) -> np.ndarray:
    """Power carried by each azimuthal harmonic l in [-L, L].

    The field is resampled on concentric rings (cubic spline), Fourier
    analysed along each ring and integrated radially with Gauss-Legendre
    weights out to the inscribed circle. Entry ``k`` holds ``l = k - L``.
    """
    if L < 0:
        raise ValueError("L must be >= 0")
    grid = f.grid
    if n_rings is None:
        n_rings = grid.n // 2
    r_max = grid.extent / 2 - 2 * grid.pitch
    nodes, weights = np.polynomial.legendre.leggauss(n_rings)
    r = 0.5 * r_max * (nodes + 1)
    dr = 0.5 * r_max * weights
    t = 2 * pi * np.arange(n_angles) / n_angles
    R, T = np.meshgrid(r, t, indexing="ij")
    ring = sample_at(f, R * np.cos(T), R * np.sin(T))
    coeff = np.fft.fft(ring, axis=1) / n_angles
    ls = np.arange(-L, L + 1)
    c = coeff[:, ls % n_angles]
    return 2 * pi * np.sum((r * dr)[:, None] * np.abs(c) ** 2, axis=0)


def decompose_lg(f: ComplexField, beam: BeamParams, L: int, P: int = 0) -> np.ndarray:
    """Overlaps <LG_p^l | f>, shape (2L+1, P+1), indexed ``[l + L, p]``."""
    if L < 0 or P < 0:
        raise ValueError("L and P must be >= 0")
    out = np.zeros((2 * L + 1, P + 1), dtype=complex)
    for l in range(-L, L + 1):
        for p in range(P + 1):
            out[l + L, p] = inner_product(eval_lg(ModeIndex(l, p), beam, f.grid), f)
    return out

"""Complex scalar fields sampled on centered square grids.

Samples are stored row-major as ``samples[iy, ix]`` with ``x`` increasing
along columns and ``y`` increasing along rows. Sample coordinates sit at
half-pixel offsets, so the optical axis falls between the four central
pixels and the lattice is symmetric under 90 degree rotations about it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

MIN_SAMPLES = 16
DEFAULT_AMPLITUDE_FLOOR = 1e-8


class GridMismatchError(ValueError):
    """Two fields live on different grids."""


@dataclass(frozen=True)
class GridSpec:
    n: int
    extent: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < MIN_SAMPLES:
            raise ValueError(f"grid needs n >= {MIN_SAMPLES} samples per side, got {self.n}")
        if not self.extent > 0:
            raise ValueError(f"grid extent must be positive, got {self.extent}")

    @property
    def pitch(self) -> float:
        return self.extent / self.n

    def coords(self) -> np.ndarray:
        """1D sample coordinates along either axis."""
        return (np.arange(self.n) - self.n / 2 + 0.5) * self.pitch

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.coords()
        return np.meshgrid(x, x, indexing="xy")

    def polar(self, center=(0.0, 0.0)) -> tuple[np.ndarray, np.ndarray]:
        X, Y = self.mesh()
        dx, dy = X - center[0], Y - center[1]
        return np.hypot(dx, dy), np.arctan2(dy, dx)

    def to_index(self, x, y):
        """Fractional (row, column) indices of physical points."""
        col = np.asarray(x) / self.pitch + self.n / 2 - 0.5
        row = np.asarray(y) / self.pitch + self.n / 2 - 0.5
        return row, col

    def contains(self, x, y, margin: float = 0.0) -> bool:
        half = self.extent / 2 - self.pitch / 2 - margin
        return bool(np.all(np.abs(x) <= half) and np.all(np.abs(y) <= half))


def make_grid(n: int, extent: float) -> GridSpec:
    return GridSpec(n, extent)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Immutable complex amplitude on a :class:`GridSpec`."""

    grid: GridSpec
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.samples, dtype=complex, copy=True)
        if arr.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"samples shape {arr.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def phase(self) -> np.ndarray:
        return np.angle(self.samples)

    def power(self) -> float:
        return float(np.sum(self.intensity()) * self.grid.pitch**2)

    def norm(self) -> float:
        return float(np.sqrt(self.power()))

    def scaled(self, factor) -> ComplexField:
        return ComplexField(self.grid, self.samples * factor)

    def with_samples(self, samples) -> ComplexField:
        return ComplexField(self.grid, samples)

    def __add__(self, other: ComplexField) -> ComplexField:
        _check_same_grid(self, other)
        return ComplexField(self.grid, self.samples + other.samples)

    def __sub__(self, other: ComplexField) -> ComplexField:
        _check_same_grid(self, other)
        return ComplexField(self.grid, self.samples - other.samples)


def _check_same_grid(f: ComplexField, g: ComplexField) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grid mismatch: {f.grid} vs {g.grid}")


def inner_product(f: ComplexField, g: ComplexField) -> complex:
    """Discrete overlap integral of conj(f) * g over the grid area."""
    _check_same_grid(f, g)
    return complex(np.vdot(f.samples, g.samples) * f.grid.pitch**2)


def sample_at(f: ComplexField, x, y, order: int = 3) -> np.ndarray:
    """Spline-interpolate the field at physical points (x, y)."""
    row, col = f.grid.to_index(x, y)
    pts = np.vstack([np.ravel(row), np.ravel(col)])
    re = ndimage.map_coordinates(f.samples.real, pts, order=order, mode="nearest")
    im = ndimage.map_coordinates(f.samples.imag, pts, order=order, mode="nearest")
    return (re + 1j * im).reshape(np.shape(x))


def _wrap(d):
    return (d + np.pi) % (2 * np.pi) - np.pi


def winding_number(
    f: ComplexField,
    loop_center=(0.0, 0.0),
    loop_radius: float = 1.0,
    amplitude_floor: float = DEFAULT_AMPLITUDE_FLOOR,
    n_points: int | None = None,
) -> int:
    """Net phase winding (in units of 2 pi) around a circle, counterclockwise.

    Raises ``ValueError`` if the loop leaves the grid or the amplitude on the
    loop drops below ``amplitude_floor`` times the field maximum.
    """
    if not loop_radius > 0:
        raise ValueError("loop radius must be positive")
    cx, cy = loop_center
    # keep two pixels of margin for the interpolation stencil
    if not f.grid.contains(
        np.array([cx - loop_radius, cx + loop_radius]),
        np.array([cy - loop_radius, cy + loop_radius]),
        margin=2 * f.grid.pitch,
    ):
        raise ValueError("loop leaves the grid")
    if n_points is None:
        n_points = max(256, int(np.ceil(8 * 2 * np.pi * loop_radius / f.grid.pitch)))
    t = 2 * np.pi * np.arange(n_points) / n_points
    vals = sample_at(f, cx + loop_radius * np.cos(t), cy + loop_radius * np.sin(t))
    peak = np.max(np.abs(f.samples))
    if peak == 0 or np.min(np.abs(vals)) < amplitude_floor * peak:
        raise ValueError("field amplitude on the loop is below the floor; phase undefined")
    ph = np.angle(vals)
    total = np.sum(_wrap(np.diff(np.append(ph, ph[0]))))
    return int(np.rint(total / (2 * np.pi)))


@dataclass(frozen=True)
class Singularity:
    x: float
    y: float
    charge: int

    @property
    def radius(self) -> float:
        return float(np.hypot(self.x, self.y))

    @property
    def angle(self) -> float:
        return float(np.arctan2(self.y, self.x))


def _ring_circulation(ph: np.ndarray, r0: int, r1: int, c0: int, c1: int) -> float:
    """Wrapped phase sum around the sample rectangle rows r0..r1, cols c0..c1 (counterclockwise)."""
    path = np.concatenate(
        [
            ph[r0, c0:c1 + 1],
            ph[r0 + 1:r1 + 1, c1],
            ph[r1, c0:c1][::-1],
            ph[r0 + 1:r1, c0][::-1],
        ]
    )
    return float(np.sum(_wrap(np.diff(np.append(path, path[0])))))


def find_singularities(
    f: ComplexField, amplitude_floor: float = DEFAULT_AMPLITUDE_FLOOR, edge_tol: float = 1e-6
) -> list[Singularity]:
    """Locate phase vortices by the circulation around every 2x2 plaquette.

    Plaquettes with any corner below ``amplitude_floor * max|f|`` are skipped.
    A phase step of exactly pi along an edge (a higher-charge vortex centered
    on the lattice symmetry point) has no well-defined wrap; such plaquettes
    are grouped and their net charge is read from a loop around the group.
    Positions are plaquette (or group) centers, sorted by (row, column).
    """
    if amplitude_floor < 0:
        raise ValueError("amplitude floor must be non-negative")
    s = f.samples
    peak = np.max(np.abs(s))
    if peak == 0:
        return []
    ph = np.angle(s)
    ex = _wrap(ph[:, 1:] - ph[:, :-1])  # edge (i,j)->(i,j+1)
    ey = _wrap(ph[1:, :] - ph[:-1, :])  # edge (i,j)->(i+1,j)
    # counterclockwise in (x, y): (i,j) -> (i,j+1) -> (i+1,j+1) -> (i+1,j)
    circ = ex[:-1, :] + ey[:, 1:] - ex[1:, :] - ey[:, :-1]
    charge = np.rint(circ / (2 * np.pi)).astype(int)
    alive = np.abs(s) >= amplitude_floor * peak
    ok = alive[:-1, :-1] & alive[:-1, 1:] & alive[1:, 1:] & alive[1:, :-1]
    ax = np.abs(np.pi - np.abs(ex)) < edge_tol
    ay = np.abs(np.pi - np.abs(ey)) < edge_tol
    ambiguous = ok & (ax[:-1, :] | ax[1:, :] | ay[:, :-1] | ay[:, 1:])
    clean = ok & ~ambiguous
    x = f.grid.coords()
    h = f.grid.pitch
    found = [(float(x[j] + h / 2), float(x[i] + h / 2), int(charge[i, j])) for i, j in zip(*np.nonzero((charge != 0) & clean))]
    if ambiguous.any():
        labels, count = ndimage.label(ambiguous)
        n = f.grid.n
        for k in range(1, count + 1):
            rows, cols = np.nonzero(labels == k)
            r0, r1 = rows.min() - 1, rows.max() + 2
            c0, c1 = cols.min() - 1, cols.max() + 2
            if r0 < 0 or c0 < 0 or r1 >= n or c1 >= n:
                continue
            total = int(np.rint(_ring_circulation(ph, r0, r1, c0, c1) / (2 * np.pi)))
            inside = charge[r0:r1, c0:c1][clean[r0:r1, c0:c1]].sum()
            q = total - int(inside)
            if q:
                found.append((float(np.mean(x[cols]) + h / 2), float(np.mean(x[rows]) + h / 2), q))
    found.sort(key=lambda t: (t[1], t[0]))
    return [Singularity(*t) for t in found]

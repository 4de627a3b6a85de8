"""End-to-end runs: conservation matrices, superposition scans, singularity loci."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .biphoton import (
    TwoPhotonState,
    coincidence_prob,
    mixture_coincidence_prob,
    state_from_pairs,
    visibility,
)
from .fieldgrid import ComplexField, GridSpec, find_singularities, make_grid
from .hologram import HologramSpec
from .lgmodes import BeamParams, ModeIndex, eval_lg
from .modefilter import (
    DEFAULT_TRUNCATION,
    FilterConfig,
    ProjectionVector,
    effective_projector,
    filter_for_mode,
    scan_projectors,
)

DEFAULT_L1 = (0, 1, 2)
DEFAULT_L2 = (-2, -1, 0, 1, 2)
# in units of the beam waist; zeros of the conditional mode stay inside the
# +-2w raster and the mixture keeps > 10% contrast at them over this range
DEFAULT_SHIFTS = (0.0, 0.25, 0.35, 0.45, 0.55)
# rows below this fraction of the largest row are lattice noise, not signal
DEGENERATE_ROW_TOL = 1e-8


def default_grid(beam: BeamParams, n: int = 256) -> GridSpec:
    return make_grid(n, 8 * beam.waist)


@dataclass(frozen=True)
class Setup:
    """Shared optics for both arms."""

    beam: BeamParams = field(default_factory=BeamParams)
    grid: GridSpec | None = None
    hologram: HologramSpec = field(default_factory=HologramSpec)
    fiber_waist: float | None = None
    L: int = DEFAULT_TRUNCATION

    def __post_init__(self):
        if self.grid is None:
            object.__setattr__(self, "grid", default_grid(self.beam))
        if self.fiber_waist is None:
            object.__setattr__(self, "fiber_waist", self.beam.waist)
        if not self.fiber_waist > 0:
            raise ValueError("fiber_waist must be positive")
        if self.L < 0:
            raise ValueError("truncation L must be >= 0")


# -- conservation --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConservationMatrix:
    pump_l: int
    l1: tuple[int, ...]
    l2: tuple[int, ...]
    raw: np.ndarray
    normalized: np.ndarray
    degenerate_rows: tuple[int, ...]


def mode_projectors(charges, setup: Setup, wave: bool = True) -> dict[int, ProjectionVector]:
    return {
        l: effective_projector(
            filter_for_mode(l, setup.fiber_waist, setup.hologram), setup.beam, setup.grid, setup.L, wave=wave
        )
        for l in charges
    }


def conservation_matrix(
    pump_l: int,
    state: TwoPhotonState,
    l1_list=DEFAULT_L1,
    l2_list=DEFAULT_L2,
    setup: Setup | None = None,
    wave: bool = True,
    projectors: dict[int, ProjectionVector] | None = None,
) -> ConservationMatrix:
    """Coincidences for every (l1, l2) filter pair, each row scaled to unit sum.

    Rows whose total is numerically zero (no conserving partner in ``l2_list``,
    so only lattice leakage remains) cannot be normalized; they are listed in ``degenerate_rows`` and filled
    with NaN in ``normalized``.
    """
    if state.pump_l != pump_l:
        raise ValueError(f"state pump charge {state.pump_l} does not match pump_l={pump_l}")
    setup = setup or Setup()
    if projectors is None:
        projectors = mode_projectors(set(l1_list) | set(l2_list), setup, wave)
    raw = np.array(
        [[coincidence_prob(state, projectors[a], projectors[b]) for b in l2_list] for a in l1_list]
    )
    sums = raw.sum(axis=1)
    scale = max(float(sums.max()), np.finfo(float).tiny)
    bad = tuple(int(l1_list[i]) for i in np.nonzero(sums <= DEGENERATE_ROW_TOL * scale)[0])
    norm = np.full_like(raw, np.nan)
    ok = sums > DEGENERATE_ROW_TOL * scale
    norm[ok] = raw[ok] / sums[ok, None]
    return ConservationMatrix(pump_l, tuple(l1_list), tuple(l2_list), raw, norm, bad)


def ideal_visibility(pump_l: int, state: TwoPhotonState, setup: Setup | None = None, l_in: int = 1):
    """(I_out, I_in, V) for a matched pair with arm 1's dislocation out vs in.

    Arm 2 detects the partner of l1 = 0; arm 1 switches between the plain
    grating (dislocation out, l1 = 0) and the centered fork detecting ``l_in``.
    """
    setup = setup or Setup()
    proj = mode_projectors({0, l_in, pump_l}, setup, wave=True)
    i_out = coincidence_prob(state, proj[0], proj[pump_l])
    i_in = coincidence_prob(state, proj[l_in], proj[pump_l])
    return i_out, i_in, visibility(i_out, i_in)


# -- superposition scans -------------------------------------------------


@dataclass(frozen=True)
class Raster:
    points: int = 41
    half_width: float = 2.0  # units of beam waist

    def axis(self, waist: float) -> np.ndarray:
        return np.linspace(-self.half_width * waist, self.half_width * waist, self.points)

    def offsets(self, waist: float) -> np.ndarray:
        """(x, y) pairs, x fastest, y ascending."""
        a = self.axis(waist)
        X, Y = np.meshgrid(a, a, indexing="xy")
        return np.column_stack([X.ravel(), Y.ravel()])


def two_term_state(relative_phase: float = 0.0) -> TwoPhotonState:
    """(|0>|0> + e^{i delta}|2>|-2>)/sqrt(2)."""
    return state_from_pairs(0, {0: 1.0, 2: np.exp(1j * relative_phase)}, L=2)


def shifted_filter(shift: float, setup: Setup, delta_m: int = -2) -> FilterConfig:
    holo = replace(setup.hologram, delta_m=delta_m, dislocation_offset=(shift, 0.0))
    return FilterConfig(holo, setup.fiber_waist)


def arm1_projector(shift: float, setup: Setup, delta_m: int = -2) -> ProjectionVector:
    return effective_projector(shifted_filter(shift, setup, delta_m), setup.beam, setup.grid, setup.L)


@dataclass(frozen=True, eq=False)
class ScanResult:
    model: str
    shift: float
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # [iy, ix]
    zero: tuple[float, float]
    zero_value: float

    @property
    def peak(self) -> float:
        return float(self.values.max())


def _coincidence_fn(model: str, state: TwoPhotonState, A: ProjectionVector):
    if model == "entangled":
        return lambda B: coincidence_prob(state, A, B)
    if model == "mixture":
        mix = state.to_mixture()
        return lambda B: mixture_coincidence_prob(mix, A, B)
    raise ValueError(f"unknown model {model!r}; expected 'entangled' or 'mixture'")


def superposition_scan(
    model: str,
    hologram_shift: float,
    raster: Raster = Raster(),
    setup: Setup | None = None,
    state: TwoPhotonState | None = None,
    delta_m: int = -2,
) -> ScanResult:
    """Coincidence map while the arm-2 fiber rasters with its hologram removed.

    Arm 1 carries the fork with its dislocation displaced by ``hologram_shift``
    (mm). Besides the raster, the map's minimum is refined off-grid by a local
    search started at the lowest raster point.
    """
    setup = setup or Setup()
    state = state if state is not None else two_term_state()
    A = arm1_projector(hologram_shift, setup, delta_m)
    prob = _coincidence_fn(model, state, A)
    arm2 = FilterConfig(None, setup.fiber_waist)
    offsets = raster.offsets(setup.beam.waist)
    values = np.array([prob(B) for B in scan_projectors(arm2, offsets, setup.beam, setup.grid, setup.L)])
    axis = raster.axis(setup.beam.waist)
    values = values.reshape(len(axis), len(axis))

    def at(p):
        if not setup.grid.contains(p[0], p[1]):
            return np.inf
        return prob(scan_projectors(arm2, [p], setup.beam, setup.grid, setup.L)[0])

    start = offsets[int(np.argmin(values))]
    step = axis[1] - axis[0]
    res = optimize.minimize(
        at,
        start,
        method="Nelder-Mead",
        options={
            "initial_simplex": [start, start + [step, 0], start + [0, step]],
            "xatol": 1e-9 * setup.beam.waist,
            "fatol": 0.0,
            "maxiter": 2000,
        },
    )
    zero, zval = (tuple(res.x), float(res.fun)) if res.fun < values.min() else (tuple(start), float(values.min()))
    return ScanResult(model, hologram_shift, axis, axis.copy(), values, zero, zval)


# -- singularity locus ---------------------------------------------------


def conditional_field(state: TwoPhotonState, A: ProjectionVector, setup: Setup) -> ComplexField:
    """Arm-2 mode left after arm 1 clicks: sum_l C_l A_l LG_{pump-l}."""
    acc = np.zeros((setup.grid.n, setup.grid.n), dtype=complex)
    for l, l2, c in state.pairs():
        a = A.amp(l)
        if c != 0 and a != 0:
            acc += c * a * eval_lg(ModeIndex(l2), setup.beam, setup.grid).samples
    return ComplexField(setup.grid, acc)


@dataclass(frozen=True)
class LocusRow:
    shift: float
    amplitude_ratio: float
    radius: float
    angle: float
    charges: tuple[int, ...]
    flagged: bool = False


def locate_zero_pair(field_: ComplexField, search_radius: float):
    """Singularities of the conditional field within ``search_radius`` of the axis."""
    return [s for s in find_singularities(field_) if s.radius <= search_radius]


def singularity_locus(
    shifts,
    setup: Setup | None = None,
    state: TwoPhotonState | None = None,
    delta_m: int = -2,
    search_radius: float | None = None,
) -> list[LocusRow]:
    """Zero position of the conditional arm-2 mode for each hologram shift (mm).

    ``radius`` is the mean distance of the zeros from the axis and ``angle``
    the azimuth of the member in the upper half-plane. Rows where no zero is
    found are flagged with NaN geometry.
    """
    setup = setup or Setup()
    state = state if state is not None else two_term_state()
    if search_radius is None:
        search_radius = 3 * setup.beam.waist
    rows = []
    for shift in shifts:
        if shift < 0:
            raise ValueError("shifts must be non-negative")
        A = arm1_projector(shift, setup, delta_m)
        a0, a2 = A.amp(0), A.amp(-delta_m)
        ratio = abs(a0 / a2) if a2 != 0 else np.inf
        sing = locate_zero_pair(conditional_field(state, A, setup), search_radius)
        if not sing:
            rows.append(LocusRow(shift, ratio, np.nan, np.nan, (), flagged=True))
            continue
        radius = float(np.mean([s.radius for s in sing]))
        upper = [s for s in sing if s.y > 0 or (s.y == 0 and s.x > 0)] or sing
        angle = upper[0].angle if radius > setup.grid.pitch else 0.0
        rows.append(LocusRow(shift, ratio, radius, angle, tuple(s.charge for s in sing)))
    return rows

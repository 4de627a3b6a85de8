"""Two-photon OAM states, coincidence probabilities and counting statistics.

A pair term ``l`` stands for |l>_1 |pump_l - l>_2, so the OAM sum of the
two photons always equals the pump charge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from .modefilter import ProjectionVector, TruncationError

NORM_TOL = 1e-12

REFERENCE_LOSSES = {
    "hologram_first_order": 0.18,
    "surface_transmission": 0.95,
    "fiber_coupling": 0.70,
    "filter_transmission": 0.75,
    "detector_efficiency": 0.30,
}


@dataclass(frozen=True, eq=False)
class TwoPhotonState:
    """Coherent pair state sum_l C_l |l>|pump_l - l>, l in [-L, L]."""

    pump_l: int
    L: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.amplitudes, dtype=complex, copy=True)
        if c.shape != (2 * self.L + 1,):
            raise ValueError(f"need {2 * self.L + 1} amplitudes for L={self.L}")
        if abs(np.sum(np.abs(c) ** 2) - 1) > NORM_TOL:
            raise ValueError("state amplitudes must be normalized; use make_spdc_state")
        c.setflags(write=False)
        object.__setattr__(self, "amplitudes", c)

    def charges(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)

    def pairs(self) -> list[tuple[int, int, complex]]:
        return [(int(l), int(self.pump_l - l), complex(c)) for l, c in zip(self.charges(), self.amplitudes)]

    def to_mixture(self) -> MixtureState:
        """Classically correlated ensemble with the same pair probabilities."""
        return MixtureState(self.pump_l, self.L, np.abs(self.amplitudes) ** 2)


@dataclass(frozen=True, eq=False)
class MixtureState:
    pump_l: int
    L: int
    probabilities: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float, copy=True)
        if p.shape != (2 * self.L + 1,):
            raise ValueError(f"need {2 * self.L + 1} probabilities for L={self.L}")
        if np.any(p < 0) or abs(p.sum() - 1) > NORM_TOL:
            raise ValueError("mixture probabilities must be non-negative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def charges(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)


def make_spdc_state(pump_l: int, L: int, amplitudes=None) -> TwoPhotonState:
    """Normalized pair state; ``amplitudes=None`` gives equal real weights."""
    if L < 0:
        raise ValueError("L must be >= 0")
    if amplitudes is None:
        amplitudes = np.ones(2 * L + 1)
    c = np.asarray(amplitudes, dtype=complex)
    if c.shape != (2 * L + 1,):
        raise ValueError(f"need {2 * L + 1} amplitudes for L={L}, got {c.size}")
    norm = np.sqrt(np.sum(np.abs(c) ** 2))
    if norm == 0:
        raise ValueError("amplitude vector is all zero")
    return TwoPhotonState(int(pump_l), int(L), c / norm)


def state_from_pairs(pump_l: int, terms: dict[int, complex], L: int | None = None) -> TwoPhotonState:
    """State from {l1: C} for the listed pair terms only."""
    if L is None:
        L = max(abs(l) for l in terms)
    c = np.zeros(2 * L + 1, dtype=complex)
    for l, v in terms.items():
        c[l + L] = v
    return make_spdc_state(pump_l, L, c)


def _partner_amplitudes(pump_l: int, charges: np.ndarray, A: ProjectionVector, B: ProjectionVector):
    L = int(charges.max()) if charges.size else 0
    if A.L < L:
        raise TruncationError(f"arm-1 projector L={A.L} below state truncation {L}")
    need = L + abs(pump_l)
    if B.L < need:
        raise TruncationError(f"arm-2 projector L={B.L} must cover partner charges up to {need}")
    a = np.array([A.amp(int(l)) for l in charges])
    b = np.array([B.amp(int(pump_l - l)) for l in charges])
    return a, b


def coincidence_prob(state: TwoPhotonState, A: ProjectionVector, B: ProjectionVector) -> float:
    """|sum_l C_l A_l B_{pump-l}|^2: amplitudes add coherently."""
    a, b = _partner_amplitudes(state.pump_l, state.charges(), A, B)
    return float(abs(np.sum(state.amplitudes * a * b)) ** 2)


def mixture_coincidence_prob(mix: MixtureState, A: ProjectionVector, B: ProjectionVector) -> float:
    """sum_l p_l |A_l|^2 |B_{pump-l}|^2: probabilities add."""
    a, b = _partner_amplitudes(mix.pump_l, mix.charges(), A, B)
    return float(np.sum(mix.probabilities * np.abs(a) ** 2 * np.abs(b) ** 2))


def visibility(i_out: float, i_in: float) -> float:
    """Contrast between coincidences with the dislocation out of and in the beam."""
    if i_out < 0 or i_in < 0:
        raise ValueError("coincidence rates must be non-negative")
    if i_out + i_in == 0:
        raise ValueError("visibility undefined when both rates are zero")
    return (i_out - i_in) / (i_out + i_in)


@dataclass(frozen=True)
class LossBudget:
    factors: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, v in self.factors.items():
            if not 0 <= v <= 1:
                raise ValueError(f"loss factor {name}={v} outside [0, 1]")

    @classmethod
    def reference(cls) -> LossBudget:
        return cls(dict(REFERENCE_LOSSES))


def efficiency_budget(budget: LossBudget) -> float:
    return float(prod(budget.factors.values()))


def poisson_counts(prob: float, mean_pairs: float, seed: int, size=None):
    """Poisson(prob * mean_pairs) draw(s), reproducible for a given seed."""
    if not 0 <= prob <= 1:
        raise ValueError("prob must lie in [0, 1]")
    if mean_pairs < 0:
        raise ValueError("mean_pairs must be non-negative")
    rng = np.random.default_rng(seed)
    draw = rng.poisson(prob * mean_pairs, size=size)
    return int(draw) if size is None else draw


def simulate_visibility(
    p_out: float,
    p_in: float,
    mean_pairs: float,
    trials: int,
    seed: int,
    background: float = 0.0,
) -> np.ndarray:
    """Visibility estimates from Poisson-sampled coincidences.

    ``background`` is a mean number of accidental coincidences added to both
    settings. Trials where both counts are zero are dropped.
    """
    rng = np.random.default_rng(seed)
    i_out = rng.poisson(p_out * mean_pairs + background, size=trials)
    i_in = rng.poisson(p_in * mean_pairs + background, size=trials)
    keep = (i_out + i_in) > 0
    return (i_out[keep] - i_in[keep]) / (i_out[keep] + i_in[keep])


def simulate_pair_counts(rate: float, efficiency: float, seed: int, trials: int = 1):
    """Singles and coincidences for ``rate`` emitted pairs per window.

    Each photon survives with probability ``efficiency``; singles count one
    arm, coincidences need both.
    """
    rng = np.random.default_rng(seed)
    singles = rng.poisson(rate * efficiency, size=trials)
    coincidences = rng.poisson(rate * efficiency**2, size=trials)
    return singles, coincidences

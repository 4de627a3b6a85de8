import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oamsim.fieldgrid import inner_product
from oamsim.hologram import (
    TWO_PI,
    HologramSpec,
    aperture_mask,
    apply_first_order,
    order_amplitude,
    rotate_180,
    transmittance,
)
from oamsim.lgmodes import ModeIndex, eval_lg, gaussian, oam_spectrum
from oamsim.optics import extract_order
from oracles import radial_overlap, saw_order_power


@pytest.mark.parametrize(
    "kwargs",
    [
        {"line_density": 0},
        {"blaze_depth": 0},
        {"blaze_depth": 7.0},
        {"first_order_efficiency": 1.5},
        {"aperture": -1},
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        HologramSpec(**kwargs)


def test_plain_grating_is_linear_ramp(grid):
    t = transmittance(HologramSpec(delta_m=0), grid)
    np.testing.assert_allclose(np.abs(t.samples), 1.0, atol=1e-15)
    X, _ = grid.mesh()
    np.testing.assert_allclose(t.samples, np.exp(2j * np.pi * X * 20.0), atol=1e-12)


@pytest.mark.parametrize("blaze", [TWO_PI, np.pi, 1.0])
@pytest.mark.parametrize("dm", [0, 1, -2])
def test_mask_is_phase_only(grid, blaze, dm):
    spec = HologramSpec(delta_m=dm, blaze_depth=blaze, dislocation_offset=(0.03, -0.01))
    t = transmittance(spec, grid).samples
    inside = aperture_mask(spec, grid)
    np.testing.assert_allclose(np.abs(t[inside]), 1.0, atol=1e-14)


def test_aperture_clips(beam):
    from oamsim.fieldgrid import make_grid

    g = make_grid(64, 8.0)
    t = transmittance(HologramSpec(aperture=5.0), g).samples
    X, Y = g.mesh()
    assert np.all(t[np.abs(X) > 2.5] == 0)
    assert np.all(np.abs(t[(np.abs(X) < 2.4) & (np.abs(Y) < 2.4)]) == pytest.approx(1.0))


def test_ideal_fork_first_order_charge(beam, grid):
    spec = HologramSpec(delta_m=1, first_order_efficiency=1.0)
    g = gaussian(beam, grid)
    env = extract_order(g.with_samples(g.samples * transmittance(spec, grid).samples), spec, 1)
    w = oam_spectrum(env, 3)
    assert w[1 + 3] / w.sum() > 0.999


def test_order_amplitudes_match_sampled_sawtooth():
    for blaze in (TWO_PI, np.pi, np.pi / 2):
        for n in range(-3, 4):
            assert abs(order_amplitude(blaze, n)) ** 2 == pytest.approx(saw_order_power(blaze, n), abs=1e-9)


def test_half_blaze_plain_grating_orders(beam, grid):
    # 20 lines/mm on a 6.25 um pitch puts 8 samples, at half-sample phases, in each period
    assert grid.pitch * 20.0 * 8 == pytest.approx(1.0)
    spec = HologramSpec(delta_m=0, blaze_depth=np.pi)
    g = gaussian(beam, grid)
    after = g.with_samples(g.samples * transmittance(spec, grid).samples)
    for n in range(-2, 3):
        assert extract_order(after, spec, n).power() == pytest.approx(saw_order_power(np.pi, n, samples=8), abs=1e-9)


def test_half_blaze_fork_splits_orders(beam, grid):
    spec = HologramSpec(delta_m=2, blaze_depth=np.pi)
    g = gaussian(beam, grid)
    after = g.with_samples(g.samples * transmittance(spec, grid).samples)
    p = {n: extract_order(after, spec, n).power() for n in (-1, 0, 1)}
    assert p[0] == pytest.approx(saw_order_power(np.pi, 0), abs=1e-2)
    assert p[1] > 0.3
    assert p[-1] < p[1]


def test_rotate_180_examples():
    assert rotate_180(HologramSpec(delta_m=2)).delta_m == -2
    assert rotate_180(HologramSpec(delta_m=0)).delta_m == 0
    assert rotate_180(HologramSpec(dislocation_offset=(0.1, 0.0))).dislocation_offset == (-0.1, 0.0)


@given(
    st.integers(-5, 5),
    st.floats(-1, 1, allow_nan=False),
    st.floats(-1, 1, allow_nan=False),
)
def test_rotate_180_involution(dm, dx, dy):
    spec = HologramSpec(delta_m=dm, dislocation_offset=(dx, dy))
    assert rotate_180(rotate_180(spec)) == spec


def test_rotated_hologram_analyzes_opposite_charge(beam, grid):
    spec = HologramSpec(delta_m=-2, first_order_efficiency=1.0)
    g = gaussian(beam, grid)
    for l, s in ((2, spec), (-2, rotate_180(spec))):
        out = apply_first_order(eval_lg(ModeIndex(l), beam, grid), s)
        assert abs(inner_product(g, out)) ** 2 == pytest.approx(radial_overlap(2, 0, beam.waist), abs=1e-6)


def test_apply_first_order_gaussian_to_charge_two(beam, grid):
    out = apply_first_order(gaussian(beam, grid), HologramSpec(delta_m=2, first_order_efficiency=1.0))
    w = oam_spectrum(out, 4)
    assert w[2 + 4] / w.sum() > 0.998


def test_apply_first_order_lg_minus_one(beam, grid):
    out = apply_first_order(eval_lg(ModeIndex(-1), beam, grid), HologramSpec(delta_m=1, first_order_efficiency=1.0))
    w = oam_spectrum(out, 3)
    assert w[3] == pytest.approx(1.0, abs=1e-6)
    assert np.delete(w, 3).max() < 1e-10
    coupled = abs(inner_product(gaussian(beam, grid), out)) ** 2
    assert coupled == pytest.approx(radial_overlap(1, 0, beam.waist), abs=1e-3)
    assert coupled == pytest.approx(np.pi / 4, abs=1e-3)


def test_apply_first_order_no_dislocation(beam, grid):
    f = eval_lg(ModeIndex(1, 1), beam, grid)
    out = apply_first_order(f, HologramSpec(delta_m=0, first_order_efficiency=0.18))
    np.testing.assert_allclose(out.samples, f.samples * np.sqrt(0.18), rtol=1e-15)


def _smooth_on_axis(l, dm):
    """r^|l| e^{i(l+dm)phi} is a polynomial in (x, y) only in these cases."""
    k = l + dm
    return abs(l) >= abs(k) and (abs(l) - abs(k)) % 2 == 0


CHARGE_CASES = [(l, dm) for l in range(-2, 3) for dm in (-2, -1, 1, 2)]


@pytest.mark.parametrize("l, dm", CHARGE_CASES)
def test_charge_additivity_pointwise(beam, grid, l, dm):
    """Sampled output equals |out| e^{i(l+dm)phi} up to a constant phase.

    The residual bounds the off-charge weight of the sampled field directly,
    independent of any ring interpolation.
    """
    out = apply_first_order(eval_lg(ModeIndex(l), beam, grid), HologramSpec(delta_m=dm, first_order_efficiency=1.0))
    _, phi = grid.polar()
    pure = np.abs(out.samples) * np.exp(1j * (l + dm) * phi)
    c = np.vdot(pure, out.samples)
    c /= abs(c)
    off = np.sum(np.abs(out.samples - c * pure) ** 2) / np.sum(np.abs(out.samples) ** 2)
    assert off < 1e-10


@pytest.mark.parametrize("l, dm", CHARGE_CASES)
def test_charge_additivity_spectrum(beam, grid, l, dm):
    out = apply_first_order(eval_lg(ModeIndex(l), beam, grid), HologramSpec(delta_m=dm, first_order_efficiency=1.0))
    w = oam_spectrum(out, 5)
    w = w / w.sum()
    assert int(np.argmax(w)) - 5 == l + dm
    off = np.delete(w, l + dm + 5).max()
    if _smooth_on_axis(l, dm):
        assert off < 1e-10
    elif l != 0:
        # an |r| kink on the axis limits the ring resampling, not the charge
        assert off < 1e-6
    else:
        # a phase jump across a nonzero axis value: resampling is coarser still
        assert off < 1e-3


@pytest.mark.parametrize("l, dm", [(l, dm) for l, dm in CHARGE_CASES if _smooth_on_axis(l, dm)])
def test_first_order_consistency_regular_output(beam, grid, l, dm):
    """Where the diffracted mode is smooth, mask + order filter equals the idealized action."""
    spec = HologramSpec(delta_m=dm, first_order_efficiency=1.0)
    f = eval_lg(ModeIndex(l), beam, grid)
    full = extract_order(f.with_samples(f.samples * transmittance(spec, grid).samples), spec, 1)
    assert (full - apply_first_order(f, spec)).norm() < 1e-3 * f.norm()


@pytest.mark.parametrize("l, dm", [(0, 1), (0, 2), (1, 1), (-1, 2)])
def test_first_order_consistency_in_fiber(beam, grid, l, dm):
    """Fiber-projected amplitudes agree even when the diffracted mode carries a singularity."""
    spec = HologramSpec(delta_m=dm, first_order_efficiency=1.0)
    f = eval_lg(ModeIndex(l), beam, grid)
    full = extract_order(f.with_samples(f.samples * transmittance(spec, grid).samples), spec, 1)
    ideal = apply_first_order(f, spec)
    for probe in (eval_lg(ModeIndex(l + dm), beam, grid), gaussian(beam, grid, center=(0.05, 0.02))):
        assert abs(inner_product(probe, full) - inner_product(probe, ideal)) < 1e-6

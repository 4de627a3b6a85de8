import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oamsim.fieldgrid import (
    ComplexField,
    GridMismatchError,
    find_singularities,
    inner_product,
    make_grid,
    winding_number,
)
from oamsim.lgmodes import ModeIndex, eval_lg, gaussian


def test_make_grid_pitch():
    assert make_grid(256, 8.0).pitch == 0.03125
    assert make_grid(16, 1.0).pitch == 0.0625


@pytest.mark.parametrize("n, extent", [(8, 1.0), (15, 1.0), (64, 0.0), (64, -2.0)])
def test_make_grid_rejects(n, extent):
    with pytest.raises(ValueError):
        make_grid(n, extent)


def test_grid_is_centered():
    g = make_grid(16, 1.0)
    x = g.coords()
    np.testing.assert_allclose(x, -x[::-1])
    assert x[8] == pytest.approx(0.5 * g.pitch)


def test_field_validation():
    g = make_grid(16, 1.0)
    with pytest.raises(ValueError):
        ComplexField(g, np.zeros((8, 8)))
    bad = np.zeros((16, 16), dtype=complex)
    bad[3, 3] = np.nan
    with pytest.raises(ValueError):
        ComplexField(g, bad)
    f = ComplexField(g, np.ones((16, 16)))
    with pytest.raises(ValueError):
        f.samples[0, 0] = 2


def test_inner_product_examples(beam, grid):
    g0 = gaussian(beam, grid)
    l1 = eval_lg(ModeIndex(1), beam, grid)
    assert abs(inner_product(g0, g0) - 1) < 1e-9
    assert abs(inner_product(g0, l1)) < 1e-6
    assert inner_product(l1, l1.scaled(2)) == pytest.approx(2 * inner_product(l1, l1), abs=1e-12)


def test_inner_product_grid_mismatch(beam, grid, small_grid):
    with pytest.raises(GridMismatchError):
        inner_product(gaussian(beam, grid), gaussian(beam, small_grid))


def _random_field(seed, n=16):
    r = np.random.default_rng(seed)
    return ComplexField(make_grid(n, 1.0), r.normal(size=(n, n)) + 1j * r.normal(size=(n, n)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 2**31), st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_inner_product_sesquilinear(s1, s2, a):
    f, g = _random_field(s1), _random_field(s2)
    fg = inner_product(f, g)
    scale = abs(fg) + f.norm() * g.norm()
    assert abs(fg - np.conj(inner_product(g, f))) <= 1e-9 * scale
    assert abs(inner_product(f, g.scaled(a)) - a * fg) <= 1e-9 * scale * (1 + abs(a))
    assert abs(inner_product(f.scaled(a), g) - np.conj(a) * fg) <= 1e-9 * scale * (1 + abs(a))
    assert abs(inner_product(f, f + g) - (inner_product(f, f) + fg)) <= 1e-9 * (scale + f.power())
    pos = inner_product(f, f)
    assert pos.real > 0 and abs(pos.imag) <= 1e-12 * pos.real


@pytest.mark.parametrize("l", [-2, -1, 0, 1, 2])
@pytest.mark.parametrize("radius_w", [0.5, 1.0, 2.0])
def test_winding_number_radius_invariant(beam, grid, l, radius_w):
    f = eval_lg(ModeIndex(l), beam, grid)
    assert winding_number(f, (0, 0), radius_w * beam.waist) == l


def test_winding_number_errors(beam, grid):
    f = eval_lg(ModeIndex(1), beam, grid)
    with pytest.raises(ValueError, match="leaves"):
        winding_number(f, (0, 0), grid.extent)
    with pytest.raises(ValueError, match="below the floor"):
        winding_number(f, (0, 0), 0.5 * beam.waist, amplitude_floor=0.95)


def test_find_singularities_single_vortex(beam, grid):
    s = find_singularities(eval_lg(ModeIndex(1), beam, grid))
    assert len(s) == 1
    assert s[0].charge == 1
    assert s[0].radius <= grid.pitch


def test_find_singularities_gaussian_empty(beam, grid):
    assert find_singularities(gaussian(beam, grid)) == []


@pytest.mark.parametrize("l", [-2, 2])
def test_find_singularities_centered_double_vortex(beam, grid, l):
    # steps of exactly pi on the central plaquette edges
    s = find_singularities(eval_lg(ModeIndex(l), beam, grid))
    assert [(v.x, v.y, v.charge) for v in s] == [(0.0, 0.0, l)]


def test_superposition_gaussian_lg2(beam, grid):
    """a G + b LG2 = 0  <=>  (x + i y)^2 / w^2 = -a / (sqrt(2) b): two roots, opposite."""
    a, b = 0.6, 0.8 * np.exp(0.7j)
    f = gaussian(beam, grid).scaled(a) + eval_lg(ModeIndex(2), beam, grid).scaled(b)
    s = find_singularities(f)
    assert [v.charge for v in s] == [1, 1]
    z = np.sqrt(-a / (np.sqrt(2) * b)) * beam.waist
    expected = {(z.real, z.imag), (-z.real, -z.imag)}
    for v in s:
        assert min(np.hypot(v.x - ex, v.y - ey) for ex, ey in expected) <= grid.pitch
    assert np.hypot(s[0].x + s[1].x, s[0].y + s[1].y) <= grid.pitch


@pytest.mark.parametrize(
    "terms",
    [{0: 1.0, 2: 1.0}, {1: 1.0, -1: 0.5}, {0: 0.3, 1: 1.0, -2: 0.4j}, {-1: 1.0, 2: 0.2}],
)
def test_total_charge_matches_enclosing_loop(beam, grid, terms):
    f = sum((eval_lg(ModeIndex(l), beam, grid).scaled(c) for l, c in terms.items()), start=gaussian(beam, grid).scaled(0))
    loop_r = 2.5 * beam.waist
    total = sum(v.charge for v in find_singularities(f) if v.radius < loop_r)
    assert total == winding_number(f, (0, 0), loop_r)

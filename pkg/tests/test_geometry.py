import numpy as np
import pytest
from hypothesis import given, strategies as st

from ecfsim.geometry import (LargeScaleMap, NetworkGeometry, dbw_to_watts, draw_channel, large_scale,
                             pathloss_db, place_uniform, rng_stream, wrap_distance)


def test_placement_shapes_and_bounds():
    geom = place_uniform(30, 5, 1000.0, seed=1)
    assert geom.ap_positions.shape == (30, 2) and geom.ue_positions.shape == (5, 2)
    for pts in (geom.ap_positions, geom.ue_positions):
        assert np.all((pts >= 0) & (pts < 1000.0))


@pytest.mark.parametrize("m,l", [(5, 5), (3, 0), (2, 4)])
def test_placement_rejects_bad_counts(m, l):
    with pytest.raises(ValueError):
        place_uniform(m, l, 1000.0, seed=0)


def test_wrap_distance_corner_case():
    assert wrap_distance((10, 10), (990, 990), 1000) == pytest.approx(np.hypot(20, 20))
    assert wrap_distance((0, 0), (500, 0), 1000) == pytest.approx(500)


@given(st.floats(0, 1000), st.floats(0, 1000), st.floats(0, 1000), st.floats(0, 1000))
def test_wrap_distance_bounded_and_symmetric(x1, y1, x2, y2):
    d = wrap_distance((x1, y1), (x2, y2), 1000)
    assert d == pytest.approx(wrap_distance((x2, y2), (x1, y1), 1000))
    assert d <= np.hypot(500, 500) + 1e-9


def test_distance_matrix_matches_pairwise():
    geom = place_uniform(8, 3, 1000.0, seed=4)
    D = geom.distances()
    for m in range(8):
        for l in range(3):
            assert D[m, l] == pytest.approx(wrap_distance(geom.ap_positions[m], geom.ue_positions[l], 1000))


def test_pathloss_values():
    assert pathloss_db(1.0) == pytest.approx(-30.5)
    assert pathloss_db(100.0) == pytest.approx(-30.5 - 73.4)
    assert pathloss_db(0.2) == pytest.approx(-30.5)  # clamped at d_min


def test_shadowing_statistics():
    geom = NetworkGeometry(np.zeros((200, 2)), np.full((100, 2), 100.0), 1000.0)
    ls = large_scale(geom, 4.0, seed=3)
    dev = 10 * np.log10(ls.beta) - pathloss_db(geom.distances())
    assert abs(dev.mean()) < 0.1 and abs(dev.std() - 4.0) < 0.1


def test_zero_shadowing_is_deterministic_pathloss():
    geom = place_uniform(6, 2, 1000.0, seed=2)
    ls = large_scale(geom, 0.0, seed=9)
    assert np.allclose(10 * np.log10(ls.beta), pathloss_db(geom.distances()))


def test_channel_normalization_and_variance():
    beta = np.full((400, 50), 1e-11)
    ch = draw_channel(LargeScaleMap(beta), -130.0, seed=5)
    expected = 1e-11 / dbw_to_watts(-130.0)
    assert np.mean(np.abs(ch.g) ** 2) == pytest.approx(expected, rel=0.03)
    assert abs(np.mean(ch.g.real * ch.g.imag)) < 0.03 * expected
    assert np.allclose(ch.beta_normalized, expected)


def test_large_scale_map_validation():
    with pytest.raises(ValueError):
        LargeScaleMap(np.array([[1.0, 0.0]]))
    with pytest.raises(ValueError):
        LargeScaleMap(np.array([[np.inf]]))


def test_streams_reproducible_and_distinct():
    a = rng_stream(7, 100, 3, "fading").standard_normal(4)
    b = rng_stream(7, 100, 3, "fading").standard_normal(4)
    c = rng_stream(7, 100, 3, "placement").standard_normal(4)
    d = rng_stream(8, 100, 3, "fading").standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c) and not np.allclose(a, d)

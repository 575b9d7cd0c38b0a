import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fractrans.errors import BadProbabilities
from fractrans.geometry import AffineMap2
from fractrans.ifs import (
    UNIT_INTERVAL,
    Address,
    IfsSystem,
    Rect,
    attractor_chaos_game,
    attractor_deterministic,
    attractor_step,
    cell_indices,
    coding_point,
    coding_points,
    occupancy_to_image,
    recommended_depth,
)
from fractrans.sections import _dilate
from fractrans.transform import hp_system, repeller_ifs

import oracles

HALF = hp_system(0.5)
CANTOR = IfsSystem((AffineMap2(1 / 3, 0, 0, 1 / 3), AffineMap2(1 / 3, 0, 0, 1 / 3, 2 / 3, 2 / 3)), lipschitz_bound=1 / 3)
# a single contraction, written as two identical maps
ORIGIN_PAIR = IfsSystem((AffineMap2(0.5, 0, 0, 0.5), AffineMap2(0.5, 0, 0, 0.5)))


def test_coding_point_all_ones():
    got = coding_point(HALF, Address.parse("1" * 10), (1, 1))
    assert got == pytest.approx((2**-10, 2**-10), abs=1e-18)


def test_coding_point_two_symbols():
    # h1(h3(0, 0)) = h1(0.6, 0.6) = (0.36, 0.36)
    want = oracles.compose_hp(0.6, [1, 3], (0, 0))
    got = coding_point(hp_system(0.6), Address((1, 3)), (0, 0))
    assert got == pytest.approx(want, abs=1e-15)
    assert got == pytest.approx((0.36, 0.36), abs=1e-15)


def test_coding_point_repeated_symbol_reaches_fixed_point():
    for i, fixed in enumerate([(0, 0), (1, 0), (1, 1), (0, 1)], start=1):
        assert coding_point(HALF, [i] * 60) == pytest.approx(fixed, abs=1e-15)


def test_coding_point_rejects_bad_addresses():
    with pytest.raises(ValueError):
        coding_point(HALF, Address(()))
    with pytest.raises(ValueError):
        coding_point(HALF, Address((5,)))
    with pytest.raises(ValueError):
        Address((0, 1))


def test_address_parse_and_str():
    assert Address.parse("1342").symbols == (1, 3, 4, 2)
    assert Address.parse("1, 3, 12").symbols == (1, 3, 12)
    assert str(Address((1, 3, 4))) == "134"
    assert len(Address.parse("12")) == 2


@pytest.mark.parametrize(
    "lipschitz, eps, expected",
    [(0.5, 1 / 512, 10), (0.66, 1 / 512, 16), (0.5, 2.0, 0), (2 / 3, 1 / 1024, oracles.depth(2 / 3, math.sqrt(2), 1 / 1024))],
)
def test_recommended_depth(lipschitz, eps, expected):
    ifs = IfsSystem(HALF.maps, lipschitz_bound=lipschitz)
    assert recommended_depth(ifs, eps) == expected == oracles.depth(lipschitz, math.sqrt(2), eps)


@given(lipschitz=st.floats(0.05, 0.95), eps=st.floats(1e-6, 1.0))
def test_recommended_depth_property(lipschitz, eps):
    ifs = IfsSystem(HALF.maps, lipschitz_bound=lipschitz)
    k = recommended_depth(ifs, eps)
    assert lipschitz**k * math.sqrt(2) <= eps
    assert k == 0 or lipschitz ** (k - 1) * math.sqrt(2) > eps


def test_depth_contract(rng):
    ifs = hp_system(0.6)
    k = 12
    words = rng.integers(1, 5, size=(1000, k))
    ax, ay = coding_points(ifs, words, (0.0, 0.0))
    bx, by = coding_points(ifs, words, (1.0, 1.0))
    bound = ifs.lipschitz_bound**k * ifs.diam + 1e-12
    assert np.all(np.hypot(ax - bx, ay - by) <= bound)


def test_ifs_validation():
    with pytest.raises(ValueError):
        IfsSystem((AffineMap2(0.5, 0, 0, 0.5),))
    with pytest.raises(ValueError):
        IfsSystem(HALF.maps, lipschitz_bound=1.0)
    with pytest.raises(ValueError):
        IfsSystem((AffineMap2(0.5, 0, 0, 0.5, 0.7, 0), AffineMap2(0.5, 0, 0, 0.5)))


def test_cantor_deterministic_matches_ternary_oracle():
    occ = attractor_deterministic(CANTOR, 8, 81)
    want = oracles.cantor_diagonal_cells(81)
    iy, ix = np.nonzero(occ)
    assert np.array_equal(ix, iy)
    assert set(ix.tolist()) == want


def test_cantor_chaos_game_agrees_with_deterministic():
    counts = attractor_chaos_game(CANTOR, (0.5, 0.5), 1_000_000, seed=3, resolution=81)
    assert np.array_equal(counts > 0, attractor_deterministic(CANTOR, 8, 81))
    ix = np.nonzero(counts.any(axis=0))[0]
    assert not np.any((ix >= 27) & (ix < 54))


def test_chaos_game_fills_square():
    counts = attractor_chaos_game(HALF, (0.25,) * 4, 1_000_000, seed=1, resolution=64)
    assert np.all(counts > 0)
    assert counts.sum() == 1_000_000


def test_chaos_game_single_contraction_hits_origin_only():
    counts = attractor_chaos_game(ORIGIN_PAIR, (0.3, 0.7), 10_000, seed=5, resolution=64)
    assert counts[0, 0] == 10_000 and counts.sum() == 10_000


def test_chaos_game_deterministic_and_thread_independent():
    a = attractor_chaos_game(HALF, (0.1, 0.2, 0.3, 0.4), 200_000, seed=9, resolution=32, orbits=4, threads=1)
    b = attractor_chaos_game(HALF, (0.1, 0.2, 0.3, 0.4), 200_000, seed=9, resolution=32, orbits=4, threads=4)
    assert np.array_equal(a, b)
    c = attractor_chaos_game(HALF, (0.1, 0.2, 0.3, 0.4), 200_000, seed=1000, resolution=32, orbits=4)
    assert not np.array_equal(a, c)


def test_chaos_game_rejects_bad_probabilities():
    with pytest.raises(BadProbabilities):
        attractor_chaos_game(HALF, (0.5, 0.5, 0.5, -0.5), 10, 0, 8)
    with pytest.raises(BadProbabilities):
        attractor_chaos_game(HALF, (0.3, 0.3, 0.3), 10, 0, 8)


def test_repeller_attractor_is_symmetric():
    occ = attractor_deterministic(repeller_ifs(2 / 3, 0.5), 30, 512)
    # (x, y) -> (1 - y, 1 - x) on cells [iy, ix] is a flip of both axes plus transpose
    mirrored = occ[::-1, ::-1].T
    assert np.all(occ <= _dilate(mirrored))
    assert np.all(mirrored <= _dilate(occ))


def test_set_iteration_invariance():
    ifs = repeller_ifs(2 / 3, 0.5)
    occ = attractor_deterministic(ifs, 10, 256)
    nxt = attractor_step(ifs, occ)
    assert np.all(nxt <= _dilate(attractor_step(ifs, occ)))
    assert np.array_equal(nxt, attractor_deterministic(ifs, 11, 256))


def test_cell_indices_clamps_one():
    ix, iy, ok = cell_indices(Rect(), np.array([0.0, 0.5, 1.0, 1.5]), np.array([0.0, 0.5, 1.0, 0.5]), 4)
    assert ix.tolist()[:3] == [0, 2, 3] and iy.tolist()[:3] == [0, 2, 3]
    assert ok.tolist() == [True, True, True, False]


def test_interval_raster_uses_one_row():
    ifs = IfsSystem((AffineMap2(0.5, 0, 0, 1), AffineMap2(0.5, 0, 0, 1, 0.5, 0)), UNIT_INTERVAL)
    occ = attractor_deterministic(ifs, 5, 32)
    assert occ[0].all() and not occ[1:].any()


def test_occupancy_png_is_flipped(tmp_path):
    occ = np.zeros((4, 4), dtype=bool)
    occ[0, 0] = True  # bottom-left cell
    img = np.asarray(occupancy_to_image(occ))
    assert img[3, 0] == 255 and img.sum() == 255

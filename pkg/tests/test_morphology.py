import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermoseg.errors import ParameterError, PreconditionError
from thermoseg.morphology import (
    CROSS3,
    SQUARE3,
    MorphSettings,
    StructuringElement,
    dilate,
    h_dome,
    reconstruct,
    reconstruct_naive,
    regional_maxima,
    regularized_marker,
)
from thermoseg.raster import ThermalRaster

from conftest import random_raster, row_raster


def dilate_oracle(values, se):
    """Neighborhood max with out-of-bounds ignored, straight from the definition."""
    h, w = values.shape
    out = np.empty_like(values)
    for r in range(h):
        for c in range(w):
            best = -np.inf
            for dr, dc in se.offsets:
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w:
                    best = max(best, values[rr, cc])
            out[r, c] = best
    return out


def maxima_oracle(values, connectivity):
    """Plateaus of equal value strictly above every outward neighbor."""
    h, w = values.shape
    if connectivity == 8:
        offs = [(r, c) for r in (-1, 0, 1) for c in (-1, 0, 1) if (r, c) != (0, 0)]
    else:
        offs = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    seen = np.zeros((h, w), dtype=bool)
    result = set()
    for r0 in range(h):
        for c0 in range(w):
            if seen[r0, c0]:
                continue
            level = values[r0, c0]
            plateau = []
            stack = [(r0, c0)]
            seen[r0, c0] = True
            is_max = True
            while stack:
                r, c = stack.pop()
                plateau.append((r, c))
                for dr, dc in offs:
                    rr, cc = r + dr, c + dc
                    if not (0 <= rr < h and 0 <= cc < w):
                        continue
                    if values[rr, cc] == level:
                        if not seen[rr, cc]:
                            seen[rr, cc] = True
                            stack.append((rr, cc))
                    elif values[rr, cc] > level:
                        is_max = False
            if is_max:
                result.add(frozenset(plateau))
    return result


def region_pixel_sets(region_set):
    return {
        frozenset((int(r), int(c)) for r, c in reg.pixels)
        for reg in region_set.regions
    }


small_values = st.lists(st.integers(min_value=-4, max_value=4), min_size=1, max_size=30)
small_dims = st.tuples(st.integers(1, 5), st.integers(1, 6))


def _raster_pair(draw):
    hh, ww = draw(small_dims)
    n = hh * ww
    f = draw(st.lists(st.integers(-4, 4), min_size=n, max_size=n))
    drop = draw(st.lists(st.integers(0, 6), min_size=n, max_size=n))
    f = np.array(f, dtype=np.float64).reshape(hh, ww)
    g = f - np.array(drop, dtype=np.float64).reshape(hh, ww)
    return ThermalRaster(g), ThermalRaster(f)


raster_pairs = st.composite(_raster_pair)()


class TestStructuringElement:
    def test_factories(self):
        assert len(SQUARE3.offsets) == 9
        assert len(CROSS3.offsets) == 5
        assert SQUARE3.footprint().shape == (3, 3)
        assert SQUARE3.footprint().all()
        fp = CROSS3.footprint()
        assert fp.sum() == 5 and fp[1, 1] and not fp[0, 0]

    def test_requires_origin(self):
        with pytest.raises(ParameterError):
            StructuringElement(((0, 1), (0, -1)))

    def test_requires_symmetry(self):
        with pytest.raises(ParameterError):
            StructuringElement(((0, 0), (0, 1)))

    def test_scan_split_partitions(self):
        prev, post, both = SQUARE3.scan_split()
        prev = {tuple(o) for o in prev}
        post = {tuple(o) for o in post}
        assert prev.isdisjoint(post)
        assert prev | post | {(0, 0)} == set(SQUARE3.offsets)
        # raster order: predecessors read before the current pixel
        assert all(r < 0 or (r == 0 and c < 0) for r, c in prev)


class TestDilate:
    def test_three_wide_line(self):
        out = dilate(row_raster([1, 3, 2]))
        assert out.values.tolist() == [[3, 3, 3]]

    def test_origin_only_is_identity(self, rng):
        r = random_raster(rng, 4, 5)
        out = dilate(r, StructuringElement(((0, 0),)))
        assert (out.values == r.values).all()

    def test_constant_unchanged(self):
        r = ThermalRaster(np.full((3, 3), 7.0))
        assert (dilate(r).values == 7.0).all()

    @pytest.mark.parametrize("se", [SQUARE3, CROSS3], ids=["square", "cross"])
    def test_matches_oracle(self, rng, se):
        for _ in range(20):
            h = int(rng.integers(1, 7))
            w = int(rng.integers(1, 7))
            r = random_raster(rng, h, w)
            assert (dilate(r, se).values == dilate_oracle(r.values, se)).all()


class TestReconstruct:
    def test_two_peak_fixture(self):
        f = row_raster([1, 3, 2, 5, 1])
        g = row_raster([v - 2 for v in [1, 3, 2, 5, 1]])
        for fn in (reconstruct, reconstruct_naive):
            assert fn(g, f).values.tolist() == [[1, 2, 2, 3, 1]]

    def test_marker_equals_mask(self, rng):
        f = random_raster(rng, 5, 5)
        assert (reconstruct(f, f).values == f.values).all()

    def test_marker_above_mask_rejected(self):
        f = row_raster([1, 2, 3])
        g = row_raster([1, 2.5, 3])
        with pytest.raises(PreconditionError, match="marker exceeds mask by"):
            reconstruct(g, f)
        with pytest.raises(PreconditionError):
            reconstruct_naive(g, f)

    def test_sub_eps_excursion_clamped(self):
        f = row_raster([1, 2, 3])
        g = row_raster([1, 2 + 1e-9, 3])
        out = reconstruct(g, f, plateau_eps=1e-6)
        assert (out.values <= f.values).all()

    def test_shape_mismatch(self, rng):
        with pytest.raises(ParameterError):
            reconstruct(random_raster(rng, 2, 3), random_raster(rng, 3, 2))

    @pytest.mark.parametrize("se", [SQUARE3, CROSS3], ids=["square", "cross"])
    def test_fast_equals_naive_random(self, rng, se):
        shapes = [(1, 1), (1, 9), (9, 1)] + [
            (int(rng.integers(1, 17)), int(rng.integers(1, 17))) for _ in range(40)
        ]
        for hh, ww in shapes:
            f = random_raster(rng, hh, ww)
            g = ThermalRaster(f.values - rng.uniform(0, 3, size=(hh, ww)))
            fast = reconstruct(g, f, se)
            naive = reconstruct_naive(g, f, se)
            assert (fast.values == naive.values).all()

    @settings(max_examples=60, deadline=None)
    @given(raster_pairs)
    def test_sandwich(self, pair):
        g, f = pair
        r = reconstruct(g, f)
        assert (g.values <= r.values).all()
        assert (r.values <= f.values).all()

    @settings(max_examples=60, deadline=None)
    @given(raster_pairs)
    def test_idempotent(self, pair):
        g, f = pair
        r = reconstruct(g, f)
        again = reconstruct(r, f)
        assert (again.values == r.values).all()

    @settings(max_examples=60, deadline=None)
    @given(raster_pairs, st.integers(0, 3))
    def test_monotone_in_marker(self, pair, extra_drop):
        g2, f = pair
        g1 = ThermalRaster(g2.values - extra_drop)
        r1 = reconstruct(g1, f)
        r2 = reconstruct(g2, f)
        assert (r1.values <= r2.values).all()

    @settings(max_examples=60, deadline=None)
    @given(raster_pairs)
    def test_fast_equals_naive_property(self, pair):
        g, f = pair
        assert (reconstruct(g, f).values == reconstruct_naive(g, f).values).all()


class TestHDome:
    def test_h2_two_supports(self):
        dome, support = h_dome(row_raster([1, 3, 2, 5, 1]), 2.0)
        assert dome.values.tolist() == [[0, 1, 0, 2, 0]]
        assert region_pixel_sets(support) == {
            frozenset({(0, 1)}),
            frozenset({(0, 3)}),
        }

    def test_h4_merged_support(self):
        dome, support = h_dome(row_raster([1, 3, 2, 5, 1]), 4.0)
        assert dome.values.tolist() == [[0, 2, 1, 4, 0]]
        assert region_pixel_sets(support) == {frozenset({(0, 1), (0, 2), (0, 3)})}

    def test_h_must_exceed_plateau_eps(self):
        r = row_raster([1, 2, 1])
        with pytest.raises(ParameterError):
            h_dome(r, 0.0)
        with pytest.raises(ParameterError):
            h_dome(r, -1.0)
        with pytest.raises(ParameterError):
            h_dome(r, MorphSettings().plateau_eps / 2)

    def test_constant_raster(self):
        dome, support = h_dome(ThermalRaster(np.full((4, 6), 9.0)), 1.5)
        assert np.allclose(dome.values, 1.5)
        assert len(support.regions) == 1
        assert support.regions[0].area == 24

    def test_dome_bounds(self, rng):
        eps = MorphSettings().plateau_eps
        for _ in range(10):
            r = random_raster(rng, 8, 8)
            for h in (0.5, 2.0):
                dome, _ = h_dome(r, h)
                assert (dome.values >= 0).all()
                assert (dome.values <= h + eps).all()

    def test_support_grows_and_count_drops_with_h(self, rng):
        for _ in range(10):
            r = random_raster(rng, 10, 10)
            prev_mask = None
            prev_count = None
            for h in (0.5, 1.0, 2.0, 4.0):
                _, support = h_dome(r, h)
                mask = support.support_mask().values
                if prev_mask is not None:
                    assert (mask | prev_mask == mask).all()
                    assert len(support.regions) <= prev_count
                prev_mask = mask
                prev_count = len(support.regions)


class TestRegularizedMarker:
    def test_two_peak_fixture_values(self):
        f = row_raster([1, 3, 2, 5, 1])
        m = regularized_marker(f, 4.0)
        assert m.values.tolist() == [[1, 2.5, 1.9375, 1, 1]]
        rec = reconstruct(m, f)
        assert (rec.values == reconstruct_naive(m, f).values).all()
        dome = f.values - rec.values
        assert dome.tolist() == [[0, 0.5, 0, 3, 0]]

    def test_preserves_peaks_that_plain_dome_merges(self):
        f = row_raster([1, 3, 2, 5, 1])
        _, plain = h_dome(f, 4.0)
        assert len(plain.regions) == 1
        m = regularized_marker(f, 4.0)
        dome = f.values - reconstruct(m, f).values
        from thermoseg.raster import BinaryMask, connected_components

        comps = connected_components(BinaryMask(dome > 1e-6))
        assert len(comps.regions) == 2

    def test_extreme_weights(self, rng):
        r = random_raster(rng, 6, 6, lo=0.0, hi=10.0)
        h = 2.5
        m = regularized_marker(r, h)
        offset = r.values - m.values
        imax = np.unravel_index(r.values.argmax(), r.shape)
        imin = np.unravel_index(r.values.argmin(), r.shape)
        assert offset[imax] == pytest.approx(h)
        assert offset[imin] == 0.0
        assert (m.values <= r.values).all()

    def test_flat_raster_degenerates_to_identity(self):
        r = ThermalRaster(np.full((3, 3), 4.0))
        m = regularized_marker(r, 1.0)
        assert (m.values == r.values).all()

    def test_weights_from_other_source(self, rng):
        r = random_raster(rng, 4, 4)
        flat = ThermalRaster(np.zeros((4, 4)))
        m = regularized_marker(r, 3.0, weights_from=flat)
        assert (m.values == r.values).all()
        with pytest.raises(ParameterError):
            regularized_marker(r, 3.0, weights_from=ThermalRaster(np.zeros((2, 2))))

    def test_h_validation(self):
        with pytest.raises(ParameterError):
            regularized_marker(row_raster([1, 2]), 0.0)


class TestRegionalMaxima:
    def test_single_peak_line(self):
        rs = regional_maxima(row_raster([1, 2, 2, 3, 1]))
        assert region_pixel_sets(rs) == {frozenset({(0, 3)})}

    def test_increasing_ramp(self):
        rs = regional_maxima(row_raster([1, 2, 3, 4, 5]))
        assert region_pixel_sets(rs) == {frozenset({(0, 4)})}

    def test_constant_raster_single_region(self):
        rs = regional_maxima(ThermalRaster(np.full((3, 4), 2.0)))
        assert len(rs.regions) == 1
        assert rs.regions[0].area == 12

    def test_plateau_tolerance(self):
        # values within plateau_eps belong to one plateau
        rs = regional_maxima(row_raster([0, 5, 5 + 1e-9, 0]))
        assert region_pixel_sets(rs) == {frozenset({(0, 1), (0, 2)})}

    def test_nodata_not_labeled(self, rng):
        values = np.array([[1.0, 9.0, 1.0]])
        nodata = np.array([[False, True, False]])
        rs = regional_maxima(ThermalRaster(values, nodata))
        assert frozenset({(0, 1)}) not in region_pixel_sets(rs)
        assert rs.label_map[0, 1] == 0

    @pytest.mark.parametrize("connectivity", [4, 8])
    def test_matches_oracle(self, rng, connectivity):
        for _ in range(30):
            h = int(rng.integers(1, 7))
            w = int(rng.integers(1, 7))
            values = rng.integers(0, 5, size=(h, w)).astype(np.float64)
            rs = regional_maxima(ThermalRaster(values), connectivity=connectivity)
            assert region_pixel_sets(rs) == maxima_oracle(values, connectivity)

    def test_maxima_dominate_h_dome_supports(self, rng):
        # every regional maximum sits inside some dome support
        for _ in range(5):
            r = random_raster(rng, 8, 8)
            rs = regional_maxima(r)
            _, support = h_dome(r, 0.25)
            mask = support.support_mask().values
            for reg in rs.regions:
                assert mask[reg.pixels[:, 0], reg.pixels[:, 1]].all()

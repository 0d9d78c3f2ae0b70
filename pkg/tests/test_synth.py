"""Synthetic inputs: the 1-D multi-peak signal and planted 2-D scenes.

Frozen values derived by hand before implementation:
  f(0) = sin 0 + 2 cos 5 + 3 sin 0 = 2 cos 5 = 0.5673243709264525.
  A gaussian blob contributes contrast * exp(-ln2 (d/r)^2): exactly the
  contrast at d = 0 and half of it at d = r, so the half-peak footprint
  is the disk d <= r for both profiles.
"""

import numpy as np
import pytest

from thermoseg.errors import ParameterError, RasterParseError
from thermoseg.morphology import h_dome
from thermoseg.synth import (
    Background,
    BlobSpec,
    GroundTruth,
    SceneSpec,
    format_scene_spec,
    generate_scene,
    load_truth,
    multipeak_signal,
    parse_scene_spec,
    save_truth,
)


# --- 1-D signal ----------------------------------------------------------

def test_signal_value_at_zero():
    x, f, g = multipeak_signal(0.0, 10.0, 500)
    assert x[0] == 0.0
    assert f[0] == pytest.approx(0.5673243709264525, abs=1e-12)
    assert f[0] == pytest.approx(0.56732, abs=5e-6)


def test_signal_matches_direct_formula():
    x, f, g = multipeak_signal(-2.0, 7.0, 301)
    expected = np.sin(x) + 2.0 * np.cos(2.0 * x + 5.0) + 3.0 * np.sin(3.0 * x)
    assert np.array_equal(f, expected)


def test_signal_offset_layer():
    x, f, g = multipeak_signal(0.0, 10.0, 128)
    assert np.array_equal(g, f - 3.0)
    _, f2, g2 = multipeak_signal(0.0, 10.0, 128, offset=1.25)
    assert np.array_equal(g2, f2 - 1.25)


def test_signal_two_samples_are_endpoints():
    x, f, g = multipeak_signal(1.5, 4.5, 2)
    assert np.array_equal(x, np.array([1.5, 4.5]))
    assert f.shape == g.shape == (2,)


def test_signal_uniform_spacing():
    x, _, _ = multipeak_signal(0.0, 10.0, 41)
    assert np.diff(x) == pytest.approx(0.25, abs=1e-12)


def test_signal_validation():
    with pytest.raises(ParameterError, match="n_samples"):
        multipeak_signal(0.0, 1.0, 1)
    with pytest.raises(ParameterError, match="n_samples"):
        multipeak_signal(0.0, 1.0, 2.0)  # float count is a bug, not a request
    with pytest.raises(ParameterError, match="x_min < x_max"):
        multipeak_signal(3.0, 3.0, 10)
    with pytest.raises(ParameterError, match="x_min < x_max"):
        multipeak_signal(5.0, 3.0, 10)


# --- backgrounds ---------------------------------------------------------

def test_constant_background_render():
    raster, truth = generate_scene(
        SceneSpec(width=17, height=24, background=Background("constant", base=25.0))
    )
    assert raster.shape == (24, 17)
    assert (raster.values == 25.0).all()
    assert truth.blob_count == 0
    assert truth.defect_mask().area == 0


def test_ramp_background_render():
    bg = Background("ramp", base=20.0, grad_row=0.5, grad_col=0.25)
    raster, _ = generate_scene(SceneSpec(width=4, height=3, background=bg))
    rows = np.arange(3.0)[:, None]
    cols = np.arange(4.0)[None, :]
    assert np.array_equal(raster.values, 20.0 + 0.5 * rows + 0.25 * cols)


def test_smooth_background_render():
    bg = Background("smooth", base=20.0, amplitude=2.0, wavelength=16.0)
    raster, _ = generate_scene(SceneSpec(width=32, height=5, background=bg))
    cols = np.arange(32.0)
    expected = 20.0 + 2.0 * np.sin(2.0 * np.pi * cols / 16.0)
    assert np.array_equal(raster.values, np.broadcast_to(expected, (5, 32)))
    # drift varies across columns only
    assert (raster.values == raster.values[0]).all()


def test_background_validation():
    with pytest.raises(ParameterError, match="kind"):
        Background("bumpy")
    with pytest.raises(ParameterError, match="finite"):
        Background("constant", base=float("nan"))
    with pytest.raises(ParameterError, match="wavelength"):
        Background("smooth", amplitude=1.0, wavelength=0.0)


# --- blobs and ground truth ----------------------------------------------

def test_gaussian_peak_equals_contrast():
    blob = BlobSpec(center_row=30.0, center_col=40.0, radius=6.0, contrast=3.0)
    spec = SceneSpec(width=64, height=64, background=Background("constant"), blobs=(blob,))
    raster, _ = generate_scene(spec)
    assert raster.values.max() - 20.0 == pytest.approx(3.0, abs=1e-9)
    assert np.unravel_index(np.argmax(raster.values), raster.shape) == (30, 40)


def test_half_peak_footprint_matches_distance_oracle():
    blob = BlobSpec(center_row=20.0, center_col=33.5, radius=7.25, contrast=2.0)
    spec = SceneSpec(width=60, height=48, background=Background("constant"), blobs=(blob,))
    _, truth = generate_scene(spec)
    rows = np.arange(48.0)[:, None]
    cols = np.arange(60.0)[None, :]
    inside = np.hypot(rows - 20.0, cols - 33.5) <= 7.25
    assert np.array_equal(truth.label_map == 1, inside)
    # gaussian contribution crosses contrast/2 exactly at the footprint rim
    rendered = blob.render(48, 60)
    assert (rendered[inside] >= 2.0 * np.exp(-np.log(2.0) * 1.0) - 1e-12).all()
    assert (rendered[~inside] < 1.0).all()


def test_plateau_profile_is_flat_inside():
    blob = BlobSpec(10.0, 10.0, 4.0, 1.5, profile="plateau")
    rendered = blob.render(21, 21)
    inside = blob.footprint(21, 21)
    assert (rendered[inside] == 1.5).all()
    assert (rendered[~inside] == 0.0).all()


def test_cold_blob_allowed():
    blob = BlobSpec(8.0, 8.0, 3.0, -2.0)
    spec = SceneSpec(width=17, height=17, background=Background("constant"), blobs=(blob,))
    raster, truth = generate_scene(spec)
    assert raster.values.min() - 20.0 == pytest.approx(-2.0, abs=1e-9)
    assert truth.blob_mask(1).values[8, 8]


def test_blob_fully_outside_raises():
    blob = BlobSpec(-40.0, -40.0, 5.0, 1.0)
    spec = SceneSpec(width=32, height=32, background=Background("constant"), blobs=(blob,))
    with pytest.raises(ParameterError, match="fully outside"):
        generate_scene(spec)
    # partially inside is fine
    edge = BlobSpec(0.0, 0.0, 3.0, 1.0)
    _, truth = generate_scene(
        SceneSpec(width=32, height=32, background=Background("constant"), blobs=(edge,))
    )
    assert truth.blob_mask(1).area > 0


def test_overlapping_blobs_later_wins():
    blobs = (BlobSpec(10.0, 10.0, 5.0, 1.0), BlobSpec(10.0, 14.0, 5.0, 1.0))
    _, truth = generate_scene(
        SceneSpec(width=30, height=30, background=Background("constant"), blobs=blobs)
    )
    assert truth.label_map[10, 12] == 2  # inside both footprints
    assert truth.label_map[10, 6] == 1


def test_blob_spec_validation():
    with pytest.raises(ParameterError, match="radius"):
        BlobSpec(5.0, 5.0, 0.5, 1.0)
    with pytest.raises(ParameterError, match="contrast"):
        BlobSpec(5.0, 5.0, 2.0, 0.0)
    with pytest.raises(ParameterError, match="profile"):
        BlobSpec(5.0, 5.0, 2.0, 1.0, profile="cone")
    with pytest.raises(ParameterError, match="center_row"):
        BlobSpec(float("inf"), 5.0, 2.0, 1.0)


def test_scene_spec_validation():
    bg = Background("constant")
    with pytest.raises(ParameterError, match="width"):
        SceneSpec(width=0, height=4, background=bg)
    with pytest.raises(ParameterError, match="noise_std"):
        SceneSpec(width=4, height=4, background=bg, noise_std=-0.1)
    with pytest.raises(ParameterError, match="seed"):
        SceneSpec(width=4, height=4, background=bg, seed=-1)


def test_truth_blob_mask_bounds():
    _, truth = generate_scene(
        SceneSpec(width=20, height=20, background=Background("constant"),
                  blobs=(BlobSpec(10.0, 10.0, 3.0, 1.0),))
    )
    assert truth.blob_count == 1
    with pytest.raises(ParameterError, match="blob_id"):
        truth.blob_mask(0)
    with pytest.raises(ParameterError, match="blob_id"):
        truth.blob_mask(2)


def test_blob_boundary_is_inner_rim():
    _, truth = generate_scene(
        SceneSpec(width=24, height=24, background=Background("constant"),
                  blobs=(BlobSpec(12.0, 12.0, 4.0, 1.0),))
    )
    mask = truth.blob_mask(1).values
    boundary = truth.blob_boundary(1)
    assert boundary.dtype == np.int32 and boundary.shape[1] == 2
    on_rim = np.zeros_like(mask)
    on_rim[boundary[:, 0], boundary[:, 1]] = True
    # oracle: mask pixels with at least one 8-neighbor outside the mask
    padded = np.pad(mask, 1, constant_values=True)
    oracle = np.zeros_like(mask)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            oracle |= ~padded[1 + dr : 25 + dr, 1 + dc : 25 + dc]
    oracle &= mask
    assert np.array_equal(on_rim, oracle)
    assert not on_rim[12, 12]


# --- determinism and the noise layer -------------------------------------

def test_same_spec_bit_identical():
    spec = SceneSpec(
        width=40, height=30, background=Background("ramp", grad_col=0.05),
        blobs=(BlobSpec(15.0, 20.0, 4.0, 2.0),), noise_std=0.3, seed=7,
    )
    r1, t1 = generate_scene(spec)
    r2, t2 = generate_scene(spec)
    assert r1.values.tobytes() == r2.values.tobytes()
    assert np.array_equal(t1.label_map, t2.label_map)


def test_noise_layer_is_seeded_standard_normal():
    base = SceneSpec(
        width=25, height=18, background=Background("constant", base=21.0),
        blobs=(BlobSpec(9.0, 12.0, 3.0, 1.0),),
    )
    noiseless, _ = generate_scene(base)
    noisy, _ = generate_scene(
        SceneSpec(width=25, height=18, background=base.background,
                  blobs=base.blobs, noise_std=0.05, seed=11)
    )
    expected = noiseless.values + np.random.default_rng(11).standard_normal((18, 25)) * 0.05
    assert np.array_equal(noisy.values, expected)


def test_different_seeds_differ_only_in_noise():
    def scene(seed):
        return SceneSpec(
            width=30, height=22, background=Background("ramp", grad_row=0.1),
            blobs=(BlobSpec(11.0, 15.0, 3.0, 1.5),), noise_std=0.08, seed=seed,
        )

    noiseless, _ = generate_scene(
        SceneSpec(width=30, height=22, background=Background("ramp", grad_row=0.1),
                  blobs=(BlobSpec(11.0, 15.0, 3.0, 1.5),))
    )
    ra, ta = generate_scene(scene(1))
    rb, tb = generate_scene(scene(2))
    assert not np.array_equal(ra.values, rb.values)
    assert np.array_equal(ta.label_map, tb.label_map)
    for raster, seed in ((ra, 1), (rb, 2)):
        noise = np.random.default_rng(seed).standard_normal((22, 30)) * 0.08
        assert np.array_equal(raster.values, noiseless.values + noise)


def test_separated_blobs_give_one_dome_support_each():
    # cross-module oracle: on a flat background, k isolated bumps of
    # contrast > h must carve exactly k supports at offset h
    blobs = (
        BlobSpec(20.0, 20.0, 4.0, 1.5),
        BlobSpec(20.0, 70.0, 4.0, 2.0),
        BlobSpec(70.0, 45.0, 4.0, 3.0),
    )
    raster, _ = generate_scene(
        SceneSpec(width=90, height=90, background=Background("constant"), blobs=blobs)
    )
    dome, supports = h_dome(raster, 1.0)
    assert len(supports) == 3
    label = supports.label_map
    hit = {int(label[int(b.center_row), int(b.center_col)]) for b in blobs}
    assert 0 not in hit and len(hit) == 3


# --- serialization -------------------------------------------------------

def test_scene_spec_round_trip():
    spec = SceneSpec(
        width=136, height=96,
        background=Background("ramp", base=20.0, grad_row=0.0113, grad_col=0.0249),
        blobs=(BlobSpec(48.0, 26.7, 14.5, 2.2), BlobSpec(48.0, 127.7, 12.0, 1.69, "plateau")),
        noise_std=0.05, seed=13,
    )
    assert parse_scene_spec(format_scene_spec(spec)) == spec


def test_scene_spec_minimal_defaults():
    spec = parse_scene_spec("width=8\nheight=6\nbackground.kind=constant\n")
    assert spec == SceneSpec(width=8, height=6, background=Background("constant"))
    assert spec.noise_std == 0.0 and spec.seed == 0 and spec.blobs == ()


def test_scene_spec_parse_errors():
    with pytest.raises(ParameterError, match="missing required key"):
        parse_scene_spec("height=6\nbackground.kind=constant\n")
    with pytest.raises(ParameterError, match="invalid value"):
        parse_scene_spec("width=abc\nheight=6\nbackground.kind=constant\n")
    with pytest.raises(ParameterError, match="unknown scene spec keys"):
        parse_scene_spec("width=8\nheight=6\nbackground.kind=constant\nwidht=9\n")
    # declared blob without its keys
    with pytest.raises(ParameterError, match="blob.1.center_row"):
        parse_scene_spec("width=8\nheight=6\nbackground.kind=constant\nblobs=1\n")


def test_scene_spec_comments_and_blank_lines():
    text = "# two-blob scene\n\nwidth=8\nheight=6\nbackground.kind=constant\nseed=3\n"
    assert parse_scene_spec(text).seed == 3


def test_truth_round_trip(tmp_path):
    _, truth = generate_scene(
        SceneSpec(width=12, height=9, background=Background("constant"),
                  blobs=(BlobSpec(4.0, 4.0, 2.0, 1.0), BlobSpec(4.0, 9.0, 2.0, 1.0)))
    )
    path = tmp_path / "truth.csv"
    save_truth(path, truth)
    loaded = load_truth(path)
    assert np.array_equal(loaded.label_map, truth.label_map)


def test_truth_parse_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,1\n0,1,1\n")
    with pytest.raises(RasterParseError, match="row 2"):
        load_truth(path)
    path.write_text("0,x\n")
    with pytest.raises(RasterParseError, match="integers"):
        load_truth(path)
    path.write_text("\n\n")
    with pytest.raises(RasterParseError, match="empty"):
        load_truth(path)
    path.write_text("0,-1\n")
    with pytest.raises(RasterParseError, match=">= 0"):
        load_truth(path)


def test_truth_label_map_read_only():
    truth = GroundTruth(np.array([[0, 1], [1, 0]]))
    with pytest.raises(ValueError):
        truth.label_map[0, 0] = 5

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dc3.errors import ConfigInvalid, DimensionMismatch, WrongVariantCount
from dc3.stitcher import (
    StitchKind,
    StitchStrategy,
    parse_strategy,
    provenance_mask,
    stitch,
)

ALL_STRATEGIES = [
    StitchStrategy(StitchKind.HALF2),
    StitchStrategy(StitchKind.QUARTER4),
    StitchStrategy(StitchKind.PIXELMASK, fraction=0.5),
    StitchStrategy(StitchKind.PIXELMASK, fraction=0.25),
    StitchStrategy(StitchKind.GRID, grid_n=8),
    StitchStrategy(StitchKind.GRID, grid_n=16),
]


def _variants(count, height, width, seed=0):
    rng = np.random.default_rng(seed)
    return [
        rng.integers(0, 256, (height, width, 3)).astype(np.uint8)
        for _ in range(count)
    ]


# ----------------------------------------------------------------- parsing

def test_parse_round_trips_every_spelled_strategy():
    for text, expected in [
        ("half2", StitchStrategy(StitchKind.HALF2)),
        ("quarter4", StitchStrategy(StitchKind.QUARTER4)),
        ("pixels:0.5", StitchStrategy(StitchKind.PIXELMASK, fraction=0.5)),
        ("pixels:0.3", StitchStrategy(StitchKind.PIXELMASK, fraction=0.3)),
        ("pixels", StitchStrategy(StitchKind.PIXELMASK)),
        ("grid:8", StitchStrategy(StitchKind.GRID, grid_n=8)),
        ("grid:16", StitchStrategy(StitchKind.GRID, grid_n=16)),
        ("grid", StitchStrategy(StitchKind.GRID)),
    ]:
        parsed = parse_strategy(text)
        assert parsed == expected
        assert parse_strategy(parsed.spec_string()) == parsed


def test_parse_rejects_nonsense():
    for text in ("mosaic", "pixels:2", "pixels:x", "grid:0", "grid:x", "half2:3"):
        with pytest.raises(ConfigInvalid):
            parse_strategy(text)


# ------------------------------------------------------------------- masks

def test_half2_takes_the_left_columns_from_variant_zero():
    mask = provenance_mask(StitchStrategy(StitchKind.HALF2), 1, 4, 4)
    assert (mask[:, :2] == 0).all()
    assert (mask[:, 2:] == 1).all()


def test_quarter4_assigns_quadrants_in_reading_order():
    mask = provenance_mask(StitchStrategy(StitchKind.QUARTER4), 1, 6, 4)
    assert (mask[:2, :3] == 0).all()
    assert (mask[:2, 3:] == 1).all()
    assert (mask[2:, :3] == 2).all()
    assert (mask[2:, 3:] == 3).all()


def test_pixel_mask_balance_is_exact():
    strat = StitchStrategy(StitchKind.PIXELMASK, fraction=0.5)
    mask = provenance_mask(strat, 7, 64, 64)
    assert (mask == 0).sum() == 2048
    strat = StitchStrategy(StitchKind.PIXELMASK, fraction=0.3)
    mask = provenance_mask(strat, 7, 10, 10)
    assert (mask == 0).sum() == 30


@given(
    seed=st.integers(0, 2**64 - 1),
    width=st.integers(1, 40),
    height=st.integers(1, 40),
    fraction=st.floats(0, 1),
)
@settings(max_examples=100)
def test_pixel_mask_count_is_the_rounded_fraction(seed, width, height, fraction):
    strat = StitchStrategy(StitchKind.PIXELMASK, fraction=fraction)
    mask = provenance_mask(strat, seed, width, height)
    expected = int(np.floor(fraction * width * height + 0.5))
    assert (mask == 0).sum() == expected
    assert np.array_equal(mask, provenance_mask(strat, seed, width, height))


def test_grid_cell_counts_and_remainder_absorption():
    mask = provenance_mask(StitchStrategy(StitchKind.GRID, grid_n=8), 3, 224, 224)
    zero_cells = 0
    for i in range(8):
        for j in range(8):
            cell = mask[i * 28 : (i + 1) * 28, j * 28 : (j + 1) * 28]
            assert len(np.unique(cell)) == 1
            zero_cells += int(cell[0, 0] == 0)
    assert zero_cells == 32

    # 30 is not divisible by 8: cells are 3 wide, the last column takes 9
    mask = provenance_mask(StitchStrategy(StitchKind.GRID, grid_n=8), 3, 30, 30)
    assert mask.shape == (30, 30)
    assert len(np.unique(mask[:3, 21:])) == 1


def test_grid16_on_32px_images_gives_128_cells_each():
    mask = provenance_mask(StitchStrategy(StitchKind.GRID, grid_n=16), 9, 32, 32)
    assert (mask == 0).sum() == 128 * 4
    assert (mask == 1).sum() == 128 * 4


def test_grid_odd_cell_count_favors_variant_zero():
    mask = provenance_mask(StitchStrategy(StitchKind.GRID, grid_n=3), 5, 9, 9)
    zero_cells = sum(
        mask[i * 3, j * 3] == 0 for i in range(3) for j in range(3)
    )
    assert zero_cells == 5  # ceil(9 / 2)


def test_grid_requires_enough_pixels():
    with pytest.raises(DimensionMismatch):
        provenance_mask(StitchStrategy(StitchKind.GRID, grid_n=8), 0, 4, 4)


# ------------------------------------------------------------------ stitch

@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=lambda s: s.spec_string())
def test_every_output_pixel_comes_from_the_masked_source(strategy):
    for seed in range(5):
        variants = _variants(strategy.variant_count, 32, 32, seed=seed)
        out = stitch(variants, strategy, seed)
        mask = provenance_mask(strategy, seed, 32, 32)
        for source in range(strategy.variant_count):
            sel = mask == source
            assert np.array_equal(out[sel], variants[source][sel])


def test_half2_with_identical_variants_is_identity():
    img = _variants(1, 10, 10, seed=4)[0]
    out = stitch([img, img], StitchStrategy(StitchKind.HALF2), 0)
    assert np.array_equal(out, img)


def test_stitch_is_deterministic_per_seed():
    strategy = StitchStrategy(StitchKind.PIXELMASK, fraction=0.5)
    variants = _variants(2, 16, 16)
    a = stitch(variants, strategy, 77)
    b = stitch(variants, strategy, 77)
    c = stitch(variants, strategy, 78)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_wrong_variant_count_is_rejected():
    variants = _variants(3, 8, 8)
    with pytest.raises(WrongVariantCount):
        stitch(variants, StitchStrategy(StitchKind.HALF2), 0)
    with pytest.raises(WrongVariantCount):
        stitch(variants, StitchStrategy(StitchKind.QUARTER4), 0)


def test_mismatched_variant_shapes_are_rejected():
    a = np.zeros((8, 8, 3), dtype=np.uint8)
    b = np.zeros((8, 9, 3), dtype=np.uint8)
    with pytest.raises(DimensionMismatch):
        stitch([a, b], StitchStrategy(StitchKind.HALF2), 0)


@given(seed=st.integers(0, 2**64 - 1))
@settings(max_examples=50)
def test_odd_dimensions_still_partition_every_pixel(seed):
    strategy = StitchStrategy(StitchKind.QUARTER4)
    variants = _variants(4, 7, 5, seed=1)
    out = stitch(variants, strategy, seed)
    mask = provenance_mask(strategy, seed, 5, 7)
    assert mask.shape == (7, 5)
    recovered = np.stack(variants)[mask, np.arange(7)[:, None], np.arange(5)[None, :]]
    assert np.array_equal(out, recovered)

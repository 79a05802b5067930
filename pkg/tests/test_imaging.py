"""Image container, channel planes, block grid, and file I/O."""

import numpy as np
import pytest

from gbtmark.imaging import (
    BLUE,
    BlockGrid,
    GREEN,
    RED,
    RasterImage,
    channel_by_name,
    extract_channel,
    get_block,
    load_image,
    luma_plane,
    quantize_plane,
    replace_channel,
    save_image,
    set_block,
)


def make_rgb(h=16, w=16, value=0):
    return RasterImage(np.full((h, w, 3), value, dtype=np.uint8))


class TestRasterImage:
    def test_properties(self):
        img = make_rgb(8, 12)
        assert img.height == 8
        assert img.width == 12
        assert img.channels == 3

    def test_grayscale_2d_input_expands(self):
        img = RasterImage(np.zeros((4, 4), dtype=np.uint8))
        assert img.pixels.shape == (4, 4, 1)
        assert img.channels == 1

    def test_pixels_read_only(self):
        img = make_rgb()
        with pytest.raises(ValueError):
            img.pixels[0, 0, 0] = 1

    def test_integer_range_validated(self):
        with pytest.raises(ValueError):
            RasterImage(np.full((2, 2, 3), 300, dtype=np.int32))
        with pytest.raises(ValueError):
            RasterImage(np.full((2, 2, 3), -1, dtype=np.int32))

    def test_float_input_rejected(self):
        with pytest.raises(ValueError):
            RasterImage(np.zeros((2, 2, 3), dtype=np.float64))

    def test_bad_channel_count_rejected(self):
        with pytest.raises(ValueError):
            RasterImage(np.zeros((2, 2, 2), dtype=np.uint8))

    def test_same_content(self):
        a = make_rgb(value=7)
        b = make_rgb(value=7)
        c = make_rgb(value=8)
        assert a.same_content(b)
        assert not a.same_content(c)

    def test_alpha_plane_kept(self):
        alpha = np.full((4, 4), 99, dtype=np.uint8)
        img = RasterImage(np.zeros((4, 4, 3), dtype=np.uint8), alpha=alpha)
        assert img.alpha is not None
        np.testing.assert_array_equal(img.alpha, alpha)


class TestChannels:
    def test_extract_blue_from_uniform_image(self):
        pixels = np.zeros((2, 2, 3), dtype=np.uint8)
        pixels[:, :, BLUE] = 200
        plane = extract_channel(RasterImage(pixels), BLUE)
        np.testing.assert_array_equal(plane, np.full((2, 2), 200.0))
        assert plane.dtype == np.float64

    def test_extract_grayscale_channel_zero(self):
        data = np.arange(16, dtype=np.uint8).reshape(4, 4)
        plane = extract_channel(RasterImage(data), 0)
        np.testing.assert_array_equal(plane, data.astype(np.float64))

    def test_extract_out_of_range_channel(self):
        with pytest.raises(ValueError):
            extract_channel(make_rgb(), 3)

    def test_replace_then_extract_round_trip(self):
        img = make_rgb(4, 4)
        plane = np.arange(16, dtype=np.float64).reshape(4, 4)
        out = replace_channel(img, GREEN, plane)
        np.testing.assert_array_equal(extract_channel(out, GREEN), plane)

    def test_replace_clamps_high(self):
        out = replace_channel(make_rgb(2, 2), RED, np.full((2, 2), 255.7))
        assert out.pixels[0, 0, RED] == 255

    def test_replace_clamps_low(self):
        out = replace_channel(make_rgb(2, 2, value=9), RED, np.full((2, 2), -3.2))
        assert out.pixels[0, 0, RED] == 0

    def test_replace_rounds_to_nearest(self):
        out = replace_channel(make_rgb(2, 2), BLUE, np.full((2, 2), 100.6))
        assert out.pixels[0, 0, BLUE] == 101

    def test_replace_leaves_other_channels(self):
        img = make_rgb(4, 4, value=33)
        out = replace_channel(img, BLUE, np.zeros((4, 4)))
        np.testing.assert_array_equal(out.pixels[:, :, RED], img.pixels[:, :, RED])
        np.testing.assert_array_equal(out.pixels[:, :, GREEN], img.pixels[:, :, GREEN])

    def test_replace_shape_mismatch(self):
        with pytest.raises(ValueError):
            replace_channel(make_rgb(4, 4), BLUE, np.zeros((2, 2)))

    def test_channel_by_name(self):
        assert channel_by_name("red", 3) == RED
        assert channel_by_name("green", 3) == GREEN
        assert channel_by_name("blue", 3) == BLUE
        with pytest.raises(ValueError):
            channel_by_name("blue", 1)
        with pytest.raises(ValueError):
            channel_by_name("cyan", 3)

    def test_quantize_plane(self):
        plane = np.array([[-5.0, 0.4], [254.5, 300.0]])
        out = quantize_plane(plane)
        assert out.dtype == np.uint8
        np.testing.assert_array_equal(out, [[0, 0], [254, 255]])

    def test_luma_plane_weights(self):
        pixels = np.zeros((1, 3, 3), dtype=np.uint8)
        pixels[0, 0] = (255, 0, 0)
        pixels[0, 1] = (0, 255, 0)
        pixels[0, 2] = (0, 0, 255)
        luma = luma_plane(RasterImage(pixels))
        np.testing.assert_allclose(luma[0], [0.299 * 255, 0.587 * 255, 0.114 * 255])


class TestBlockGrid:
    def test_block_count_256(self):
        grid = BlockGrid(width=256, height=256, block_size=8)
        assert grid.block_count == 1024
        assert grid.blocks_x == 32
        assert grid.blocks_y == 32

    def test_index_zero_is_top_left(self):
        plane = np.arange(256, dtype=np.float64).reshape(16, 16)
        grid = BlockGrid(width=16, height=16, block_size=8)
        np.testing.assert_array_equal(get_block(plane, grid, 0), plane[:8, :8])

    def test_row_major_block_order(self):
        plane = np.arange(256, dtype=np.float64).reshape(16, 16)
        grid = BlockGrid(width=16, height=16, block_size=8)
        np.testing.assert_array_equal(get_block(plane, grid, 1), plane[:8, 8:])
        np.testing.assert_array_equal(get_block(plane, grid, 2), plane[8:, :8])

    def test_index_out_of_range(self):
        plane = np.zeros((256, 256))
        grid = BlockGrid(width=256, height=256, block_size=8)
        with pytest.raises(ValueError):
            get_block(plane, grid, 1024)
        with pytest.raises(ValueError):
            get_block(plane, grid, -1)

    def test_origin_and_coords(self):
        grid = BlockGrid(width=32, height=32, block_size=8)
        assert grid.block_coords(0) == (0, 0)
        assert grid.block_coords(5) == (1, 1)
        assert grid.origin(5) == (8, 8)

    def test_set_then_get(self):
        plane = np.zeros((16, 16))
        grid = BlockGrid(width=16, height=16, block_size=8)
        block = np.arange(64, dtype=np.float64).reshape(8, 8)
        out = set_block(plane, grid, 3, block)
        np.testing.assert_array_equal(get_block(out, grid, 3), block)

    def test_set_leaves_other_blocks(self):
        rng = np.random.default_rng(0)
        plane = rng.uniform(0, 255, (16, 16))
        grid = BlockGrid(width=16, height=16, block_size=8)
        out = set_block(plane, grid, 0, np.zeros((8, 8)))
        for k in (1, 2, 3):
            np.testing.assert_array_equal(get_block(out, grid, k), get_block(plane, grid, k))

    def test_set_does_not_mutate_input(self):
        plane = np.zeros((16, 16))
        grid = BlockGrid(width=16, height=16, block_size=8)
        set_block(plane, grid, 0, np.ones((8, 8)))
        assert plane.sum() == 0

    def test_wrong_block_shape(self):
        plane = np.zeros((16, 16))
        grid = BlockGrid(width=16, height=16, block_size=8)
        with pytest.raises(ValueError):
            set_block(plane, grid, 0, np.zeros((4, 4)))

    def test_ragged_margins_fall_outside_grid(self):
        grid = BlockGrid(width=20, height=17, block_size=8)
        assert (grid.blocks_x, grid.blocks_y) == (2, 2)
        assert grid.block_count == 4

    def test_plane_smaller_than_one_block_rejected(self):
        with pytest.raises(ValueError):
            BlockGrid(width=4, height=16, block_size=8)

    def test_for_plane(self):
        grid = BlockGrid.for_plane(np.zeros((24, 16)), block_size=8)
        assert (grid.blocks_x, grid.blocks_y) == (2, 3)


class TestFileIO:
    def test_png_round_trip(self, tmp_path, rng):
        pixels = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
        path = tmp_path / "img.png"
        save_image(RasterImage(pixels), path)
        back = load_image(path)
        np.testing.assert_array_equal(back.pixels, pixels)

    def test_png_alpha_passes_through(self, tmp_path, rng):
        pixels = rng.integers(0, 256, (10, 10, 3), dtype=np.uint8)
        alpha = rng.integers(0, 256, (10, 10), dtype=np.uint8)
        path = tmp_path / "rgba.png"
        save_image(RasterImage(pixels, alpha=alpha), path)
        back = load_image(path)
        np.testing.assert_array_equal(back.pixels, pixels)
        np.testing.assert_array_equal(back.alpha, alpha)

    def test_grayscale_png(self, tmp_path, rng):
        data = rng.integers(0, 256, (12, 9), dtype=np.uint8)
        path = tmp_path / "gray.png"
        save_image(RasterImage(data), path)
        back = load_image(path)
        assert back.channels == 1
        np.testing.assert_array_equal(back.pixels[:, :, 0], data)

    def test_ppm_round_trip(self, tmp_path, rng):
        pixels = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
        path = tmp_path / "img.ppm"
        save_image(RasterImage(pixels), path)
        np.testing.assert_array_equal(load_image(path).pixels, pixels)

    def test_pgm_round_trip(self, tmp_path, rng):
        data = rng.integers(0, 256, (8, 8), dtype=np.uint8)
        path = tmp_path / "img.pgm"
        save_image(RasterImage(data), path)
        np.testing.assert_array_equal(load_image(path).pixels[:, :, 0], data)

    def test_pgm_rejects_color(self, tmp_path):
        with pytest.raises(ValueError):
            save_image(make_rgb(), tmp_path / "img.pgm")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.png")

    def test_sixteen_bit_rejected(self, tmp_path):
        from PIL import Image

        Image.new("I;16", (4, 4)).save(tmp_path / "deep.png")
        with pytest.raises(ValueError):
            load_image(tmp_path / "deep.png")

    def test_palette_png_promoted_to_rgb(self, tmp_path):
        from PIL import Image

        img = Image.new("P", (6, 6))
        img.putpalette([i for rgb in [(10, 20, 30)] * 256 for i in rgb])
        img.save(tmp_path / "pal.png")
        back = load_image(tmp_path / "pal.png")
        assert back.channels == 3
        assert tuple(back.pixels[0, 0]) == (10, 20, 30)

    def test_save_is_atomic_on_bad_directory(self, tmp_path):
        target = tmp_path / "missing" / "img.png"
        with pytest.raises(OSError):
            save_image(make_rgb(), target)
        assert not target.exists()

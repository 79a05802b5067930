"""Procedural host images and demo watermark generators."""

import numpy as np
import pytest

from gbtmark.corpus import (
    CLASSIC_HOSTS,
    classic_host,
    demo_logo,
    random_watermark,
    write_host_corpus,
)
from gbtmark.imaging import load_image


class TestClassicHosts:
    def test_roster_is_sorted_and_complete(self):
        assert CLASSIC_HOSTS == ("baboon", "barbara", "boats", "lena", "peppers")

    @pytest.mark.parametrize("name", CLASSIC_HOSTS)
    def test_shape_dtype_and_range(self, name):
        host = classic_host(name)
        assert host.pixels.shape == (256, 256, 3)
        assert host.pixels.dtype == np.uint8
        assert host.pixels.min() >= 16
        assert host.pixels.max() <= 239

    def test_deterministic(self):
        a = classic_host("baboon")
        b = classic_host("baboon")
        np.testing.assert_array_equal(a.pixels, b.pixels)

    def test_hosts_are_distinct(self):
        pixels = [classic_host(name).pixels for name in CLASSIC_HOSTS]
        for i in range(len(pixels)):
            for j in range(i + 1, len(pixels)):
                assert not np.array_equal(pixels[i], pixels[j])

    def test_textured_enough_for_block_analysis(self):
        # every host needs non-trivial variation inside 8x8 tiles
        for name in CLASSIC_HOSTS:
            blue = classic_host(name).pixels[:, :, 2].astype(np.float64)
            tiles = blue.reshape(32, 8, 32, 8).swapaxes(1, 2).reshape(1024, 64)
            assert np.median(tiles.std(axis=1)) > 0.5, name

    def test_custom_size(self):
        host = classic_host("lena", size=64)
        assert host.pixels.shape == (64, 64, 3)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            classic_host("mountain")


class TestWatermarks:
    def test_random_watermark_shape_and_determinism(self):
        a = random_watermark(20, 20, seed=3)
        b = random_watermark(20, 20, seed=3)
        assert a.bits.shape == (20, 20)
        np.testing.assert_array_equal(a.bits, b.bits)

    def test_demo_logo_is_binary_square(self):
        logo = demo_logo(20)
        assert logo.bits.shape == (20, 20)
        assert set(np.unique(logo.bits)) == {0, 1}

    def test_demo_logo_deterministic(self):
        np.testing.assert_array_equal(demo_logo(20).bits, demo_logo(20).bits)


class TestWriteCorpus:
    def test_writes_all_hosts(self, tmp_path):
        import os

        paths = write_host_corpus(str(tmp_path))
        names = sorted(os.path.basename(p) for p in paths)
        assert names == [f"{n}.png" for n in CLASSIC_HOSTS]
        for name, path in zip(CLASSIC_HOSTS, sorted(paths)):
            back = load_image(path)
            np.testing.assert_array_equal(back.pixels, classic_host(name).pixels)

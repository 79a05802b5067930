"""Shared fixtures: procedural host images and a default embedding graph."""

import numpy as np
import pytest

from gbtmark.corpus import CLASSIC_HOSTS, classic_host
from gbtmark.imaging import RasterImage
from gbtmark.transforms import build_graph


@pytest.fixture(scope="session")
def graph4():
    return build_graph(4)


@pytest.fixture(scope="session")
def lena():
    return classic_host("lena")


@pytest.fixture(scope="session")
def all_hosts():
    return {name: classic_host(name) for name in CLASSIC_HOSTS}


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


@pytest.fixture()
def midgray():
    return RasterImage(np.full((128, 128, 3), 128, dtype=np.uint8))

import numpy as np
import pytest

from thermoseg.raster import ThermalRaster


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_raster(rng, height, width, lo=-5.0, hi=5.0, nodata_frac=0.0):
    values = rng.uniform(lo, hi, size=(height, width))
    nodata = None
    if nodata_frac > 0:
        nodata = rng.random((height, width)) < nodata_frac
        if nodata.all():
            nodata[0, 0] = False
    return ThermalRaster(values, nodata)


def row_raster(values):
    """1xN raster from a flat list, for the 1-D fixtures."""
    return ThermalRaster(np.asarray(values, dtype=np.float64)[None, :])

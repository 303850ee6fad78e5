"""Terrain synthesis and derivatives: value-noise fractals, slope, aspect."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .grid import RasterLayer


def _smoothstep(t: np.ndarray) -> np.ndarray:
    return t * t * (3.0 - 2.0 * t)


def value_noise(shape: tuple[int, int], rng: np.random.Generator,
                octaves: int = 4, persistence: float = 0.5,
                base_cells: int = 4) -> np.ndarray:
    """Fractal value noise in [0, 1] over a (nrows, ncols) grid.

    Each octave interpolates a random lattice (smoothstep bilinear) whose
    resolution doubles per octave, starting from base_cells x base_cells.
    """
    nrows, ncols = shape
    total = np.zeros(shape, dtype=np.float64)
    amplitude = 1.0
    amp_sum = 0.0
    for octave in range(octaves):
        lat = base_cells * (2 ** octave)
        lattice = rng.random((lat + 1, lat + 1))
        # lattice-space coordinates of each cell
        gi = np.linspace(0.0, lat, nrows, endpoint=False)
        gj = np.linspace(0.0, lat, ncols, endpoint=False)
        i0 = np.minimum(gi.astype(np.int64), lat - 1)
        j0 = np.minimum(gj.astype(np.int64), lat - 1)
        ti = _smoothstep(gi - i0)[:, None]
        tj = _smoothstep(gj - j0)[None, :]
        v00 = lattice[np.ix_(i0, j0)]
        v01 = lattice[np.ix_(i0, j0 + 1)]
        v10 = lattice[np.ix_(i0 + 1, j0)]
        v11 = lattice[np.ix_(i0 + 1, j0 + 1)]
        top = v00 + (v01 - v00) * tj
        bottom = v10 + (v11 - v10) * tj
        total += amplitude * (top + (bottom - top) * ti)
        amp_sum += amplitude
        amplitude *= persistence
    total /= amp_sum
    lo, hi = total.min(), total.max()
    if hi > lo:
        total = (total - lo) / (hi - lo)
    return total


def derive_slope_aspect(elevation: RasterLayer) -> tuple[RasterLayer, RasterLayer]:
    """Slope (degrees) and downslope compass aspect (degrees, 0 = north).

    Central differences with spacing cellsize; border cells get nodata, as do
    aspect cells where the gradient magnitude is below 1e-9 (flat).  Interior
    nodata in the elevation is not allowed.
    """
    spec = elevation.spec
    if spec.nrows < 3 or spec.ncols < 3:
        raise ValidationError("slope/aspect needs a grid of at least 3x3")
    z = elevation.values
    interior_nodata = (z[1:-1, 1:-1] == spec.nodata)
    if interior_nodata.any():
        raise ValidationError("elevation has nodata in the interior")

    cs = spec.cellsize
    slope = np.full(spec.shape, spec.nodata, dtype=np.float64)
    aspect = np.full(spec.shape, spec.nodata, dtype=np.float64)

    # x east (columns increase), y north (rows increase southward)
    dzdx = (z[1:-1, 2:] - z[1:-1, :-2]) / (2.0 * cs)
    dzdy = (z[:-2, 1:-1] - z[2:, 1:-1]) / (2.0 * cs)
    mag = np.sqrt(dzdx * dzdx + dzdy * dzdy)
    slope[1:-1, 1:-1] = np.degrees(np.arctan(mag))

    flat = mag < 1e-9
    az = np.degrees(np.arctan2(-dzdx, -dzdy)) % 360.0
    interior = aspect[1:-1, 1:-1]
    interior[~flat] = az[~flat]
    aspect[1:-1, 1:-1] = interior

    return (RasterLayer(spec, slope, "slope", "degrees"),
            RasterLayer(spec, aspect, "aspect", "degrees"))

"""Raster grid model: grid geometry, scalar layers, and ASCII grid I/O.

Conventions used everywhere in the package:

* planar projected coordinates in meters, x east / y north;
* cells are indexed (i, j) with i the row from the *top* and j the column;
* cell (i, j) has its center at
  ``(xll + (j + 0.5) * cellsize, yll + (nrows - 1 - i + 0.5) * cellsize)``;
* layer values are stored as a float64 array of shape (nrows, ncols),
  row-major with the north row first (the ASCII grid row order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError

NODATA_DEFAULT = -9999.0


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a raster grid. Two layers are aligned iff all six fields match."""

    ncols: int
    nrows: int
    xll: float
    yll: float
    cellsize: float
    nodata: float = NODATA_DEFAULT

    def __post_init__(self):
        if self.ncols < 1:
            raise ValidationError(f"ncols must be >= 1, got {self.ncols}")
        if self.nrows < 1:
            raise ValidationError(f"nrows must be >= 1, got {self.nrows}")
        if not self.cellsize > 0:
            raise ValidationError(f"cellsize must be > 0, got {self.cellsize}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def width(self) -> float:
        return self.ncols * self.cellsize

    @property
    def height(self) -> float:
        return self.nrows * self.cellsize

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of the grid's outer edge."""
        return (self.xll, self.yll, self.xll + self.width, self.yll + self.height)

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        return (
            self.xll + (j + 0.5) * self.cellsize,
            self.yll + (self.nrows - 1 - i + 0.5) * self.cellsize,
        )

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (xs of shape (ncols,), ys of shape (nrows,)) of center coordinates."""
        xs = self.xll + (np.arange(self.ncols) + 0.5) * self.cellsize
        ys = self.yll + (self.nrows - 1 - np.arange(self.nrows) + 0.5) * self.cellsize
        return xs, ys

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """Containing cell of a point; points on the outer edge clamp inward."""
        if not self.contains(x, y):
            raise ValidationError(f"point ({x}, {y}) outside grid extent")
        j = min(int((x - self.xll) // self.cellsize), self.ncols - 1)
        i_bottom = min(int((y - self.yll) // self.cellsize), self.nrows - 1)
        return (self.nrows - 1 - i_bottom, j)

    def contains(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.extent
        return xmin <= x <= xmax and ymin <= y <= ymax


@dataclass
class RasterLayer:
    """A named grid of scalar values; every value is finite or equals nodata."""

    spec: GridSpec
    values: np.ndarray
    name: str
    units: str = ""

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != self.spec.shape:
            raise ValidationError(
                f"layer {self.name!r}: values shape {self.values.shape} does not "
                f"match grid {self.spec.shape}"
            )
        bad = ~np.isfinite(self.values) & ~(self.values == self.spec.nodata)
        if bad.any():
            raise ValidationError(f"layer {self.name!r}: non-finite value present")

    def aligned_with(self, other: "RasterLayer | GridSpec") -> bool:
        spec = other if isinstance(other, GridSpec) else other.spec
        return self.spec == spec

    def nodata_mask(self) -> np.ndarray:
        return self.values == self.spec.nodata

    def value_at(self, x: float, y: float) -> float:
        i, j = self.spec.cell_of(x, y)
        return float(self.values[i, j])

    def with_values(self, values: np.ndarray, name: str | None = None,
                    units: str | None = None) -> "RasterLayer":
        return RasterLayer(
            self.spec, values,
            self.name if name is None else name,
            self.units if units is None else units,
        )


def require_aligned(layers: "list[RasterLayer]") -> GridSpec:
    if not layers:
        raise ValidationError("no layers given")
    spec = layers[0].spec
    for layer in layers[1:]:
        if layer.spec != spec:
            raise ValidationError(
                f"layer {layer.name!r} not aligned with {layers[0].name!r}"
            )
    return spec


# --- ASCII grid I/O ---------------------------------------------------------
#
# Header: ncols, nrows, xllcorner, yllcorner, cellsize, NODATA_value, one per
# line in that order, then nrows lines of ncols space-separated numbers, top
# row first.  Reals are printed with 6 decimal places.

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "NODATA_value")


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def write_raster(layer: RasterLayer, path) -> None:
    spec = layer.spec
    header = [
        f"ncols {spec.ncols}",
        f"nrows {spec.nrows}",
        f"xllcorner {_fmt(spec.xll)}",
        f"yllcorner {_fmt(spec.yll)}",
        f"cellsize {_fmt(spec.cellsize)}",
        f"NODATA_value {_fmt(spec.nodata)}",
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(header))
        fh.write("\n")
        for row in layer.values:
            fh.write(" ".join(_fmt(v) for v in row))
            fh.write("\n")


def read_raster(path, name: str | None = None, units: str = "") -> RasterLayer:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header: dict[str, float] = {}
    for lineno, key in enumerate(_HEADER_KEYS, start=1):
        if lineno > len(lines):
            raise ParseError(f"missing header key {key!r}", line=lineno)
        parts = lines[lineno - 1].split()
        if len(parts) != 2 or parts[0] != key:
            raise ParseError(f"expected header key {key!r}", line=lineno)
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric value for {key!r}: {parts[1]!r}",
                             line=lineno) from None
    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    spec = GridSpec(ncols=ncols, nrows=nrows, xll=header["xllcorner"],
                    yll=header["yllcorner"], cellsize=header["cellsize"],
                    nodata=header["NODATA_value"])

    values = np.empty((nrows, ncols), dtype=np.float64)
    count = 0
    for lineno in range(len(_HEADER_KEYS) + 1, len(lines) + 1):
        for token in lines[lineno - 1].split():
            if count >= nrows * ncols:
                raise ParseError(
                    f"cell count mismatch: more than {nrows * ncols} values",
                    line=lineno)
            try:
                values[count // ncols, count % ncols] = float(token)
            except ValueError:
                raise ParseError(f"non-numeric token {token!r}",
                                 line=lineno) from None
            count += 1
    if count != nrows * ncols:
        raise ParseError(
            f"cell count mismatch: expected {nrows * ncols} values, got {count}")
    layer_name = name if name is not None else str(getattr(path, "stem", path))
    return RasterLayer(spec, values, layer_name, units)

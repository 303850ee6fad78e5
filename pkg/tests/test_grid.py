import numpy as np
import pytest

from terratwin.errors import ParseError, ValidationError
from terratwin.grid import GridSpec, RasterLayer, read_raster, write_raster

from conftest import make_layer, make_spec


class TestGridSpec:
    def test_rejects_bad_dimensions(self):
        with pytest.raises(ValidationError):
            GridSpec(ncols=0, nrows=4, xll=0, yll=0, cellsize=100)
        with pytest.raises(ValidationError):
            GridSpec(ncols=4, nrows=-1, xll=0, yll=0, cellsize=100)
        with pytest.raises(ValidationError):
            GridSpec(ncols=4, nrows=4, xll=0, yll=0, cellsize=0)

    def test_cell_center_formula(self):
        spec = make_spec(4, cellsize=100.0, xll=1000.0, yll=2000.0)
        # top-left cell: i=0 is the north row
        assert spec.cell_center(0, 0) == (1050.0, 2350.0)
        assert spec.cell_center(3, 3) == (1350.0, 2050.0)

    def test_cell_of_round_trips_centers(self):
        spec = make_spec(5, cellsize=50.0, xll=-100.0, yll=30.0)
        for i in range(5):
            for j in range(5):
                x, y = spec.cell_center(i, j)
                assert spec.cell_of(x, y) == (i, j)

    def test_cell_of_clamps_outer_edges(self):
        spec = make_spec(4)
        xmin, ymin, xmax, ymax = spec.extent
        assert spec.cell_of(xmax, ymax) == (0, 3)
        assert spec.cell_of(xmin, ymin) == (3, 0)

    def test_cell_of_outside_raises(self):
        spec = make_spec(4)
        with pytest.raises(ValidationError):
            spec.cell_of(-1.0, 0.0)

    def test_alignment_is_field_equality(self):
        a = make_layer(np.zeros((4, 4)))
        b = make_layer(np.ones((4, 4)))
        c = make_layer(np.zeros((4, 4)), cellsize=50.0)
        assert a.aligned_with(b)
        assert not a.aligned_with(c)


class TestRasterLayer:
    def test_shape_mismatch_rejected(self):
        spec = make_spec(4)
        with pytest.raises(ValidationError):
            RasterLayer(spec, np.zeros((3, 4)), "bad")

    def test_non_finite_rejected_nodata_allowed(self):
        spec = make_spec(2)
        vals = np.zeros((2, 2))
        vals[0, 0] = spec.nodata
        RasterLayer(spec, vals, "ok")
        vals[1, 1] = np.nan
        with pytest.raises(ValidationError):
            RasterLayer(spec, vals, "bad")


class TestRasterIO:
    def test_round_trip_2x2(self, tmp_path):
        layer = make_layer([[1.0, 2.0], [3.0, 4.0]])
        path = tmp_path / "t.asc"
        write_raster(layer, path)
        back = read_raster(path)
        assert back.spec == layer.spec
        assert np.array_equal(back.values, layer.values)

    def test_round_trip_reals_within_precision(self, tmp_path):
        rng = np.random.default_rng(3)
        layer = make_layer(rng.random((6, 6)) * 1234.5)
        path = tmp_path / "t.asc"
        write_raster(layer, path)
        back = read_raster(path)
        rel = np.abs(back.values - layer.values) / np.maximum(np.abs(layer.values), 1.0)
        assert rel.max() <= 1e-6

    def test_missing_header_key_named(self, tmp_path):
        path = tmp_path / "bad.asc"
        path.write_text("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\n"
                        "NODATA_value -9999\n1 2\n3 4\n")
        with pytest.raises(ParseError, match="cellsize"):
            read_raster(path)

    def test_cell_count_mismatch(self, tmp_path):
        path = tmp_path / "bad.asc"
        path.write_text("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\n"
                        "cellsize 100\nNODATA_value -9999\n1 2\n3\n")
        with pytest.raises(ParseError, match="cell count mismatch"):
            read_raster(path)

    def test_too_many_cells(self, tmp_path):
        path = tmp_path / "bad.asc"
        path.write_text("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\n"
                        "cellsize 100\nNODATA_value -9999\n1 2\n3 4 5\n")
        with pytest.raises(ParseError, match="cell count mismatch"):
            read_raster(path)

    def test_non_numeric_token_has_line(self, tmp_path):
        path = tmp_path / "bad.asc"
        path.write_text("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\n"
                        "cellsize 100\nNODATA_value -9999\n1 2\n3 oops\n")
        with pytest.raises(ParseError, match="line 8"):
            read_raster(path)

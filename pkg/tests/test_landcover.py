import numpy as np
import pytest

from terratwin import landcover
from terratwin.errors import ValidationError
from terratwin.grid import GridSpec
from terratwin.landcover import (AGRICULTURE, FOREST, SHRUB, URBAN, WATER,
                                 EpochStack, change_series, polygon_mask,
                                 species_raster, spread_velocity, zonal_report)
from terratwin.vector import (Feature, FeatureCollection, point,
                              point_in_polygon, polygon, rectangle)

from conftest import make_layer, make_spec


def region(xmin, ymin, xmax, ymax, rid=1000):
    return Feature(rid, "region", rectangle(xmin, ymin, xmax, ymax),
                   {"name": f"r{rid}"})


def tree(fid, x, y, species="olive"):
    return Feature(fid, "tree", point(x, y), {"species": species})


def pool(fid, x, y, volume):
    return Feature(fid, "swimming_pool", point(x, y), {"volume_m3": volume})


class TestZonalReport:
    def test_empty_region(self):
        cover = make_layer(np.full((6, 6), SHRUB))
        rep = zonal_report(region(0, 0, 200, 200), FeatureCollection([]),
                           cover)
        assert rep.counts == {}
        assert rep.pool_volume_m3 == 0.0

    def test_pool_count_and_volume(self):
        cover = make_layer(np.full((6, 6), SHRUB))
        feats = FeatureCollection([pool(1, 50, 50, 40.0),
                                   pool(2, 100, 100, 40.0),
                                   pool(3, 150, 150, 40.0),
                                   pool(4, 900, 900, 99.0)])  # outside
        rep = zonal_report(region(0, 0, 200, 200), feats, cover)
        assert rep.counts["swimming_pool"] == 3
        assert rep.pool_volume_m3 == 120.0

    def test_boundary_point_counts_inside(self):
        cover = make_layer(np.full((4, 4), SHRUB))
        feats = FeatureCollection([tree(1, 200.0, 100.0)])
        rep = zonal_report(region(0, 0, 200, 200), feats, cover)
        assert rep.counts.get("tree") == 1

    def test_species_counts(self):
        cover = make_layer(np.full((4, 4), FOREST))
        feats = FeatureCollection([tree(1, 10, 10, "olive"),
                                   tree(2, 20, 20, "olive"),
                                   tree(3, 30, 30, "pinus_brutia")])
        rep = zonal_report(region(0, 0, 400, 400), feats, cover)
        assert rep.species_counts == {"olive": 2, "pinus_brutia": 1}

    def test_building_area(self):
        cover = make_layer(np.full((4, 4), URBAN))
        b = Feature(9, "building", rectangle(10, 10, 30, 25))
        rep = zonal_report(region(0, 0, 400, 400), FeatureCollection([b]),
                           cover)
        assert rep.building_area_m2 == pytest.approx(20 * 15)

    def test_matches_brute_force_pip(self):
        rng = np.random.default_rng(6)
        cover = make_layer(np.full((8, 8), SHRUB))
        ring = [(100, 100), (700, 150), (650, 640), (220, 700), (100, 100)]
        poly = polygon(ring)
        reg = Feature(999, "region", poly)
        feats = [tree(k, *xy) for k, xy in
                 enumerate(rng.random((500, 2)) * 800)]
        rep = zonal_report(reg, FeatureCollection(feats), cover)
        expected = sum(1 for f in feats
                       if point_in_polygon(poly, *f.geometry.coordinates))
        assert rep.counts.get("tree", 0) == expected

    def test_fractions(self):
        vals = np.full((4, 4), SHRUB, dtype=float)
        vals[:2, :] = FOREST      # north half vegetation
        vals[3, :] = URBAN        # south row built
        cover = make_layer(vals)
        rep = zonal_report(region(0, 0, 400, 400), FeatureCollection([]),
                           cover)
        # vegetation covers forest and shrub codes
        assert rep.veg_fraction == pytest.approx(12 / 16)
        assert rep.built_fraction == pytest.approx(4 / 16)
        assert rep.veg_fraction + rep.built_fraction <= 1.0

    def test_degenerate_region_rejected(self):
        cover = make_layer(np.zeros((4, 4)))
        line_like = Feature(1, "region", polygon(
            [(0, 0), (10, 0), (10, 0), (0, 0), (0, 0)]))
        with pytest.raises(ValidationError, match="degenerate"):
            zonal_report(line_like, FeatureCollection([]), cover)

    def test_additive_over_disjoint_regions(self):
        rng = np.random.default_rng(15)
        cover = make_layer(np.full((8, 8), SHRUB))
        feats = FeatureCollection(
            [tree(k, *xy) for k, xy in enumerate(rng.random((200, 2)) * 800)])
        left = zonal_report(region(0, 0, 400, 800, rid=1), feats, cover)
        right = zonal_report(region(400.000001, 0, 800, 800, rid=2),
                             feats, cover)
        full = zonal_report(region(0, 0, 800, 800, rid=3), feats, cover)
        assert left.counts.get("tree", 0) + right.counts.get("tree", 0) == \
            full.counts.get("tree", 0)


class TestPolygonMask:
    @pytest.mark.parametrize("seed", range(4))
    def test_matches_scalar_pip(self, seed):
        rng = np.random.default_rng(seed)
        spec = make_spec(12, cellsize=50.0)
        cx, cy = 300 + rng.random() * 50, 300 + rng.random() * 50
        angles = (np.arange(6) + rng.random(6) * 0.8) / 6 * 2 * np.pi
        ring = [(cx + (60 + rng.random() * 200) * np.cos(a),
                 cy + (60 + rng.random() * 200) * np.sin(a)) for a in angles]
        ring.append(ring[0])
        geom = polygon(ring)
        mask = polygon_mask(spec, geom)
        for i in range(12):
            for j in range(12):
                x, y = spec.cell_center(i, j)
                assert mask[i, j] == point_in_polygon(geom, x, y)

    def test_boundary_cell_centers_inside(self):
        spec = make_spec(4, cellsize=100.0)
        geom = rectangle(50.0, 50.0, 250.0, 250.0)  # edges on cell centers
        mask = polygon_mask(spec, geom)
        i, j = spec.cell_of(50.0, 50.0)
        assert mask[i, j]


class TestChangeSeries:
    def build_stack(self, covers):
        spec = make_spec(4)
        species = make_layer(np.zeros((4, 4)), spec=spec)
        return EpochStack({2015 + k: {"species": species,
                                      "landcover": make_layer(c, spec=spec)}
                           for k, c in enumerate(covers)})

    def test_identical_epochs_constant(self):
        cover = np.full((4, 4), FOREST, dtype=float)
        stack = self.build_stack([cover, cover, cover])
        series = change_series(region(0, 0, 400, 400), stack)
        assert [v for _, v, _ in series] == [1.0, 1.0, 1.0]

    def test_flip_changes_fraction_exactly(self):
        a = np.full((4, 4), FOREST, dtype=float)
        b = a.copy()
        b[0, :2] = URBAN  # 2 of 16 cells flip
        stack = self.build_stack([a, b])
        series = change_series(region(0, 0, 400, 400), stack)
        assert series[0][1] - series[1][1] == pytest.approx(2 / 16)
        assert series[1][2] == pytest.approx(2 / 16)

    def test_matches_per_epoch_zonal(self):
        rng = np.random.default_rng(44)
        covers = [rng.choice([WATER, URBAN, FOREST, SHRUB, AGRICULTURE],
                             size=(4, 4)).astype(float) for _ in range(3)]
        stack = self.build_stack(covers)
        reg = region(0, 0, 400, 400)
        series = change_series(reg, stack)
        for (year, veg, built), cover in zip(series, covers):
            rep = zonal_report(reg, FeatureCollection([]),
                               make_layer(cover))
            assert veg == rep.veg_fraction
            assert built == rep.built_fraction

    def test_needs_two_epochs(self):
        cover = np.zeros((4, 4))
        with pytest.raises(ValidationError):
            change_series(region(0, 0, 400, 400), self.build_stack([cover]))

    def test_misaligned_epochs_rejected(self):
        spec_a = make_spec(4)
        spec_b = make_spec(4, cellsize=50.0)
        with pytest.raises(ValidationError):
            EpochStack({
                2015: {"species": make_layer(np.zeros((4, 4)), spec=spec_a),
                       "landcover": make_layer(np.zeros((4, 4)), spec=spec_a)},
                2016: {"species": make_layer(np.zeros((4, 4)), spec=spec_b),
                       "landcover": make_layer(np.zeros((4, 4)), spec=spec_b)},
            })


class TestSpreadVelocity:
    def test_no_change_is_zero(self):
        a = make_layer(np.zeros((6, 6)))
        a.values[3, 1] = 1
        assert spread_velocity(a, a, 1, 10.0) == 0.0

    def test_three_cell_front(self):
        # front advances 3 cells east over 10 years at 100 m cells -> 30 m/yr
        spec = make_spec(8, cellsize=100.0)
        a = np.zeros((8, 8))
        a[:, 0] = 1
        b = a.copy()
        b[:, 1] = 1
        b[:, 2] = 1
        b[:, 3] = 1
        va = make_layer(a, spec=spec)
        vb = make_layer(b, spec=spec)
        # mean displacement of new cells: (100 + 200 + 300) / 3 = 200 m
        assert spread_velocity(va, vb, 1, 10.0) == pytest.approx(20.0)
        # single new column at distance 300 m
        b2 = a.copy()
        b2[:, 3] = 1
        assert spread_velocity(va, make_layer(b2, spec=spec), 1, 10.0) == \
            pytest.approx(30.0)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(10)
        spec = make_spec(16, cellsize=100.0)
        a = (rng.random((16, 16)) < 0.2).astype(float)
        b = np.maximum(a, (rng.random((16, 16)) < 0.15).astype(float))
        va, vb = make_layer(a, spec=spec), make_layer(b, spec=spec)
        got = spread_velocity(va, vb, 1, 5.0)
        dists = []
        src = [(i, j) for i in range(16) for j in range(16) if a[i, j] == 1]
        for i in range(16):
            for j in range(16):
                if b[i, j] == 1 and a[i, j] != 1:
                    x, y = spec.cell_center(i, j)
                    dists.append(min(
                        np.hypot(x - spec.cell_center(si, sj)[0],
                                 y - spec.cell_center(si, sj)[1])
                        for si, sj in src))
        expected = (sum(dists) / len(dists)) / 5.0
        assert got == pytest.approx(expected, rel=1e-12)

    def test_translation_invariance(self):
        rng = np.random.default_rng(40)
        a = (rng.random((12, 12)) < 0.25).astype(float)
        b = np.maximum(a, (rng.random((12, 12)) < 0.2).astype(float))
        spec1 = make_spec(12)
        spec2 = GridSpec(ncols=12, nrows=12, xll=5000.0, yll=-3000.0,
                         cellsize=100.0)
        v1 = spread_velocity(make_layer(a, spec=spec1),
                             make_layer(b, spec=spec1), 1, 2.0)
        v2 = spread_velocity(make_layer(a, spec=spec2),
                             make_layer(b, spec=spec2), 1, 2.0)
        assert v1 == pytest.approx(v2, rel=1e-12)

    def test_absent_species_rejected(self):
        a = make_layer(np.zeros((4, 4)))
        b = make_layer(np.ones((4, 4)))
        with pytest.raises(ValidationError, match="no source population"):
            spread_velocity(a, b, 1, 10.0)

    def test_bad_years_rejected(self):
        a = make_layer(np.ones((4, 4)))
        with pytest.raises(ValidationError):
            spread_velocity(a, a, 1, 0.0)

    def test_species_name_accepted(self):
        spec = make_spec(4)
        a = np.zeros((4, 4))
        a[0, 0] = landcover.SPECIES_CODES["pinus_brutia"]
        va = make_layer(a, spec=spec)
        assert spread_velocity(va, va, "pinus_brutia", 1.0) == 0.0


class TestSpeciesRaster:
    def test_majority_and_ties(self):
        spec = make_spec(2, cellsize=100.0)
        feats = [tree(1, 50, 150, "olive"), tree(2, 60, 160, "olive"),
                 tree(3, 70, 170, "cypress"),
                 tree(4, 150, 50, "pinus_brutia"),
                 tree(5, 160, 60, "pinus_nigra")]
        raster = species_raster(spec, feats)
        assert raster.values[0, 0] == landcover.SPECIES_CODES["olive"]
        # tie in cell (1,1): brutia(1) vs nigra(2) -> smaller code wins
        assert raster.values[1, 1] == landcover.SPECIES_CODES["pinus_brutia"]
        assert raster.values[0, 1] == landcover.NO_SPECIES

import numpy as np
import pytest

from sobolev.atlas import (
    BumpSeed, CoverConditionError, UnknownManifold, alternate_seeds,
    atlas_from_config, build_partition_of_unity, builtin_manifold,
    quasirandom_points, transition_map,
)
from sobolev.funcexpr import parse_expr
from sobolev.quadrature import midpoint_grid


@pytest.fixture(scope="module")
def s1():
    return builtin_manifold("s1-stereo")


@pytest.fixture(scope="module")
def s2():
    return builtin_manifold("s2-stereo")


@pytest.fixture(scope="module")
def t1():
    return builtin_manifold("torus1")


@pytest.fixture(scope="module")
def t2():
    return builtin_manifold("torus2")


class TestCharts:
    def test_unknown_name(self):
        with pytest.raises(UnknownManifold):
            builtin_manifold("klein-bottle")

    def test_s1_forward_formula(self, s1):
        atlas, _, _ = s1
        # chart 1 is the projection (x, y) -> x / (1 - y)
        pts = quasirandom_points("s1-stereo", 50)
        t = atlas.charts[0].to_chart(pts)
        expected = pts[:, 0] / (1.0 - pts[:, 1])
        assert np.allclose(t[:, 0], expected, atol=1e-14)

    def test_chart_round_trip(self, s1, s2, t1, t2):
        for atlas, _, _ in (s1, s2, t1, t2):
            for chart in atlas.charts:
                coords, _, _ = midpoint_grid(chart.truncation, (9,) * atlas.dim)
                back = chart.to_chart(chart.to_manifold(coords))
                assert np.max(np.abs(back - coords)) <= 1e-12

    def test_s1_transition_is_reciprocal(self, s1):
        atlas, _, _ = s1
        tm = transition_map(atlas, 0, 1)
        t = np.array([[0.5], [-2.0], [3.3], [0.01]])
        assert np.allclose(tm(t), 1.0 / t, rtol=1e-12)

    def test_s2_transition_is_inversion(self, s2):
        atlas, _, _ = s2
        tm = transition_map(atlas, 0, 1)
        t = np.array([[0.5, 0.25], [-1.0, 2.0]])
        r2 = np.sum(t * t, axis=1, keepdims=True)
        assert np.allclose(tm(t), t / r2, rtol=1e-12)

    def test_torus1_transition_is_unit_shift(self, t1):
        atlas, _, _ = t1
        tm = transition_map(atlas, 0, 1)
        t = np.array([[0.25], [0.75]])
        out = tm(t)
        # (0,1) -> (1/2,3/2): t<1/2 shifts up by 1, t>1/2 stays
        assert out[0, 0] == pytest.approx(1.25, abs=1e-15)
        assert out[1, 0] == pytest.approx(0.75, abs=1e-15)

    def test_transition_round_trip(self, s1, s2, t1, t2):
        for atlas, _, _ in (s1, s2, t1, t2):
            tm = transition_map(atlas, 0, 1)
            back = transition_map(atlas, 1, 0)
            coords, _, _ = midpoint_grid(atlas.charts[0].truncation,
                                         (11,) * atlas.dim)
            mask = tm.domain_mask(coords)
            fwd = tm(coords[mask])
            ok = back.domain_mask(fwd)
            assert np.max(np.abs(back(fwd[ok]) - coords[mask][ok])) <= 1e-10

    def test_classification_flags(self, s1, s2, t1, t2):
        assert s1[0].classification == "super nice"
        assert all(c.image_kind == "fullspace" for c in s1[0].charts)
        assert s2[0].classification == "super nice"
        assert t1[0].classification == "GL"
        assert t1[0].gl_self_compatible
        assert all(c.image_kind == "box" for c in t2[0].charts)


class TestPartitionOfUnity:
    @pytest.mark.parametrize("name", ["s1-stereo", "s2-stereo", "torus1",
                                      "torus2"])
    def test_sums_to_one(self, name):
        atlas, pou, _ = builtin_manifold(name)
        pts = quasirandom_points(name, 10_000)
        sums = pou.values_at(pts).sum(axis=0)
        assert np.max(np.abs(sums - 1.0)) <= 1e-12

    def test_nonnegative(self, s1):
        atlas, pou, _ = s1
        vals = pou.values_at(quasirandom_points("s1-stereo", 2000))
        assert np.min(vals) >= 0.0

    def test_first_bump_plateau_wins(self, t1):
        # where eta_1 = 1: psi_1 = 1 and psi_2 = 0
        atlas, pou, _ = t1
        pts = np.array([[0.5]])  # center of chart 1's plateau
        vals = pou.values_at(pts)
        assert vals[0, 0] == pytest.approx(1.0, abs=1e-15)
        assert vals[1, 0] == pytest.approx(0.0, abs=1e-15)

    def test_supports_inside_truncation(self, s1):
        atlas, pou, _ = s1
        for chart, f in zip(atlas.charts, pou.fields):
            edge = np.array([[atlas.params["truncation_radius"]]])
            assert f.values(edge)[0] == 0.0

    def test_shrunken_supports_fail_cover(self, s1):
        atlas, _, _ = s1
        bad = [BumpSeed("radial", 0.5, 0.9), BumpSeed("radial", 0.5, 0.9)]
        with pytest.raises(CoverConditionError) as exc:
            build_partition_of_unity(atlas, bad)
        assert exc.value.witness is not None

    def test_alternate_pou_also_sums_to_one(self, s1):
        atlas, _, _ = s1
        pou2 = build_partition_of_unity(atlas, alternate_seeds(atlas), "alt")
        pts = quasirandom_points("s1-stereo", 4000)
        sums = pou2.values_at(pts).sum(axis=0)
        assert np.max(np.abs(sums - 1.0)) <= 1e-12

    def test_telescoping_product_identity(self, s1):
        # 1 - sum psi_a equals the product of (1 - eta_a) pointwise
        from sobolev.atlas import default_seeds
        atlas, pou, _ = s1
        seeds = default_seeds(atlas)
        pts = quasirandom_points("s1-stereo", 500)
        psi_sum = pou.values_at(pts).sum(axis=0)
        prod = np.ones(len(pts))
        for chart, seed in zip(atlas.charts, seeds):
            eta = np.zeros(len(pts))
            mask = chart.contains(pts)
            eta[mask] = seed.field(atlas.dim).values(chart.to_chart(pts[mask]))
            prod *= 1.0 - eta
        assert np.max(np.abs((1.0 - psi_sum) - prod)) <= 1e-12


class TestLocalRepresentation:
    def test_stereo_substitution(self, s1):
        atlas, _, _ = s1
        # ambient x1 restricted to the circle, in chart-0 coordinates:
        # x = 2t/(1+t^2)
        f = atlas.local_representation(parse_expr("x1", 2), 0)
        t = np.array([[0.3], [2.0]])
        assert np.allclose(f.values(t),
                           2 * t[:, 0] / (1 + t[:, 0] ** 2), rtol=1e-14)

    def test_torus_periodic_shift(self, t1):
        atlas, _, _ = t1
        f = atlas.local_representation(parse_expr("sin(2*pi*x1)", 1), 1)
        # chart 1 has image (1/2, 3/2); value at 1.25 equals value at 0.25
        t = np.array([[1.25], [0.75]])
        vals = f.values(t)
        assert vals[0] == pytest.approx(np.sin(2 * np.pi * 0.25), rel=1e-12)
        assert vals[1] == pytest.approx(np.sin(2 * np.pi * 0.75), rel=1e-12)

    def test_overlap_agreement_for_periodic_input(self, t1):
        atlas, _, _ = t1
        u = parse_expr("sin(2*pi*x1) + 0.5*cos(2*pi*x1)", 1)
        f0 = atlas.local_representation(u, 0)
        f1 = atlas.local_representation(u, 1)
        tm = transition_map(atlas, 0, 1)
        t = np.linspace(0.06, 0.94, 41).reshape(-1, 1)
        t = t[tm.domain_mask(t)]  # drop the chart-1 seam point
        vals0 = f0.values(t)
        vals1 = f1.values(tm(t))
        assert np.max(np.abs(vals0 - vals1)) <= 1e-12


class TestConfigRoundTrip:
    def test_config_serialization(self, s1):
        atlas, pou, _ = s1
        cfg = atlas.to_config()
        assert cfg["schema"] == "v1"
        cfg["pou"] = pou.to_json()
        atlas2, pou2 = atlas_from_config(cfg)
        assert atlas2.manifold == atlas.manifold
        assert atlas2.chart_count() == atlas.chart_count()
        pts = quasirandom_points("s1-stereo", 500)
        assert np.allclose(pou2.values_at(pts), pou.values_at(pts), atol=1e-15)

    def test_unknown_keys_rejected(self, s1):
        atlas, _, _ = s1
        cfg = atlas.to_config()
        cfg["frobnicate"] = True
        with pytest.raises(ValueError):
            atlas_from_config(cfg)

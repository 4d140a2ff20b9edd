import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hanoispec import geometry
from hanoispec.geometry import (
    build_level_sets,
    build_mesh,
    contract,
    corner_count,
    hausdorff_dimension,
    holder_exponent,
    mesh_to_json,
    node_count,
    segment_count,
    segment_length,
)

ALPHAS = st.floats(min_value=1e-6, max_value=1 / 3 - 1e-9)


class TestContract:
    def test_empty_word_is_identity(self):
        pt = contract("", (0.3, 0.7), 0.25)
        assert tuple(pt) == (0.3, 0.7)
        pt = contract(None, (0.3, 0.7), 0.25)
        assert tuple(pt) == (0.3, 0.7)

    def test_fixed_points(self):
        for i, p in enumerate(geometry.CORNERS, start=1):
            pt = contract(str(i), p, 0.25)
            assert np.allclose(pt, p, atol=0)

    def test_single_step_value(self):
        # map 1 shrinks toward the origin by (1-alpha)/2 = 0.375
        pt = contract("1", geometry.P3, 0.25)
        assert pt[0] == pytest.approx(0.375, abs=0)
        assert pt[1] == 0.0

    def test_composition_order(self):
        # word "12": map 1 acts on the image of map 2
        alpha = 0.2
        inner = contract("2", geometry.P3, alpha)
        assert np.allclose(contract("12", geometry.P3, alpha), contract("1", inner, alpha))

    def test_rejects_bad_symbols(self):
        with pytest.raises(ValueError):
            contract("14", (0, 0), 0.25)


class TestDimensions:
    def test_hausdorff_value(self):
        assert hausdorff_dimension(0.25) == pytest.approx(1.120090, abs=1e-6)

    def test_hausdorff_limits(self):
        # small alpha approaches the log3/log2 of the limiting gasket
        assert hausdorff_dimension(1e-9) == pytest.approx(math.log(3) / math.log(2), abs=1e-6)
        # near the upper end the dimension drops toward 1
        assert hausdorff_dimension(1 / 3 - 1e-12) == pytest.approx(1.0, abs=1e-6)

    def test_out_of_range_rejected(self):
        for bad in (0.0, 1 / 3, 0.4, -0.1):
            with pytest.raises(ValueError):
                hausdorff_dimension(bad)
            with pytest.raises(ValueError):
                holder_exponent(bad)

    def test_holder_value(self):
        assert holder_exponent(0.25) == pytest.approx(0.260396, abs=1e-6)

    def test_holder_small_alpha_limit(self):
        expected = (math.log(5) - math.log(3)) / (2 * math.log(2))
        assert holder_exponent(1e-9) == pytest.approx(expected, abs=1e-6)

    @given(ALPHAS)
    def test_holder_in_open_interval(self, alpha):
        l = holder_exponent(alpha)
        assert 0.0 < l < 0.5


class TestLevelSets:
    @pytest.mark.parametrize(
        "level,n_points,n_segments",
        [(0, 3, 0), (1, 9, 3), (2, 27, 12), (3, 81, 39)],
    )
    def test_counts(self, level, n_points, n_segments):
        pts, segs = build_level_sets(0.25, level)
        assert len(pts) == n_points
        assert len(segs) == n_segments

    def test_level1_segments_have_length_alpha(self):
        alpha = 0.25
        _, segs = build_level_sets(alpha, 1)
        for seg in segs:
            assert seg.level == 1
            assert seg.length == alpha

    def test_points_distinct(self):
        pts, _ = build_level_sets(0.25, 3)
        rounded = {(round(x, 12), round(y, 12)) for x, y in pts}
        assert len(rounded) == len(pts)

    def test_segment_level_population(self):
        _, segs = build_level_sets(0.25, 3)
        by_level = {}
        for s in segs:
            by_level[s.level] = by_level.get(s.level, 0) + 1
        assert by_level == {1: 3, 2: 9, 3: 27}


class TestBuildMesh:
    @pytest.mark.parametrize(
        "level,subdiv,nodes",
        [(1, 1, 9), (1, 4, 18), (2, 2, 39), (0, 1, 3), (3, 3, 159)],
    )
    def test_node_counts(self, level, subdiv, nodes):
        mesh = build_mesh(0.25, level, subdiv)
        assert mesh.n_nodes == nodes
        assert mesh.n_nodes == node_count(level, subdiv)

    @pytest.mark.parametrize("level", [0, 1, 2, 3, 4])
    def test_structure_counts(self, level):
        mesh = build_mesh(0.3, level, 2)
        assert mesh.n_corners == corner_count(level)
        assert len(mesh.segments) == segment_count(level)
        assert len(mesh.discrete_edges) == 3 * 3**level

    def test_rejects_zero_subdiv(self):
        with pytest.raises(ValueError):
            build_mesh(0.25, 1, 0)

    def test_rejects_negative_level(self):
        with pytest.raises(ValueError):
            build_mesh(0.25, -1, 1)

    def test_segment_lengths_match_formula(self):
        mesh = build_mesh(0.25, 5, 1)
        for seg in mesh.segments:
            d_k = segment_length(0.25, seg.level)
            assert abs(seg.length - d_k) <= 1e-14 * d_k
            a, b = mesh.vertices[seg.a], mesh.vertices[seg.b]
            dist = math.hypot(b.x - a.x, b.y - a.y)
            assert abs(dist - d_k) <= 1e-12 * d_k

    def test_boundary_ids_are_outer_corners(self):
        mesh = build_mesh(0.2, 3, 2)
        for vid, corner in zip(mesh.boundary_ids, geometry.CORNERS):
            v = mesh.vertices[vid]
            assert (v.x, v.y) == corner
            assert v.segment_level is None

    def test_endpoint_vertices_carry_segment_level(self):
        mesh = build_mesh(0.25, 3, 2)
        for seg in mesh.segments:
            for vid in (seg.a, seg.b):
                v = mesh.vertices[vid]
                assert v.kind == geometry.KIND_CORNER
                assert v.cell_level == 3
                assert v.segment_level == seg.level
            for vid in seg.interior:
                v = mesh.vertices[vid]
                assert v.kind == geometry.KIND_INTERIOR
                assert v.segment_level == seg.level

    def test_every_nonboundary_corner_ends_one_segment(self):
        mesh = build_mesh(0.25, 3, 1)
        endpoints = [vid for s in mesh.segments for vid in (s.a, s.b)]
        assert len(endpoints) == len(set(endpoints))
        assert set(endpoints) == set(range(mesh.n_corners)) - set(mesh.boundary_ids)

    def test_interior_nodes_uniform_in_chord(self):
        mesh = build_mesh(0.25, 2, 4)
        for seg in mesh.segments:
            a, b = mesh.coords[seg.a], mesh.coords[seg.b]
            for s, vid in enumerate(seg.interior, start=1):
                expect = a + (s / 4) * (b - a)
                assert np.allclose(mesh.coords[vid], expect, rtol=0, atol=1e-15)

    def test_determinism_byte_identical(self):
        m1 = build_mesh(0.25, 3, 3)
        m2 = build_mesh(0.25, 3, 3)
        assert mesh_to_json(m1) == mesh_to_json(m2)

    def test_ids_contiguous(self):
        mesh = build_mesh(0.25, 2, 3)
        assert [v.id for v in mesh.vertices] == list(range(mesh.n_nodes))


class TestMeshDump:
    def test_json_layout(self, tmp_path):
        mesh = build_mesh(0.25, 1, 2)
        path = tmp_path / "mesh.json"
        geometry.dump_mesh(mesh, path)
        data = json.loads(path.read_text())
        assert set(data) == {
            "alpha", "level", "subdiv", "vertices", "discrete_edges", "segments",
        }
        assert data["alpha"] == 0.25
        assert len(data["vertices"]) == mesh.n_nodes
        assert set(data["vertices"][0]) == {"id", "x", "y", "kind", "level"}
        assert set(data["discrete_edges"][0]) == {"a", "b", "word"}
        assert set(data["segments"][0]) == {"level", "a", "b", "interior_ids"}
        assert all(len(s["interior_ids"]) == 1 for s in data["segments"])

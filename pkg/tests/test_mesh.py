import math

import numpy as np
import pytest

import capbound as cb
from capbound import MeshError

FOUR_PI = 4.0 * math.pi

# Regular icosahedron, circumradius 1.
ICOSA_OBJ = """\
# regular icosahedron
v 0.5257311121191336 0.85065080835204 0.0
v 0.0 0.5257311121191336 0.85065080835204
v 0.85065080835204 0.0 0.5257311121191336
v -0.5257311121191336 0.85065080835204 0.0
v 0.0 -0.5257311121191336 0.85065080835204
v 0.85065080835204 0.0 -0.5257311121191336
v 0.5257311121191336 -0.85065080835204 0.0
v 0.0 0.5257311121191336 -0.85065080835204
v -0.85065080835204 0.0 0.5257311121191336
v -0.5257311121191336 -0.85065080835204 0.0
v 0.0 -0.5257311121191336 -0.85065080835204
v -0.85065080835204 0.0 -0.5257311121191336
f 1 2 3
f 1 3 6
f 1 4 2
f 1 6 8
f 1 8 4
f 2 4 9
f 2 5 3
f 2 9 5
f 3 5 7
f 3 7 6
f 4 8 12
f 4 12 9
f 5 9 10
f 5 10 7
f 6 7 11
f 6 11 8
f 7 10 11
f 8 11 12
f 9 12 10
f 10 12 11
"""


class TestLoadMesh:
    def test_icosahedron_counts(self, tmp_path):
        path = tmp_path / "icosa.obj"
        path.write_text(ICOSA_OBJ)
        mesh = cb.load_mesh(path)
        assert mesh.num_vertices == 12
        assert mesh.num_edges == 30
        assert mesh.num_faces == 20
        assert mesh.euler_characteristic == 2

    def test_open_mesh_rejected(self, tmp_path):
        # icosahedron with one face removed has 3 boundary edges
        lines = ICOSA_OBJ.strip().splitlines()
        path = tmp_path / "open.obj"
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(MeshError, match="open mesh"):
            cb.load_mesh(path)

    def test_sphere_obj_round_trip(self, tmp_path):
        mesh = cb.make_sphere(1.0, 4)
        path = tmp_path / "sphere.obj"
        cb.save_mesh(mesh, path)
        again = cb.load_mesh(path)
        assert again.num_vertices == 2562
        assert again.genus == 0
        assert np.array_equal(again.vertices, mesh.vertices)
        assert np.array_equal(again.faces, mesh.faces)

    def test_ply_round_trip(self, tmp_path):
        mesh = cb.make_torus(2.0, 0.5, 1)
        path = tmp_path / "torus.ply"
        cb.save_mesh(mesh, path)
        again = cb.load_mesh(path)
        assert again.genus == 1
        assert np.array_equal(again.vertices, mesh.vertices)
        assert np.array_equal(again.faces, mesh.faces)

    def test_obj_slashed_indices(self, tmp_path):
        text = ICOSA_OBJ.replace("f 1 2 3", "f 1/1/1 2/2/2 3/3/3")
        path = tmp_path / "slashed.obj"
        path.write_text(text)
        assert cb.load_mesh(path).num_faces == 20

    def test_obj_negative_indices(self, tmp_path):
        # tetrahedron using OBJ relative (negative) indices
        path = tmp_path / "tet.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
                        "f -4 -2 -3\nf -4 -3 -1\nf -3 -2 -1\nf -4 -1 -2\n")
        mesh = cb.load_mesh(path)
        assert mesh.num_faces == 4
        assert mesh.euler_characteristic == 2

    def test_ply_extra_vertex_properties(self, tmp_path):
        # x/y/z located by name among other per-vertex properties
        path = tmp_path / "tet.ply"
        verts = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
        faces = [(0, 2, 1), (0, 1, 3), (1, 2, 3), (0, 3, 2)]
        lines = ["ply", "format ascii 1.0", "element vertex 4",
                 "property float nx", "property float x", "property float y",
                 "property float z", "element face 4",
                 "property list uchar int vertex_indices", "end_header"]
        lines += [f"9.9 {x} {y} {z}" for x, y, z in verts]
        lines += [f"3 {a} {b} {c}" for a, b, c in faces]
        path.write_text("\n".join(lines) + "\n")
        mesh = cb.load_mesh(path)
        assert mesh.num_vertices == 4
        assert np.array_equal(mesh.vertices[1], [1.0, 0.0, 0.0])

    def test_obj_quad_rejected(self, tmp_path):
        path = tmp_path / "quad.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
        with pytest.raises(MeshError, match="triangular"):
            cb.load_mesh(path)

    def test_inconsistent_orientation_reported_with_edge(self, tmp_path):
        # flip one face of the icosahedron
        text = ICOSA_OBJ.replace("f 1 2 3", "f 1 3 2")
        path = tmp_path / "flip.obj"
        path.write_text(text)
        with pytest.raises(MeshError, match=r"orientation.*\(\d+, \d+\)"):
            cb.load_mesh(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MeshError, match="cannot read"):
            cb.load_mesh(tmp_path / "nope.obj")

    def test_bad_ply_header(self, tmp_path):
        path = tmp_path / "bad.ply"
        path.write_text("ply\nformat ascii 1.0\nend_header\n")
        with pytest.raises(MeshError, match="incomplete PLY header"):
            cb.load_mesh(path)

    def test_unknown_format(self, tmp_path):
        path = tmp_path / "mesh.stl"
        path.write_text("solid\n")
        with pytest.raises(MeshError, match="unsupported"):
            cb.load_mesh(path)


class TestInvariantChecks:
    def test_degenerate_face(self):
        v = np.array([[0, 0, 0], [1, 0, 0], [1e-15, 0, 0], [0, 0, 1]], float)
        f = np.array([[0, 1, 2], [0, 2, 3], [2, 1, 3], [0, 3, 1]])
        with pytest.raises(MeshError):
            cb.TriMesh(v, f)

    def test_unreferenced_vertex(self):
        tet_v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [9, 9, 9]], float)
        tet_f = np.array([[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]])
        with pytest.raises(MeshError, match="unreferenced"):
            cb.TriMesh(tet_v, tet_f)

    def test_repeated_vertex_in_face(self):
        v = np.eye(4, 3)
        f = np.array([[0, 1, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]])
        with pytest.raises(MeshError, match="repeated"):
            cb.TriMesh(v, f)

    def test_euler_identity_on_primitives(self):
        for mesh, chi in [
            (cb.make_sphere(1.0, 2), 2),
            (cb.make_spheroid(2.0, 1.0, 2), 2),
            (cb.make_box(1.0, 1.0, 1.0, 0.2, 2), 2),
            (cb.make_torus(2.0, 0.5, 2), 0),
        ]:
            assert mesh.euler_characteristic == chi
            assert mesh.num_vertices - mesh.num_edges + mesh.num_faces == chi


class TestPrimitives:
    def test_sphere_area_converges(self):
        errs = [abs(cb.measure(cb.make_sphere(1.0, n)).area - FOUR_PI)
                for n in (1, 2, 3)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 0.01 * FOUR_PI

    def test_torus_genus(self):
        assert cb.make_torus(2.0, 0.5, 2).genus == 1

    def test_spheroid_volume(self):
        vol = cb.measure(cb.make_spheroid(2.0, 1.0, 4)).volume
        assert vol == pytest.approx(FOUR_PI / 3.0 * 2.0, rel=5e-3)

    def test_vertex_count_grows(self):
        for kind, params in [("sphere", (1.0,)), ("spheroid", (2.0, 1.0)),
                             ("box", (1.0, 1.0, 1.0, 0.2)), ("torus", (2.0, 0.5))]:
            n1 = cb.make_primitive(kind, *params, 1).num_vertices
            n2 = cb.make_primitive(kind, *params, 2).num_vertices
            assert n2 > n1

    @pytest.mark.parametrize("kind,params", [
        ("sphere", (-1.0, 2)),
        ("sphere", (1.0, 0)),
        ("spheroid", (0.0, 1.0, 2)),
        ("box", (1.0, 1.0, 1.0, 0.0, 2)),
        ("box", (1.0, 1.0, 1.0, 0.6, 2)),
        ("torus", (0.5, 2.0, 2)),
        ("torus", (1.0, 1.0, 2)),
    ])
    def test_invalid_parameters(self, kind, params):
        with pytest.raises(ValueError):
            cb.make_primitive(kind, *params)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown primitive"):
            cb.make_primitive("klein_bottle", 1.0, 2)


class TestMeasure:
    def test_unit_sphere_fine(self, sphere_meshes):
        m = cb.measure(sphere_meshes[4])
        assert m.area == pytest.approx(FOUR_PI, rel=5e-3)
        assert m.total_mean_curvature == pytest.approx(8.0 * math.pi, rel=5e-3)
        assert m.willmore == pytest.approx(16.0 * math.pi, rel=5e-3)
        assert m.volume == pytest.approx(FOUR_PI / 3.0, rel=5e-3)
        assert abs(m.hawking_mass) < 0.01
        assert m.genus == 0
        assert m.min_h > 0

    def test_willmore_scale_invariance(self, sphere_meshes):
        w1 = cb.measure(sphere_meshes[3]).willmore
        w2 = cb.measure(cb.make_sphere(2.0, 3)).willmore
        assert w2 == pytest.approx(w1, rel=1e-12)
        assert w2 == pytest.approx(16.0 * math.pi, rel=5e-3)

    def test_monotone_convergence(self):
        targets = np.array([FOUR_PI, 8.0 * math.pi, 16.0 * math.pi, FOUR_PI / 3.0])
        rows = []
        for n in (1, 2, 3, 4):
            m = cb.measure(cb.make_sphere(1.0, n))
            rows.append([m.area, m.total_mean_curvature, m.willmore, m.volume])
        rows = np.array(rows)
        # strictly increasing toward the smooth values, from below
        assert (np.diff(rows, axis=0) > 0).all()
        assert (rows < targets).all()

    @pytest.mark.parametrize("factor", [2.0, 1.7])
    def test_scale_covariance(self, factor):
        base = cb.make_spheroid(1.5, 1.0, 2)
        m0 = cb.measure(base)
        m1 = cb.measure(base.scaled(factor))
        assert m1.area == pytest.approx(factor**2 * m0.area, rel=1e-10)
        assert m1.volume == pytest.approx(factor**3 * m0.volume, rel=1e-10)
        assert m1.total_mean_curvature == pytest.approx(
            factor * m0.total_mean_curvature, rel=1e-10)
        assert m1.willmore == pytest.approx(m0.willmore, rel=1e-10)

    def test_hawking_identity_bit_for_bit(self, sphere_meshes):
        for mesh in (sphere_meshes[2], cb.make_torus(2.0, 0.5, 2)):
            m = cb.measure(mesh)
            expected = math.sqrt(m.area / (16.0 * math.pi)) * (
                1.0 - m.willmore / (16.0 * math.pi))
            assert m.hawking_mass == expected

    def test_willmore_lower_bound_convex(self):
        for mesh in (cb.make_sphere(1.0, 3), cb.make_spheroid(2.0, 1.0, 3),
                     cb.make_box(1.0, 1.0, 1.0, 0.2, 3)):
            m = cb.measure(mesh)
            assert m.genus == 0
            assert m.willmore >= 16.0 * math.pi * 0.98

    def test_inward_orientation_recorded_and_corrected(self):
        mesh = cb.make_sphere(1.0, 2)
        flipped = cb.TriMesh(mesh.vertices, mesh.faces[:, ::-1])
        m = cb.measure(flipped)
        assert m.orientation_sign == -1
        assert m.volume > 0
        # H sign uses the geometric outward normal, not the winding
        assert m.total_mean_curvature == pytest.approx(8.0 * math.pi, rel=0.02)
        assert m.min_h > 0

    def test_vertex_areas_tile_surface(self, sphere_meshes):
        from capbound.mesh import vertex_curvature_data

        for mesh in (sphere_meshes[2], cb.make_box(1.0, 1.0, 1.0, 0.2, 2)):
            _, areas = vertex_curvature_data(mesh)
            assert areas.sum() == pytest.approx(mesh.face_areas.sum(), rel=1e-12)

    def test_scaled_validates(self):
        with pytest.raises(ValueError):
            cb.make_sphere(1.0, 1).scaled(-2.0)

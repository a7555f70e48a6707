import numpy as np
import pytest

from hjdg.mesh import (MeshError, MeshFormatError, NonManifoldEdgeError, DegenerateElementError,
                       PeriodicMatchError, TriMesh2D, build_cartesian, build_periodic_pairs,
                       build_uniform_1d, disk_mesh, graded_square_mesh, load_tri_mesh,
                       perturb_1d, save_tri_mesh, triangulate_rectangle)


def test_uniform_1d_widths():
    mesh = build_uniform_1d(0.0, 2 * np.pi, 40)
    assert mesh.n_cells == 40
    assert np.allclose(mesh.widths, 2 * np.pi / 40)


@pytest.mark.parametrize("args", [(1.0, 0.0, 10), (0.0, 1.0, 1)])
def test_uniform_1d_rejects_bad_input(args):
    with pytest.raises(MeshError):
        build_uniform_1d(*args)


def test_perturb_zero_is_identity():
    mesh = build_uniform_1d(0.0, 1.0, 10)
    assert np.array_equal(perturb_1d(mesh, 0.0, 3).nodes, mesh.nodes)


def test_perturb_bounds_and_determinism():
    mesh = build_uniform_1d(0.0, 2 * np.pi, 80)
    dx = mesh.length / 80
    a = perturb_1d(mesh, 0.4, seed=7)
    b = perturb_1d(mesh, 0.4, seed=7)
    assert np.array_equal(a.nodes, b.nodes)
    assert np.all(a.widths >= 0.2 * dx - 1e-15) and np.all(a.widths <= 1.8 * dx + 1e-15)
    assert a.nodes[0] == mesh.nodes[0] and a.nodes[-1] == mesh.nodes[-1]


@pytest.mark.parametrize("seed", range(10))
def test_perturbed_cells_stay_positive(seed):
    mesh = perturb_1d(build_uniform_1d(0.0, 1.0, 50), 0.49, seed)
    assert mesh.widths.min() > 0


def test_perturb_rejects_half():
    with pytest.raises(MeshError):
        perturb_1d(build_uniform_1d(0.0, 1.0, 10), 0.5, 0)


def test_cartesian_mesh():
    mesh = build_cartesian(-1, 1, -1, 1, 10, 10)
    assert np.allclose(mesh.dx, 0.2) and np.allclose(mesh.dy, 0.2)
    assert build_cartesian(-2, 2, -2, 2, 2, 2).n_elements == 4
    with pytest.raises(MeshError):
        build_cartesian(-1, 1, -1, 1, 0, 4)


def test_two_triangle_square(tmp_path):
    path = tmp_path / "sq.txt"
    path.write_text("nodes 4\n0 0\n1 0\n1 1\n0 1\ntriangles 2\n0 1 2\n0 2 3\n")
    mesh = load_tri_mesh(path)
    assert len(mesh.interior_edges) == 1
    assert len(mesh.boundary_edges) == 4
    assert mesh.area == pytest.approx(1.0)


def test_equilateral_triangle_normals():
    s = np.sqrt(3) / 2
    mesh = TriMesh2D(np.array([[0, 0], [1, 0], [0.5, s]]), np.array([[0, 1, 2]]))
    assert len(mesh.boundary_edges) == 3
    n = mesh.normals
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.dot(n[i], n[j]) == pytest.approx(-0.5, abs=1e-14)
    # outward: pointing away from the centroid
    mid = mesh.edge_midpoints
    assert np.all(np.sum((mid - mesh.centroids[0]) * n, axis=1) > 0)


def test_duplicated_triangle_is_non_manifold(tmp_path):
    path = tmp_path / "dup.txt"
    path.write_text("nodes 3\n0 0\n1 0\n0 1\ntriangles 2\n0 1 2\n2 1 0\n")
    with pytest.raises(NonManifoldEdgeError):
        load_tri_mesh(path)


def test_edge_shared_by_three_triangles():
    nodes = np.array([[0, 0], [1, 0], [0.5, 1], [0.5, -1], [0.5, 2]])
    with pytest.raises(NonManifoldEdgeError):
        TriMesh2D(nodes, np.array([[0, 1, 2], [0, 1, 3], [0, 1, 4]]))


def test_zero_area_triangle():
    with pytest.raises(DegenerateElementError):
        TriMesh2D(np.array([[0, 0], [1, 0], [2, 0]]), np.array([[0, 1, 2]]))


@pytest.mark.parametrize("text", ["nodes 2\n0 0\n", "nodes 3\n0 0\n1 x\n0 1\ntriangles 1\n0 1 2\n", ""])
def test_malformed_files(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(MeshFormatError):
        load_tri_mesh(path)


def test_gmsh_reader(tmp_path):
    path = tmp_path / "sq.msh"
    path.write_text(
        "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n$EndNodes\n"
        "$Elements\n3\n1 1 2 0 1 1 2\n2 2 2 0 1 1 2 3\n3 2 2 0 1 1 3 4\n$EndElements\n")
    mesh = load_tri_mesh(path)
    assert mesh.n_elements == 2
    assert mesh.area == pytest.approx(1.0)


def test_native_round_trip(tmp_path):
    mesh = triangulate_rectangle(0, 1, 0, 1, 3, 2, periodic=True)
    path = tmp_path / "m.txt"
    save_tri_mesh(mesh, path)
    back = load_tri_mesh(path)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.allclose(back.nodes, mesh.nodes)
    assert np.array_equal(back.periodic_pairs, mesh.periodic_pairs)


def test_triangulate_counts():
    mesh = triangulate_rectangle(-2, 2, -2, 2, 16, 16)
    assert mesh.n_elements == 512
    assert mesh.h == pytest.approx(0.25)
    assert mesh.area == pytest.approx(16.0)
    assert triangulate_rectangle(0, 1, 0, 1, 1, 1).n_elements == 2


@pytest.mark.parametrize("pattern", ["diagonal", "alternating"])
def test_periodic_pairing_covers_boundary(pattern):
    mesh = triangulate_rectangle(-2, 2, -2, 2, 6, 6, pattern=pattern, periodic=True)
    assert 2 * len(mesh.periodic_pairs) == len(mesh.boundary_edges)
    a, b = mesh.periodic_pairs.T
    assert np.allclose(mesh.edge_lengths[a], mesh.edge_lengths[b])
    assert np.allclose(mesh.normals[a] + mesh.normals[b], 0.0, atol=1e-12)


def test_periodic_pairing_on_disk_fails():
    with pytest.raises(PeriodicMatchError):
        build_periodic_pairs(disk_mesh(4), [(2.0, 0.0), (0.0, 2.0)])


def test_empty_direction_set_is_identity():
    mesh = disk_mesh(3)
    assert build_periodic_pairs(mesh, []) is mesh


@pytest.mark.parametrize("mesh", [triangulate_rectangle(0, 1, 0, 1, 5, 4, "alternating"),
                                  disk_mesh(6), graded_square_mesh(8)], ids=["rect", "disk", "graded"])
def test_normal_tangent_invariants(mesh):
    n, t = mesh.normals, mesh.tangents
    assert np.all(np.abs(np.sum(n * t, axis=1)) <= 1e-14)
    assert np.allclose(np.linalg.norm(n, axis=1), 1.0, atol=1e-14)
    assert np.allclose(np.linalg.norm(t, axis=1), 1.0, atol=1e-14)
    # one-sided normals of interior edges cancel
    inner = mesh.interior_edges
    k0, k1 = mesh.edge_elements[inner].T
    l0, l1 = mesh.edge_local[inner].T
    assert np.allclose(mesh.elem_normals[k0, l0] + mesh.elem_normals[k1, l1], 0.0, atol=1e-12)


def test_graded_meshes_are_refined_towards_centre():
    mesh = graded_square_mesh(16)
    r = np.linalg.norm(mesh.centroids - 0.5, axis=1)
    assert mesh.areas[r < 0.1].mean() < mesh.areas[r > 0.4].mean()
    disk = disk_mesh(12)
    rd = np.linalg.norm(disk.centroids, axis=1)
    assert disk.areas[rd < 0.2].mean() < disk.areas[rd > 0.7].mean()
    assert disk.area == pytest.approx(np.pi, rel=0.02)


def test_generated_mesh_size_survives_round_trip(tmp_path):
    for mesh in (disk_mesh(5), graded_square_mesh(6)):
        path = tmp_path / "m.txt"
        save_tri_mesh(mesh, path)
        assert load_tri_mesh(path).h == pytest.approx(mesh.h)

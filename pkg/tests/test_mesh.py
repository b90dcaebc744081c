"""
Mesh Tests
==========
Unit tests for the triangulation, CR dofs, control volumes and partition.
"""

import pytest
import numpy as np
from crfve.core import (
    InvalidParameterError,
    build_structured_mesh, enumerate_cr_dofs, build_control_volumes, build_partition,
    mesh_invariants, partition_invariants, mesh_counts, dump_mesh,
)


class TestStructuredMesh:
    """Tests for build_structured_mesh"""

    @pytest.mark.parametrize("n", [2, 4, 8, 16])
    def test_counts(self, n):
        """Vertex, triangle, edge and boundary edge counts"""
        mesh = build_structured_mesh(n)
        v, t, e, b = mesh_counts(n)
        assert mesh.n_vertices == v
        assert mesh.n_triangles == t
        assert mesh.n_edges == e
        assert int(mesh.boundary.sum()) == b

    def test_small_example(self):
        """n=2 gives 8 triangles, 9 vertices and 16 edges"""
        mesh = build_structured_mesh(2)
        assert (mesh.n_triangles, mesh.n_vertices, mesh.n_edges) == (8, 9, 16)

    @pytest.mark.parametrize("diag", ["ne", "nw"])
    def test_invariants(self, diag):
        """Euler formula, edge adjacency and positive orientation"""
        result = mesh_invariants(build_structured_mesh(8, diag))
        assert result['euler']
        assert result['adjacency']
        assert result['positive_areas']
        assert result['verified']

    def test_uniform_areas(self):
        """Every triangle has area 1/(2 n^2)"""
        mesh = build_structured_mesh(4)
        assert np.allclose(mesh.areas, 1.0 / 32)
        assert mesh.areas.sum() == pytest.approx(1.0)

    def test_mesh_size(self):
        """h is the diagonal length sqrt(2)/n"""
        assert build_structured_mesh(8).h == pytest.approx(np.sqrt(2) / 8)

    def test_edge_order(self):
        """Edges are ordered by midpoint, y-major then x"""
        mid = build_structured_mesh(4).edge_midpoints
        order = np.lexsort((mid[:, 0], mid[:, 1]))
        assert np.array_equal(order, np.arange(mid.shape[0]))

    def test_boundary_flags(self):
        """Boundary edges are exactly those with midpoint on the square boundary"""
        mesh = build_structured_mesh(4)
        mid = mesh.edge_midpoints
        on_boundary = np.isclose(mid, 0.0).any(axis=1) | np.isclose(mid, 1.0).any(axis=1)
        assert np.array_equal(on_boundary, mesh.boundary)

    def test_triangle_edges_opposite(self):
        """Edge i of a triangle does not contain local vertex i"""
        mesh = build_structured_mesh(4)
        for t in range(mesh.n_triangles):
            for i in range(3):
                assert mesh.triangles[t, i] not in mesh.edges[mesh.triangle_edges[t, i]]

    def test_invalid_parameters(self):
        """n < 2 and unknown diagonals are rejected"""
        with pytest.raises(InvalidParameterError):
            build_structured_mesh(1)
        with pytest.raises(InvalidParameterError):
            build_structured_mesh(4, "sw")

    def test_dump_mesh(self, tmp_path):
        """Text dump has one line per vertex, triangle and edge"""
        mesh = build_structured_mesh(2)
        path = dump_mesh(mesh, tmp_path / "mesh.txt")
        lines = path.read_text().splitlines()
        assert len(lines) == mesh.n_vertices + mesh.n_triangles + mesh.n_edges
        assert lines[0] == "v 0 0"
        assert sum(line.startswith("t ") for line in lines) == mesh.n_triangles


class TestDofMap:
    """Tests for enumerate_cr_dofs"""

    def test_counts(self):
        """n=4: 56 dofs, 40 free"""
        dm = enumerate_cr_dofs(build_structured_mesh(4))
        assert (dm.n_dofs, dm.n_free) == (56, 40)
        assert dm.boundary_dofs.size == 16

    def test_restrict_extend(self):
        """extend puts zeros on Dirichlet dofs and restrict undoes it"""
        dm = enumerate_cr_dofs(build_structured_mesh(4))
        free = np.arange(dm.n_free, dtype=float) + 1.0
        full = dm.extend(free)
        assert np.all(full[dm.boundary_dofs] == 0.0)
        assert np.array_equal(dm.restrict(full), free)

    def test_free_index(self):
        """free_index maps free dofs to their positions and Dirichlet dofs to -1"""
        dm = enumerate_cr_dofs(build_structured_mesh(4))
        assert np.array_equal(dm.free_index[dm.free_dofs], np.arange(dm.n_free))
        assert np.all(dm.free_index[dm.boundary_dofs] == -1)


class TestControlVolumes:
    """Tests for build_control_volumes"""

    def test_areas(self):
        """Interior volumes have area h^2/3, boundary ones h^2/6"""
        n = 4
        mesh = build_structured_mesh(n)
        dual = build_control_volumes(mesh)
        hh = 1.0 / n ** 2
        assert np.allclose(dual.areas[~mesh.boundary], hh / 3)
        assert np.allclose(dual.areas[mesh.boundary], hh / 6)
        assert dual.areas.sum() == pytest.approx(1.0)

    def test_segment_counts(self):
        """Four boundary segments per interior volume, two per boundary volume"""
        mesh = build_structured_mesh(4)
        dual = build_control_volumes(mesh)
        counts = np.bincount(dual.seg_edge, minlength=mesh.n_edges)
        assert np.all(counts[~mesh.boundary] == 4)
        assert np.all(counts[mesh.boundary] == 2)
        assert len(dual.segments(int(np.nonzero(~mesh.boundary)[0][0]))) == 4

    def test_closed_interior_volumes(self):
        """Sum of length * normal vanishes around interior volumes"""
        mesh = build_structured_mesh(8, "nw")
        dual = build_control_volumes(mesh)
        defect = dual.closure_defect()[~mesh.boundary]
        assert np.abs(defect).max() < 1e-14

    def test_unit_normals(self):
        """Segment normals have unit length"""
        dual = build_control_volumes(build_structured_mesh(4))
        assert np.allclose(np.linalg.norm(dual.seg_normal, axis=1), 1.0)


class TestPartition:
    """Tests for build_partition"""

    def test_interfaces_small(self):
        """n=4, m=2: four interfaces with two dofs each, in (k, l) order"""
        part = build_partition(build_structured_mesh(4), 2)
        assert part.n_subdomains == 4
        assert [(g.k, g.l) for g in part.interfaces] == [(0, 1), (0, 2), (1, 3), (2, 3)]
        assert [g.dofs.size for g in part.interfaces] == [2, 2, 2, 2]
        assert part.interfaces[0].label == "Gamma_0_1"

    @pytest.mark.parametrize("n,m", [(8, 2), (8, 4), (16, 4), (16, 8)])
    def test_interface_count(self, n, m):
        """2 m (m-1) interfaces, n/m dofs each"""
        part = build_partition(build_structured_mesh(n), m)
        assert len(part.interfaces) == 2 * m * (m - 1)
        assert all(g.dofs.size == n // m for g in part.interfaces)

    @pytest.mark.parametrize("n,m", [(4, 1), (4, 2), (8, 4), (8, 8)])
    def test_invariants(self, n, m):
        """Interiors, interfaces and outer boundary split all dofs"""
        mesh = build_structured_mesh(n)
        assert partition_invariants(mesh, build_partition(mesh, m))['verified']

    def test_interior_and_boundary_sizes(self):
        """n=4, m=2: 8 interior and 8 boundary dofs per subdomain"""
        part = build_partition(build_structured_mesh(4), 2)
        assert all(d.size == 8 for d in part.interior_dofs)
        assert all(d.size == 8 for d in part.boundary_dofs)

    def test_single_subdomain(self):
        """m=1 has no interfaces"""
        part = build_partition(build_structured_mesh(4), 1)
        assert part.interfaces == []
        assert part.interface_dofs.size == 0

    def test_triangle_subdomains(self):
        """Every subdomain owns the same number of triangles"""
        part = build_partition(build_structured_mesh(8), 4)
        counts = np.bincount(part.triangle_subdomain, minlength=16)
        assert np.all(counts == 8)

    def test_free_positions(self):
        """free() drops Dirichlet dofs"""
        mesh = build_structured_mesh(4)
        part = build_partition(mesh, 2)
        positions = part.free(part.boundary_dofs[0])
        assert positions.size == 4
        assert np.all(positions >= 0)

    def test_m_must_divide_n(self):
        """m not dividing n is rejected"""
        with pytest.raises(InvalidParameterError):
            build_partition(build_structured_mesh(4), 3)

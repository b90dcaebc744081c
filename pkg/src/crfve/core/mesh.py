"""
CRFVE Edge Schwarz - Meshes
===========================

Structured triangulation of the unit square, Crouzeix-Raviart (CR) degrees
of freedom, the dual mesh of edge control volumes, and the partition into
square subdomains.

Conventions:
    - Vertex (i, j) sits at (i/n, j/n) and has index j*(n+1) + i.
    - Local CR dof i of a triangle lives on the edge opposite local vertex i.
    - Edges (one CR dof each) are ordered by midpoint, y-major then x.
    - Subdomains are numbered row-major starting at the bottom-left corner.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from .errors import InvalidParameterError

logger = logging.getLogger(__name__)

# 'ne': blocks split by the bottom-left -> top-right diagonal
# 'nw': blocks split by the bottom-right -> top-left diagonal
DIAGONALS = ("ne", "nw")

# Local edge i of a triangle joins local vertices (i+1)%3 and (i+2)%3
_LOCAL_EDGES = np.array([[1, 2], [2, 0], [0, 1]])


# =============================================================================
# Primal triangulation
# =============================================================================

@dataclass(frozen=True)
class TriMesh:
    """
    Primal triangulation with CR dofs at edge midpoints.

    Attributes:
        n: Blocks per side
        diagonal: Block diagonal orientation ('ne' or 'nw')
        vertices: (V, 2) coordinates
        triangles: (T, 3) counterclockwise vertex indices
        edges: (E, 2) vertex pairs (sorted), midpoint-lexicographic order
        edge_triangles: (E, 2) adjacent triangles, -1 where absent
        triangle_edges: (T, 3) edge opposite each local vertex
        boundary: (E,) True for edges on the boundary of the unit square
        h: Longest edge length
    """
    n: int
    diagonal: str
    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    edge_triangles: np.ndarray
    triangle_edges: np.ndarray
    boundary: np.ndarray
    h: float

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def areas(self) -> np.ndarray:
        """Signed triangle areas (positive for a valid mesh)."""
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @property
    def edge_midpoints(self) -> np.ndarray:
        return 0.5 * (self.vertices[self.edges[:, 0]] + self.vertices[self.edges[:, 1]])


def build_structured_mesh(n: int, diag: str = "ne") -> TriMesh:
    """
    Triangulate (0,1)^2 by n x n square blocks, each split into two triangles.

    Args:
        n: Blocks per side (n >= 2)
        diag: Diagonal orientation, 'ne' (default) or 'nw'

    Returns:
        TriMesh with 2n^2 triangles, (n+1)^2 vertices and 3n^2 + 2n edges

    Example:
        >>> mesh = build_structured_mesh(2)
        >>> mesh.n_triangles, mesh.n_vertices, mesh.n_edges
        (8, 9, 16)
    """
    if int(n) != n or n < 2:
        raise InvalidParameterError(f"n must be an integer >= 2, got {n}")
    if diag not in DIAGONALS:
        raise InvalidParameterError(f"diag must be one of {DIAGONALS}, got {diag!r}")
    n = int(n)

    # Integer lattice coordinates keep midpoint ordering exact
    ii, jj = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="xy")
    lattice = np.column_stack([ii.ravel(), jj.ravel()])
    vertices = lattice / float(n)

    bi, bj = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    v00 = (bj * (n + 1) + bi).ravel()
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    if diag == "ne":
        lower = np.column_stack([v00, v10, v11])
        upper = np.column_stack([v00, v11, v01])
    else:
        lower = np.column_stack([v00, v10, v01])
        upper = np.column_stack([v10, v11, v01])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    # Unique edges, then renumber by midpoint (y-major, then x)
    local = np.sort(triangles[:, _LOCAL_EDGES].reshape(-1, 2), axis=1)
    unique, inverse = np.unique(local, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    mid2 = lattice[unique[:, 0]] + lattice[unique[:, 1]]
    order = np.lexsort((mid2[:, 0], mid2[:, 1]))
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    edges = unique[order]
    triangle_edges = rank[inverse].reshape(-1, 3)

    n_edges = edges.shape[0]
    flat_e = triangle_edges.ravel()
    flat_t = np.repeat(np.arange(triangles.shape[0]), 3)
    by_edge = np.argsort(flat_e, kind="stable")
    sorted_e = flat_e[by_edge]
    sorted_t = flat_t[by_edge]
    first = np.ones(sorted_e.size, dtype=bool)
    first[1:] = sorted_e[1:] != sorted_e[:-1]
    edge_triangles = -np.ones((n_edges, 2), dtype=np.int64)
    edge_triangles[sorted_e[first], 0] = sorted_t[first]
    edge_triangles[sorted_e[~first], 1] = sorted_t[~first]
    boundary = edge_triangles[:, 1] < 0

    lengths = np.linalg.norm(vertices[edges[:, 1]] - vertices[edges[:, 0]], axis=1)

    mesh = TriMesh(
        n=n,
        diagonal=diag,
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        edge_triangles=edge_triangles,
        triangle_edges=triangle_edges,
        boundary=boundary,
        h=float(lengths.max()),
    )
    logger.debug("built %dx%d mesh: %d triangles, %d edges",
                 n, n, mesh.n_triangles, mesh.n_edges)
    return mesh


def mesh_invariants(mesh: TriMesh) -> Dict[str, bool]:
    """
    Check the structural invariants of a triangulation.

    Returns:
        Dict with keys 'euler', 'adjacency', 'positive_areas', 'verified'
    """
    v, e, t = mesh.n_vertices, mesh.n_edges, mesh.n_triangles
    counts = np.bincount(mesh.triangle_edges.ravel(), minlength=e)
    adjacency = bool(np.all(counts[mesh.boundary] == 1) and np.all(counts[~mesh.boundary] == 2))
    result = {
        'euler': v - e + (t + 1) == 2,
        'adjacency': adjacency,
        'positive_areas': bool(np.all(mesh.areas > 0)),
    }
    result['verified'] = all(result.values())
    return result


# =============================================================================
# Degrees of freedom
# =============================================================================

@dataclass(frozen=True)
class DofMap:
    """
    CR degrees of freedom, one per edge.

    Attributes:
        edge_to_dof: (E,) dof index of each edge
        free_dofs: Dofs not on the boundary, ascending
        boundary_dofs: Dirichlet dofs (value 0), ascending
        free_index: (E,) position of each dof among the free dofs, -1 if Dirichlet
    """
    edge_to_dof: np.ndarray
    free_dofs: np.ndarray
    boundary_dofs: np.ndarray
    free_index: np.ndarray

    @property
    def n_dofs(self) -> int:
        return self.edge_to_dof.size

    @property
    def n_free(self) -> int:
        return self.free_dofs.size

    def restrict(self, full: np.ndarray) -> np.ndarray:
        """Take the free entries of a vector over all dofs."""
        return np.asarray(full)[self.free_dofs]

    def extend(self, free: np.ndarray) -> np.ndarray:
        """Lift a free-dof vector to all dofs with homogeneous Dirichlet data."""
        full = np.zeros(self.n_dofs)
        full[self.free_dofs] = free
        return full


def enumerate_cr_dofs(mesh: TriMesh) -> DofMap:
    """
    One CR dof per mesh edge; edges on the boundary are Dirichlet.

    Example:
        >>> dm = enumerate_cr_dofs(build_structured_mesh(4))
        >>> dm.n_dofs, dm.n_free
        (56, 40)
    """
    edge_to_dof = np.arange(mesh.n_edges)
    free = edge_to_dof[~mesh.boundary]
    bnd = edge_to_dof[mesh.boundary]
    free_index = -np.ones(mesh.n_edges, dtype=np.int64)
    free_index[free] = np.arange(free.size)
    return DofMap(edge_to_dof=edge_to_dof, free_dofs=free,
                  boundary_dofs=bnd, free_index=free_index)


# =============================================================================
# Dual mesh
# =============================================================================

@dataclass(frozen=True)
class ControlVolumeSegment:
    """One oriented piece of the boundary of a control volume."""
    start: np.ndarray
    end: np.ndarray
    length: float
    normal: np.ndarray
    triangle: int


@dataclass(frozen=True)
class DualMesh:
    """
    Control volumes b_e around every edge e.

    Each triangle contributes, for each of its edges, the sub-triangle
    (a, b, centroid) to b_e and the two segments b->centroid, centroid->a to
    the boundary of b_e. Segment arrays are indexed s = 6*t + 2*i + {0, 1}.

    Attributes:
        midpoints: (E, 2) edge midpoints m_e
        areas: (E,) area of b_e
        seg_edge, seg_triangle: (S,) owning edge and triangle
        seg_start, seg_end: (S, 2) endpoints
        seg_length: (S,)
        seg_normal: (S, 2) unit normals, outward from b_e
        piece_edge, piece_triangle: (P,) owner of each sub-triangle
        piece_vertices: (P, 3, 2) sub-triangle corners
        piece_area: (P,)
    """
    midpoints: np.ndarray
    areas: np.ndarray
    seg_edge: np.ndarray
    seg_triangle: np.ndarray
    seg_start: np.ndarray
    seg_end: np.ndarray
    seg_length: np.ndarray
    seg_normal: np.ndarray
    piece_edge: np.ndarray
    piece_triangle: np.ndarray
    piece_vertices: np.ndarray
    piece_area: np.ndarray

    @property
    def seg_midpoint(self) -> np.ndarray:
        return 0.5 * (self.seg_start + self.seg_end)

    def segments(self, e: int) -> List[ControlVolumeSegment]:
        """Boundary segments of b_e in storage order."""
        idx = np.nonzero(self.seg_edge == e)[0]
        return [
            ControlVolumeSegment(
                start=self.seg_start[s], end=self.seg_end[s],
                length=float(self.seg_length[s]), normal=self.seg_normal[s],
                triangle=int(self.seg_triangle[s]),
            )
            for s in idx
        ]

    def closure_defect(self) -> np.ndarray:
        """(E, 2) sum of length * normal over each control volume's segments."""
        out = np.zeros((self.midpoints.shape[0], 2))
        np.add.at(out, self.seg_edge, self.seg_length[:, None] * self.seg_normal)
        return out


def build_control_volumes(mesh: TriMesh) -> DualMesh:
    """
    Build b_e by joining the ends of e to the centroids of its triangles.

    For an interior edge the boundary of b_e has four segments, for a
    boundary edge two (the edge itself lies on the domain boundary and
    carries no test row).
    """
    p = mesh.vertices[mesh.triangles]
    centroid = p.mean(axis=1)
    t_count = mesh.n_triangles

    a = p[:, _LOCAL_EDGES[:, 0]]                 # (T, 3, 2)
    b = p[:, _LOCAL_EDGES[:, 1]]
    c = np.broadcast_to(centroid[:, None, :], a.shape)

    # Segment b -> c then c -> a, per local edge
    start = np.stack([b, c], axis=2).reshape(-1, 2)
    end = np.stack([c, a], axis=2).reshape(-1, 2)
    d = end - start
    length = np.hypot(d[:, 0], d[:, 1])
    normal = np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]
    seg_edge = np.repeat(mesh.triangle_edges.ravel(), 2)
    seg_triangle = np.repeat(np.arange(t_count), 6)

    piece_vertices = np.stack([a, b, c], axis=2).reshape(-1, 3, 2)
    piece_area = np.repeat(mesh.areas / 3.0, 3)
    piece_edge = mesh.triangle_edges.ravel()
    piece_triangle = np.repeat(np.arange(t_count), 3)

    areas = np.bincount(piece_edge, weights=piece_area, minlength=mesh.n_edges)

    return DualMesh(
        midpoints=mesh.edge_midpoints,
        areas=areas,
        seg_edge=seg_edge,
        seg_triangle=seg_triangle,
        seg_start=start,
        seg_end=end,
        seg_length=length,
        seg_normal=normal,
        piece_edge=piece_edge,
        piece_triangle=piece_triangle,
        piece_vertices=piece_vertices,
        piece_area=piece_area,
    )


# =============================================================================
# Subdomain partition
# =============================================================================

@dataclass(frozen=True)
class Interface:
    """Open interface Gamma_kl between subdomains k < l and its CR dofs."""
    k: int
    l: int
    dofs: np.ndarray

    @property
    def label(self) -> str:
        return f"Gamma_{self.k}_{self.l}"


@dataclass(frozen=True)
class Partition:
    """
    Nonoverlapping m x m decomposition into square subdomains.

    Dof sets are given in global dof numbering; ``free_index`` maps them to
    positions in free-dof vectors.

    Attributes:
        m: Subdomains per side
        H: Subdomain side length 1/m
        triangle_subdomain: (T,) owning subdomain of each triangle
        interior_dofs: Per subdomain, CR dofs interior to it
        boundary_dofs: Per subdomain, CR dofs on its boundary (incl. the outer boundary)
        interfaces: Interfaces in lexicographic (k, l) order
        free_index: (E,) dof -> free position, -1 for Dirichlet dofs
    """
    m: int
    H: float
    triangle_subdomain: np.ndarray
    interior_dofs: List[np.ndarray]
    boundary_dofs: List[np.ndarray]
    interfaces: List[Interface]
    free_index: np.ndarray

    @property
    def n_subdomains(self) -> int:
        return self.m * self.m

    @property
    def interface_dofs(self) -> np.ndarray:
        if not self.interfaces:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate([g.dofs for g in self.interfaces]))

    def free(self, dofs: np.ndarray) -> np.ndarray:
        """Free positions of the given dofs, dropping Dirichlet ones."""
        idx = self.free_index[np.asarray(dofs, dtype=np.int64)]
        return idx[idx >= 0]


def _group(keys: np.ndarray, values: np.ndarray, n_groups: int) -> List[np.ndarray]:
    """Split values by integer key, keeping value order inside each group."""
    order = np.argsort(keys, kind="stable")
    counts = np.bincount(keys, minlength=n_groups)
    return np.split(values[order], np.cumsum(counts)[:-1])


def build_partition(mesh: TriMesh, m: int) -> Partition:
    """
    Split the unit square into m x m square subdomains of side H = 1/m.

    Args:
        mesh: Structured mesh with n blocks per side
        m: Subdomains per side; must divide n

    Returns:
        Partition with m^2 subdomains and 2m(m-1) interfaces

    Example:
        >>> part = build_partition(build_structured_mesh(4), 2)
        >>> len(part.interfaces), [g.dofs.size for g in part.interfaces]
        (4, [2, 2, 2, 2])
    """
    if int(m) != m or m < 1:
        raise InvalidParameterError(f"m must be a positive integer, got {m}")
    m = int(m)
    n = mesh.n
    if n % m != 0:
        raise InvalidParameterError(f"m={m} does not divide n={n}")

    # Centroid coordinates times 3n are integers; blocks of n/m per subdomain
    lattice3 = np.rint(mesh.vertices[mesh.triangles].sum(axis=1) * n).astype(np.int64)
    kx = (lattice3[:, 0] * m) // (3 * n)
    ky = (lattice3[:, 1] * m) // (3 * n)
    tri_sd = ky * m + kx
    n_sd = m * m

    et = mesh.edge_triangles
    sd0 = tri_sd[et[:, 0]]
    sd1 = np.where(et[:, 1] >= 0, tri_sd[np.maximum(et[:, 1], 0)], -1)
    edges = np.arange(mesh.n_edges)

    is_interior = (sd1 >= 0) & (sd0 == sd1)
    is_interface = (sd1 >= 0) & (sd0 != sd1)

    interior_dofs = _group(sd0[is_interior], edges[is_interior], n_sd)

    # Boundary of each subdomain: outer-boundary edges and interface edges
    touching = ~is_interior
    bk = np.concatenate([sd0[touching], sd1[is_interface]])
    be = np.concatenate([edges[touching], edges[is_interface]])
    order = np.lexsort((be, bk))
    boundary_dofs = _group(bk[order], be[order], n_sd)

    lo = np.minimum(sd0, sd1)[is_interface]
    hi = np.maximum(sd0, sd1)[is_interface]
    pair_key = lo * n_sd + hi
    interfaces = []
    for key in np.unique(pair_key):
        k, l = divmod(int(key), n_sd)
        interfaces.append(Interface(k=k, l=l, dofs=edges[is_interface][pair_key == key]))

    free_index = -np.ones(mesh.n_edges, dtype=np.int64)
    free_dofs = edges[~mesh.boundary]
    free_index[free_dofs] = np.arange(free_dofs.size)

    logger.debug("partition m=%d: %d subdomains, %d interfaces", m, n_sd, len(interfaces))
    return Partition(
        m=m,
        H=1.0 / m,
        triangle_subdomain=tri_sd,
        interior_dofs=interior_dofs,
        boundary_dofs=boundary_dofs,
        interfaces=interfaces,
        free_index=free_index,
    )


def partition_invariants(mesh: TriMesh, partition: Partition) -> Dict[str, bool]:
    """
    Check that interior, interface and outer-boundary dofs split all dofs.

    Returns:
        Dict with keys 'covers_triangles', 'disjoint', 'complete', 'verified'
    """
    tri_sd = partition.triangle_subdomain
    covers = bool(np.all((tri_sd >= 0) & (tri_sd < partition.n_subdomains)))
    pieces = list(partition.interior_dofs) + [g.dofs for g in partition.interfaces]
    pieces.append(np.nonzero(mesh.boundary)[0])
    allc = np.concatenate(pieces)
    result = {
        'covers_triangles': covers,
        'disjoint': allc.size == np.unique(allc).size,
        'complete': np.unique(allc).size == mesh.n_edges,
    }
    result['verified'] = all(result.values())
    return result


# =============================================================================
# Text dump
# =============================================================================

def dump_mesh(mesh: TriMesh, path: Union[str, Path]) -> Path:
    """
    Write the mesh as plain text: 'v x y', 't i j k', 'e i j boundary_flag'.

    Returns:
        The written path
    """
    path = Path(path)
    with path.open("w") as fh:
        for x, y in mesh.vertices:
            fh.write(f"v {x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"t {i} {j} {k}\n")
        for (i, j), flag in zip(mesh.edges, mesh.boundary):
            fh.write(f"e {i} {j} {int(flag)}\n")
    return path


def mesh_counts(n: int) -> Tuple[int, int, int, int]:
    """
    Closed-form (vertices, triangles, edges, boundary edges) of the n x n mesh.
    """
    return (n + 1) ** 2, 2 * n * n, 3 * n * n + 2 * n, 4 * n

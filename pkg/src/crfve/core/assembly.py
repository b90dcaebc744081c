"""
CRFVE Edge Schwarz - Assembly
=============================

Matrices and load vectors of the two discretizations on the CR space:

    FE  (symmetric):     a_h^FE(u, v) = sum_tau  int_tau A grad u . grad v
    FV  (nonsymmetric):  a_h^FV(u, v) = -sum_{e interior} v(m_e) int_{d b_e} A grad u . n

In matrix form a_h^FV(u, v) = v^T B_FV u, with rows indexed by control
volumes (test) and columns by CR basis functions (trial).

Quadrature:
    - triangle integrals: 3-point edge-midpoint rule (exact for quadratics)
    - control-volume boundary: A at the segment midpoint times the constant
      gradient of the owning triangle

For A constant on every element both rules are exact and B_FV == A_FE.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coefficient import CoefficientField
from .errors import InvalidParameterError, MatrixNotPSDError, SingularGeometryError
from .linalg import DENSE_OPERATOR_LIMIT, factorize, to_csr
from .mesh import DofMap, DualMesh, Partition, TriMesh

logger = logging.getLogger(__name__)

Source = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]

_NEXT = np.array([1, 2, 0])
_PREV = np.array([2, 0, 1])


def _source_values(f: Source, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if callable(f):
        return np.broadcast_to(np.asarray(f(x, y), dtype=float), np.shape(x))
    return np.full(np.shape(x), float(f))


def cr_gradients(points: np.ndarray):
    """
    Gradients of the CR basis phi_i = 1 - 2 lambda_i on triangles.

    Args:
        points: (..., 3, 2) triangle vertices

    Returns:
        (grads, areas): (..., 3, 2) gradients and (...,) signed areas
    """
    p = np.asarray(points, dtype=float)
    d1 = p[..., 1, :] - p[..., 0, :]
    d2 = p[..., 2, :] - p[..., 0, :]
    areas = 0.5 * (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0])
    pj = p[..., _NEXT, :]
    pk = p[..., _PREV, :]
    grad_lambda = np.stack([pj[..., 1] - pk[..., 1], pk[..., 0] - pj[..., 0]], axis=-1)
    with np.errstate(divide='ignore', invalid='ignore'):
        grads = -2.0 * grad_lambda / (2.0 * areas)[..., None, None]
    return grads, areas


def _check_geometry(areas: np.ndarray, scale: float) -> None:
    if np.any(areas <= 1e-14 * scale * scale):
        bad = int(np.argmin(areas))
        raise SingularGeometryError(f"triangle {bad} is degenerate (area {areas.flat[bad]:.3e})")


def local_cr_stiffness(vertices: np.ndarray, coeff_values) -> np.ndarray:
    """
    Local CR stiffness K_ij = int_tau A grad phi_i . grad phi_j.

    Args:
        vertices: (3, 2) counterclockwise corners; dof i sits on the edge
            opposite vertex i
        coeff_values: A at the three edge midpoints; a scalar, (3,) scalars,
            a (2, 2) SPD tensor or (3, 2, 2) tensors

    Returns:
        (3, 3) matrix

    Example:
        >>> local_cr_stiffness(np.array([[0, 0], [1, 0], [0, 1]]), 1.0)
        array([[ 4., -2., -2.],
               [-2.,  2.,  0.],
               [-2.,  0.,  2.]])
    """
    p = np.asarray(vertices, dtype=float)
    scale = float(np.ptp(p, axis=0).max())
    grads, area = cr_gradients(p)
    _check_geometry(np.atleast_1d(area), max(scale, 1e-300))
    coeff = np.asarray(coeff_values, dtype=float)
    if coeff.ndim == 0:
        coeff = np.full(3, float(coeff))
    if coeff.shape == (2, 2):
        coeff = np.broadcast_to(coeff, (3, 2, 2))
    weight = float(area) / 3.0
    if coeff.shape == (3,):
        return weight * coeff.sum() * (grads @ grads.T)
    if coeff.shape == (3, 2, 2):
        return weight * np.einsum('id,qde,je->ij', grads, coeff, grads)
    raise InvalidParameterError(f"unsupported coefficient shape {coeff.shape}")


def _midpoint_coefficients(mesh: TriMesh, partition: Partition,
                           coeff: CoefficientField) -> np.ndarray:
    """(T, 3) coefficient values at the edge midpoints of every triangle."""
    points = mesh.edge_midpoints[mesh.triangle_edges]
    owners = np.broadcast_to(partition.triangle_subdomain[:, None], points.shape[:2])
    return coeff.evaluate(owners, points)


def _finish(matrix: sp.spmatrix, dofmap: DofMap, eliminate: bool) -> sp.csr_matrix:
    csr = to_csr(matrix)
    if eliminate:
        csr = to_csr(csr[dofmap.free_dofs][:, dofmap.free_dofs])
    return csr


def assemble_fe(mesh: TriMesh, dofmap: DofMap, partition: Partition,
                coeff: CoefficientField, eliminate: bool = True) -> sp.csr_matrix:
    """
    Symmetric CR finite element matrix.

    Args:
        eliminate: Drop Dirichlet rows/columns (default); False keeps all dofs

    Returns:
        CSR matrix on free dofs (or all dofs)
    """
    grads, areas = cr_gradients(mesh.vertices[mesh.triangles])
    _check_geometry(areas, 1.0)
    weights = areas / 3.0 * _midpoint_coefficients(mesh, partition, coeff).sum(axis=1)
    local = weights[:, None, None] * np.einsum('tid,tjd->tij', grads, grads)
    te = mesh.triangle_edges
    rows = np.broadcast_to(te[:, :, None], local.shape)
    cols = np.broadcast_to(te[:, None, :], local.shape)
    n = mesh.n_edges
    matrix = sp.coo_matrix((local.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n))
    out = _finish(matrix, dofmap, eliminate)
    logger.info("assembled A_FE: %d dofs, %d nonzeros", out.shape[0], out.nnz)
    return out


def assemble_fv(mesh: TriMesh, dual: DualMesh, dofmap: DofMap, partition: Partition,
                coeff: CoefficientField, eliminate: bool = True) -> sp.csr_matrix:
    """
    CR finite volume element matrix.

    B_FV[e, m] = -sum_{s in d b_e} A(mid s) (grad phi_m on tau_s . n_s) |s|,
    over interior edges e only; row e tests with the control volume b_e.

    Returns:
        CSR matrix on free dofs (or all dofs, boundary rows empty)
    """
    grads, areas = cr_gradients(mesh.vertices[mesh.triangles])
    _check_geometry(areas, 1.0)
    s_tri = dual.seg_triangle
    s_edge = dual.seg_edge
    keep = ~mesh.boundary[s_edge]
    s_tri, s_edge = s_tri[keep], s_edge[keep]
    owners = partition.triangle_subdomain[s_tri]
    a_seg = coeff.evaluate(owners, dual.seg_midpoint[keep])
    flux = np.einsum('sjd,sd->sj', grads[s_tri], dual.seg_normal[keep])
    values = -(a_seg * dual.seg_length[keep])[:, None] * flux
    rows = np.broadcast_to(s_edge[:, None], values.shape)
    cols = mesh.triangle_edges[s_tri]
    n = mesh.n_edges
    matrix = sp.coo_matrix((values.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n))
    out = _finish(matrix, dofmap, eliminate)
    logger.info("assembled B_FV: %d dofs, %d nonzeros", out.shape[0], out.nnz)
    return out


def assemble_rhs_fv(mesh: TriMesh, dual: DualMesh, f: Source,
                    dofmap: Optional[DofMap] = None) -> np.ndarray:
    """
    FV load vector, entry e = int_{b_e} f dx.

    Each sub-triangle of b_e is integrated with its 3-point edge-midpoint
    rule. With a dofmap only the free entries are returned.
    """
    pv = dual.piece_vertices
    mids = 0.5 * (pv + pv[:, _NEXT, :])
    values = _source_values(f, mids[..., 0], mids[..., 1])
    contrib = dual.piece_area * values.mean(axis=1)
    b = np.bincount(dual.piece_edge, weights=contrib, minlength=mesh.n_edges)
    return b if dofmap is None else dofmap.restrict(b)


def assemble_rhs_fe(mesh: TriMesh, f: Source, dofmap: Optional[DofMap] = None) -> np.ndarray:
    """
    FE load vector, entry m = int f phi_m dx by the edge-midpoint rule.

    phi_m is 1 at its own midpoint and 0 at the other two midpoints of each
    incident triangle, so entry m = f(m) * sum_{tau containing m} |tau| / 3.
    """
    mid = mesh.edge_midpoints
    fvals = _source_values(f, mid[:, 0], mid[:, 1])
    weights = np.bincount(mesh.triangle_edges.ravel(),
                          weights=np.repeat(mesh.areas / 3.0, 3), minlength=mesh.n_edges)
    b = fvals * weights
    return b if dofmap is None else dofmap.restrict(b)


@dataclass
class AssembledSystem:
    """
    Both discretizations on the free dofs.

    Attributes:
        A_FE: Symmetric FE matrix (energy inner product)
        B_FV: FV matrix, a_h^FV(u, v) = v^T B_FV u
        b_FV: FV load, entries int_{b_e} f
        b_FE: FE load, entries int f phi_m
    """
    A_FE: sp.csr_matrix
    B_FV: sp.csr_matrix
    b_FV: np.ndarray
    b_FE: np.ndarray

    @property
    def n_free(self) -> int:
        return self.A_FE.shape[0]


def assemble_system(mesh: TriMesh, dofmap: DofMap, dual: DualMesh, partition: Partition,
                    coeff: CoefficientField, f: Source = 1.0) -> AssembledSystem:
    """Assemble A_FE, B_FV and both load vectors on the free dofs."""
    return AssembledSystem(
        A_FE=assemble_fe(mesh, dofmap, partition, coeff),
        B_FV=assemble_fv(mesh, dual, dofmap, partition, coeff),
        b_FV=assemble_rhs_fv(mesh, dual, f, dofmap),
        b_FE=assemble_rhs_fe(mesh, f, dofmap),
    )


def solve_fv_direct(system: AssembledSystem) -> np.ndarray:
    """Direct sparse solve of B_FV u = b_FV."""
    return spla.spsolve(sp.csc_matrix(system.B_FV), system.b_FV)


def solve_fe_direct(system: AssembledSystem) -> np.ndarray:
    """Direct sparse solve of the CR finite element problem A_FE u = b_FE."""
    return spla.spsolve(sp.csc_matrix(system.A_FE), system.b_FE)


# =============================================================================
# Norms and form comparison
# =============================================================================

def energy_norm(A_FE, u: np.ndarray) -> float:
    """||u||_a = sqrt(u^T A_FE u)."""
    u = np.asarray(u, dtype=float)
    val = float(u @ (A_FE @ u))
    if val < -1e-12:
        raise MatrixNotPSDError(f"u^T A u = {val:.3e} < 0")
    return float(np.sqrt(max(val, 0.0)))


def broken_h1_seminorm(mesh: TriMesh, u: np.ndarray, dofmap: Optional[DofMap] = None,
                       triangles: Optional[np.ndarray] = None) -> float:
    """
    Broken H^1 seminorm sqrt(sum_tau |grad u|^2 |tau|).

    Args:
        u: Values at all CR dofs, or at free dofs when ``dofmap`` is given
        triangles: Optional triangle mask/index restricting the sum
    """
    u = np.asarray(u, dtype=float)
    if dofmap is not None and u.size == dofmap.n_free:
        u = dofmap.extend(u)
    if u.size != mesh.n_edges:
        raise InvalidParameterError(f"expected {mesh.n_edges} dof values, got {u.size}")
    grads, areas = cr_gradients(mesh.vertices[mesh.triangles])
    grad_u = np.einsum('tj,tjd->td', u[mesh.triangle_edges], grads)
    local = (grad_u ** 2).sum(axis=1) * areas
    if triangles is not None:
        local = local[triangles]
    return float(np.sqrt(local.sum()))


def form_discrepancy(A_FE, B_FV, trials: int, seed: int = 0, power_steps: int = 10) -> float:
    """
    Estimate sup |a^FE(u, v) - a^FV(u, v)| / (||u||_a ||v||_a).

    Every random sample pair is refined by alternating power steps
    v <- A^{-1} D u, u <- A^{-1} D^T v (D = A_FE - B_FV), which increase the
    quotient monotonically toward the supremum. power_steps=0 keeps the raw
    random pairs.

    Args:
        trials: Number of random vector pairs (>= 1)
        seed: Seed of the sample generator
        power_steps: Refinement steps per pair

    Returns:
        Largest quotient over all samples
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    D = to_csr(A_FE - B_FV)
    Dt = to_csr(D.T)
    factor = factorize(A_FE, symmetric=True, label="A_FE")
    rng = np.random.default_rng(seed)
    n = A_FE.shape[0]
    best = 0.0
    for _ in range(trials):
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        u /= energy_norm(A_FE, u)
        v /= energy_norm(A_FE, v)
        value = abs(float(v @ (D @ u)))
        for _ in range(power_steps):
            v = factor.solve(D @ u)
            nv = energy_norm(A_FE, v)
            if nv == 0.0:
                break
            v /= nv
            u = factor.solve(Dt @ v)
            nu = energy_norm(A_FE, u)
            if nu == 0.0:
                break
            u /= nu
            value = max(value, abs(float(v @ (D @ u))))
        best = max(best, value)
    return best


def fv_coercivity_constant(A_FE, B_FV) -> float:
    """
    min over u of (u^T B_FV u) / (u^T A_FE u), dense generalized eigensolve.

    Positive exactly when the FV form is positive definite on the CR space.
    """
    n = A_FE.shape[0]
    if n > DENSE_OPERATOR_LIMIT:
        raise InvalidParameterError(f"dense coercivity check refused for {n} dofs")
    A = A_FE.toarray() if sp.issparse(A_FE) else np.asarray(A_FE)
    B = B_FV.toarray() if sp.issparse(B_FV) else np.asarray(B_FV)
    sym = 0.5 * (B + B.T)
    return float(sla.eigh(sym, A, eigvals_only=True).min())

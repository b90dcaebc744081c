"""
CRFVE Edge Schwarz - Additive Schwarz Preconditioner
====================================================

Space decomposition of the free CR space:

    V_h = V_0 + sum_{Gamma_kl} V_kl + sum_k V_k

    V_0   coarse space spanned by the edge functions theta_kl
    V_kl  discrete harmonic functions with values only on Gamma_kl
    V_k   functions vanishing outside the interior of Omega_k

For a subspace with basis Phi_i the operator component is

    T_i u = Phi_i (Phi_i^T M Phi_i)^{-1} Phi_i^T B_FV u

with M = A_FE (variant 'sym') or M = B_FV (variant 'nsym'). Discrete harmonic
extensions always use A_FE. The preconditioned system is T u = g with
g = T u* computable from b_FV alone.

Accumulation order (coarse, interfaces in (k, l) order, subdomains by
index) is fixed so every apply is bitwise reproducible.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .errors import FactorizationError, InvalidParameterError, SchwarzSetupError
from .linalg import Factorization, KrylovTrace, MatrixLike, extract_block, factorize, gmres, to_csr
from .mesh import Interface, Partition

logger = logging.getLogger(__name__)

VARIANTS = ("sym", "nsym")
MONITORS = ("system", "l2", "inner")


# =============================================================================
# Discrete harmonic extension
# =============================================================================

def harmonic_extension(A: MatrixLike, interior: np.ndarray, boundary: np.ndarray,
                       values: np.ndarray, factor: Optional[Factorization] = None) -> np.ndarray:
    """
    Discrete A-harmonic extension of boundary data into an interior dof set.

    Interior values solve A[I, I] x = -A[I, B] values; boundary values are
    copied through. All other entries of the result are zero.

    Args:
        A: Symmetric positive definite matrix (free or full numbering)
        interior: Interior index set I
        boundary: Boundary index set B
        values: Data on B (vector or one column per data set)
        factor: Optional precomputed factorization of A[I, I]

    Returns:
        Vector (or matrix) of A's dimension
    """
    interior = np.asarray(interior, dtype=np.int64)
    boundary = np.asarray(boundary, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    out = np.zeros((A.shape[0],) + values.shape[1:])
    out[boundary] = values
    if interior.size == 0:
        return out
    if factor is None:
        factor = factorize(A, interior, symmetric=True, label="harmonic")
    coupling = extract_block(A, interior, boundary)
    out[interior] = -factor.solve(np.asarray(coupling @ values))
    return out


@dataclass
class EdgeBlock:
    """
    Harmonic extensions of unit values at the nodes of one interface.

    Attributes:
        interface: The interface Gamma_kl
        nodes: Free positions of the Gamma_kl nodes
        support: nodes followed by the interiors of Omega_k and Omega_l
        extension: (support, nodes) dense block; column j is the extension
            of the unit vector at nodes[j]
    """
    interface: Interface
    nodes: np.ndarray
    support: np.ndarray
    extension: np.ndarray

    @property
    def label(self) -> str:
        return self.interface.label

    @property
    def theta_local(self) -> np.ndarray:
        return self.extension.sum(axis=1)


@dataclass
class EdgeBasis:
    """
    Edge functions theta_kl, one column of ``theta`` per interface.

    Attributes:
        theta: (n_free, n_interfaces) sparse matrix
        blocks: Per interface extension blocks, in (k, l) order
    """
    theta: sp.csr_matrix
    blocks: List[EdgeBlock]

    @property
    def n_interfaces(self) -> int:
        return len(self.blocks)

    def column(self, i: int) -> np.ndarray:
        return np.asarray(self.theta[:, i].toarray()).ravel()


def _interior_positions(partition: Partition) -> List[np.ndarray]:
    return [partition.free(dofs) for dofs in partition.interior_dofs]


def _factor_or_fail(matrix: MatrixLike, dofs: Optional[np.ndarray], symmetric: bool,
                    label: str) -> Factorization:
    try:
        return factorize(matrix, dofs, symmetric=symmetric, label=label)
    except FactorizationError as exc:
        raise SchwarzSetupError(label, str(exc)) from exc
    except InvalidParameterError as exc:
        raise SchwarzSetupError(label, str(exc)) from exc


def build_edge_basis(partition: Partition, A_FE: MatrixLike,
                     interior_factors: Optional[List[Factorization]] = None) -> EdgeBasis:
    """
    Discrete harmonic edge functions.

    theta_kl is 1 at the nodes of Gamma_kl, 0 at all other interface nodes
    and on the outer boundary, and A_FE-harmonic inside Omega_k and Omega_l.

    Args:
        partition: Subdomain partition
        A_FE: FE matrix on free dofs
        interior_factors: Optional A_FE factorizations of the subdomain
            interiors (recomputed when omitted)

    Returns:
        EdgeBasis
    """
    A = to_csr(A_FE)
    interiors = _interior_positions(partition)
    if interior_factors is None:
        interior_factors = [
            _factor_or_fail(A, I, True, f"Omega_{k}") for k, I in enumerate(interiors)
        ]

    n_free = A.shape[0]
    blocks: List[EdgeBlock] = []
    rows, cols, vals = [], [], []
    for col, interface in enumerate(partition.interfaces):
        nodes = partition.free(interface.dofs)
        pieces = [np.eye(nodes.size)]
        for k in (interface.k, interface.l):
            I = interiors[k]
            if I.size == 0:
                continue
            coupling = extract_block(A, I, nodes).toarray()
            pieces.append(-interior_factors[k].solve(coupling))
        support = np.concatenate([nodes, interiors[interface.k], interiors[interface.l]])
        extension = np.vstack(pieces)
        block = EdgeBlock(interface=interface, nodes=nodes, support=support, extension=extension)
        blocks.append(block)
        rows.append(support)
        cols.append(np.full(support.size, col))
        vals.append(block.theta_local)

    if blocks:
        theta = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n_free, len(blocks)),
        )
    else:
        theta = sp.coo_matrix((n_free, 0))
    logger.debug("edge basis: %d edge functions", len(blocks))
    return EdgeBasis(theta=to_csr(theta), blocks=blocks)


# =============================================================================
# Subspaces
# =============================================================================

@dataclass
class Subspace:
    """
    One subspace V_i with basis Phi_i and the factorized Phi_i^T M Phi_i.

    ``support`` None means the basis is given over all free dofs; ``basis``
    None means Phi_i is the identity on ``support``.
    """
    kind: str
    label: str
    support: Optional[np.ndarray]
    basis: Union[None, np.ndarray, sp.spmatrix]
    factor: Factorization

    @property
    def dim(self) -> int:
        return self.factor.size

    def correction(self, w: np.ndarray) -> np.ndarray:
        """Phi_i (Phi_i^T M Phi_i)^{-1} Phi_i^T w on the support."""
        local = w if self.support is None else w[self.support]
        rhs = local if self.basis is None else self.basis.T @ local
        coef = self.factor.solve(np.asarray(rhs).ravel())
        return coef if self.basis is None else np.asarray(self.basis @ coef).ravel()

    def add_into(self, out: np.ndarray, w: np.ndarray) -> None:
        values = self.correction(w)
        if self.support is None:
            out += values
        else:
            out[self.support] += values

    def dense_basis(self, n_free: int) -> np.ndarray:
        """Phi_i as an (n_free, dim) array."""
        if self.support is None:
            return self.basis.toarray() if sp.issparse(self.basis) else np.asarray(self.basis)
        out = np.zeros((n_free, self.dim))
        local = np.eye(self.dim) if self.basis is None else np.asarray(self.basis)
        out[self.support] = local
        return out


@dataclass
class SchwarzPreconditioner:
    """
    Edge-based additive Schwarz operator T = T_0 + sum T_kl + sum T_k.

    Attributes:
        variant: 'sym' (M = A_FE) or 'nsym' (M = B_FV)
        A_FE: FE matrix on free dofs
        B_FV: FV matrix on free dofs
        partition: Subdomain partition
        edge_basis: Edge functions and extension blocks
        subspaces: Subspaces in accumulation order
        harmonic_factors: A_FE factorizations of the subdomain interiors
    """
    variant: str
    A_FE: sp.csr_matrix
    B_FV: sp.csr_matrix
    partition: Partition
    edge_basis: EdgeBasis
    subspaces: List[Subspace]
    harmonic_factors: List[Factorization] = field(repr=False)

    @property
    def n_free(self) -> int:
        return self.A_FE.shape[0]

    @property
    def M(self) -> sp.csr_matrix:
        return self.A_FE if self.variant == "sym" else self.B_FV

    @property
    def coarse_matrix(self) -> sp.csr_matrix:
        return self._projected(self.edge_basis.theta)

    def _projected(self, basis) -> sp.csr_matrix:
        return to_csr(basis.T @ self.M @ basis)

    def accumulate(self, w: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n_free)
        for sub in self.subspaces:
            sub.add_into(out, w)
        return out

    def apply_T(self, u: np.ndarray) -> np.ndarray:
        """T u with w = B_FV u."""
        return self.accumulate(self.B_FV @ np.asarray(u, dtype=float))

    def compute_g(self, b_FV: np.ndarray) -> np.ndarray:
        """Right-hand side g of T u = g, the same sum with w = b_FV."""
        return self.accumulate(np.asarray(b_FV, dtype=float))

    def apply_subspace(self, i: int, u: np.ndarray) -> np.ndarray:
        """Single component T_i u over all free dofs."""
        out = np.zeros(self.n_free)
        self.subspaces[i].add_into(out, self.B_FV @ np.asarray(u, dtype=float))
        return out

    def components(self, u: np.ndarray) -> List[Tuple[str, np.ndarray]]:
        """All components (label, T_i u) in accumulation order."""
        w = self.B_FV @ np.asarray(u, dtype=float)
        result = []
        for sub in self.subspaces:
            out = np.zeros(self.n_free)
            sub.add_into(out, w)
            result.append((sub.label, out))
        return result

    def harmonic_extension(self, k: int, boundary_values: np.ndarray) -> np.ndarray:
        """
        A_FE-harmonic extension into Omega_k of values on its free boundary
        dofs (``partition.free(partition.boundary_dofs[k])``); outer boundary
        dofs carry the homogeneous Dirichlet value.
        """
        if not 0 <= k < self.partition.n_subdomains:
            raise InvalidParameterError(f"subdomain {k} out of range")
        interior = self.partition.free(self.partition.interior_dofs[k])
        boundary = self.partition.free(self.partition.boundary_dofs[k])
        return harmonic_extension(self.A_FE, interior, boundary, boundary_values,
                                  factor=self.harmonic_factors[k])

    def summary(self) -> Dict[str, int]:
        counts = {"coarse": 0, "edge": 0, "interior": 0}
        for sub in self.subspaces:
            counts[sub.kind] += 1
        counts["coarse_dim"] = self.edge_basis.n_interfaces
        return counts


def setup(variant: str, A_FE: MatrixLike, B_FV: MatrixLike,
          partition: Partition) -> SchwarzPreconditioner:
    """
    Build the subspaces and factorize their matrices.

    Args:
        variant: 'sym' or 'nsym'
        A_FE: FE matrix on free dofs
        B_FV: FV matrix on free dofs
        partition: Subdomain partition

    Returns:
        SchwarzPreconditioner

    Raises:
        SchwarzSetupError: A subspace matrix is singular (possible for
            'nsym' on coarse meshes); the error names the subspace
    """
    if variant not in VARIANTS:
        raise InvalidParameterError(f"variant must be one of {VARIANTS}, got {variant!r}")
    A = to_csr(A_FE)
    B = to_csr(B_FV)
    if A.shape != B.shape:
        raise InvalidParameterError(f"A_FE {A.shape} and B_FV {B.shape} differ in shape")
    symmetric = variant == "sym"
    M = A if symmetric else B

    interiors = _interior_positions(partition)
    harmonic_factors = [_factor_or_fail(A, I, True, f"Omega_{k}") for k, I in enumerate(interiors)]
    edge_basis = build_edge_basis(partition, A, harmonic_factors)

    subspaces: List[Subspace] = []
    if edge_basis.n_interfaces:
        A0 = to_csr(edge_basis.theta.T @ M @ edge_basis.theta)
        if symmetric:
            A0 = to_csr(0.5 * (A0 + A0.T))
        subspaces.append(Subspace(kind="coarse", label="V_0", support=None,
                                  basis=edge_basis.theta,
                                  factor=_factor_or_fail(A0, None, symmetric, "V_0")))

    for block in edge_basis.blocks:
        E = block.extension
        S = E.T @ np.asarray(extract_block(M, block.support).toarray()) @ E
        if symmetric:
            S = 0.5 * (S + S.T)
        subspaces.append(Subspace(kind="edge", label=block.label, support=block.support,
                                  basis=E, factor=_factor_or_fail(S, None, symmetric, block.label)))

    for k, I in enumerate(interiors):
        if I.size == 0:
            continue
        label = f"Omega_{k}"
        factor = harmonic_factors[k] if symmetric else _factor_or_fail(M, I, False, label)
        subspaces.append(Subspace(kind="interior", label=label, support=I, basis=None, factor=factor))

    precond = SchwarzPreconditioner(variant=variant, A_FE=A, B_FV=B, partition=partition,
                                    edge_basis=edge_basis, subspaces=subspaces,
                                    harmonic_factors=harmonic_factors)
    logger.info("schwarz setup (%s): %s", variant, precond.summary())
    return precond


def apply_T(precond: SchwarzPreconditioner, u: np.ndarray) -> np.ndarray:
    return precond.apply_T(u)


def compute_g(precond: SchwarzPreconditioner, b_FV: np.ndarray) -> np.ndarray:
    return precond.compute_g(b_FV)


def solve(precond: SchwarzPreconditioner, A_FE: MatrixLike, b_FV: np.ndarray,
          tol: float = 1e-6, maxit: int = 200,
          keep_basis: bool = False, monitor: str = "system") -> Tuple[np.ndarray, KrylovTrace]:
    """
    GMRES on T u = g in the A_FE inner product.

    The default stopping test is ||b_FV - B_FV u_k||_2 <= tol ||b_FV||_2 on
    the unpreconditioned FV system; 'l2' monitors the preconditioned residual
    g - T u_k instead and 'inner' its A_FE norm.

    Returns:
        (u_h^FV on free dofs, KrylovTrace)
    """
    b_FV = np.asarray(b_FV, dtype=float)
    B = precond.B_FV
    g = precond.compute_g(b_FV)
    u, trace = gmres(precond.apply_T, g, inner=to_csr(A_FE), tol=tol, maxit=maxit,
                     monitor=monitor, keep_basis=keep_basis,
                     residual=lambda x: b_FV - B @ x)
    logger.info("gmres (%s): %d iterations, converged=%s, cp_est=%s",
                precond.variant, trace.iterations, trace.converged, trace.cp_est)
    return u, trace

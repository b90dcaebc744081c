"""
CRFVE Edge Schwarz - Linear Algebra
===================================

Sparse storage helpers, direct factorizations of extracted sub-blocks,
full (non-restarted) GMRES in a user-supplied inner product, and estimates
of the GMRES convergence parameters

    c_p = inf a(Tu, u) / ||u||_a^2,     C_p = sup ||Tu||_a / ||u||_a

from the Arnoldi Hessenberg matrix.

Residual bound for GMRES minimizing the a-norm (valid when c_p > 0):
    ||r_m||_a <= (1 - c_p^2 / C_p^2)^(m/2) ||r_0||_a
"""

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, List, Optional, Tuple, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import FactorizationError, InsufficientDataError, InvalidParameterError

logger = logging.getLogger(__name__)

Operator = Callable[[np.ndarray], np.ndarray]
InnerProduct = Callable[[np.ndarray, np.ndarray], float]
MatrixLike = Union[np.ndarray, sp.spmatrix]

DENSE_LIMIT = 200          # blocks below this size are factorized densely
DENSE_OPERATOR_LIMIT = 5000
BREAKDOWN_TOL = 1e-14


# =============================================================================
# Sparse storage
# =============================================================================

def to_csr(matrix: MatrixLike) -> sp.csr_matrix:
    """Canonical CSR: duplicates summed, column indices sorted per row."""
    csr = sp.csr_matrix(matrix, dtype=float)
    csr.sum_duplicates()
    csr.sort_indices()
    return csr


def is_canonical_csr(matrix: sp.csr_matrix) -> bool:
    """True if every row has sorted, unique column indices."""
    if not (sp.issparse(matrix) and matrix.format == "csr"):
        return False
    indptr, indices = matrix.indptr, matrix.indices
    if indptr.size != matrix.shape[0] + 1 or indptr[-1] != indices.size:
        return False
    row_of = np.repeat(np.arange(matrix.shape[0]), np.diff(indptr))
    same_row = row_of[1:] == row_of[:-1]
    return bool(np.all(np.diff(indices)[same_row] > 0))


def dump_matrix(matrix: MatrixLike, path: Union[str, Path]) -> Path:
    """Write a matrix in coordinate text format, one 'row col value' per line."""
    path = Path(path)
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with path.open("w") as fh:
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")
    return path


# =============================================================================
# Direct factorizations
# =============================================================================

@dataclass
class Factorization:
    """
    Direct factorization of a square (sub-)block.

    Attributes:
        kind: 'cholesky', 'lu' (dense, partial pivoting), 'sparse-lu' or 'empty'
        dofs: Index list the block was extracted on, None for a whole matrix
        size: Block dimension
        label: Name used in error messages
    """
    kind: str
    dofs: Optional[np.ndarray]
    size: int
    label: str
    _factor: Any = field(default=None, repr=False)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self.size == 0:
            return np.zeros_like(rhs)
        if self.kind == 'cholesky':
            return sla.cho_solve(self._factor, rhs, check_finite=False)
        if self.kind == 'lu':
            return sla.lu_solve(self._factor, rhs, check_finite=False)
        return self._factor.solve(np.ascontiguousarray(rhs))


def extract_block(matrix: MatrixLike, rows: np.ndarray, cols: Optional[np.ndarray] = None):
    """matrix[rows, cols] for dense or sparse input (cols defaults to rows)."""
    cols = rows if cols is None else cols
    if sp.issparse(matrix):
        return sp.csr_matrix(matrix)[rows][:, cols]
    return np.asarray(matrix)[np.ix_(rows, cols)]


def factorize(matrix: MatrixLike, dofs: Optional[np.ndarray] = None,
              symmetric: bool = False, label: str = "block") -> Factorization:
    """
    Factorize a square matrix or its sub-block on ``dofs``.

    Blocks smaller than DENSE_LIMIT use dense Cholesky (symmetric=True) or
    dense LU with partial pivoting; larger blocks use sparse LU.

    Args:
        matrix: Dense array or scipy sparse matrix
        dofs: Optional index list selecting a principal sub-block
        symmetric: Request the symmetric-definite path
        label: Block name for error messages

    Returns:
        Factorization

    Example:
        >>> f = factorize(np.array([[2.0, 1.0], [1.0, 2.0]]), symmetric=True)
        >>> f.solve(np.array([3.0, 3.0]))
        array([1., 1.])
    """
    block = matrix if dofs is None else extract_block(matrix, np.asarray(dofs))
    if block.shape[0] != block.shape[1]:
        raise InvalidParameterError(f"{label}: block is not square {block.shape}")
    size = block.shape[0]
    dofs = None if dofs is None else np.asarray(dofs)
    if size == 0:
        return Factorization(kind='empty', dofs=dofs, size=0, label=label)

    if size < DENSE_LIMIT:
        dense = block.toarray() if sp.issparse(block) else np.array(block, dtype=float)
        if not np.all(np.isfinite(dense)):
            raise FactorizationError(label, "block has non-finite entries")
        if symmetric:
            scale = max(np.abs(dense).max(), 1e-300)
            if np.abs(dense - dense.T).max() > 1e-10 * scale:
                raise InvalidParameterError(f"{label}: symmetric factorization of a nonsymmetric block")
            try:
                factor = sla.cho_factor(dense, lower=True, check_finite=False)
            except sla.LinAlgError as exc:
                raise FactorizationError(label, "block is not positive definite") from exc
            return Factorization(kind='cholesky', dofs=dofs, size=size, label=label, _factor=factor)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(dense, check_finite=False)
        pivots = np.abs(np.diag(lu))
        if pivots.min() <= np.finfo(float).eps * size * max(pivots.max(), 1e-300):
            raise FactorizationError(label, "block is singular")
        return Factorization(kind='lu', dofs=dofs, size=size, label=label, _factor=(lu, piv))

    try:
        factor = spla.splu(sp.csc_matrix(block, dtype=float))
    except RuntimeError as exc:
        raise FactorizationError(label, str(exc)) from exc
    return Factorization(kind='sparse-lu', dofs=dofs, size=size, label=label, _factor=factor)


def solve_with_factor(factor: Factorization, rhs: np.ndarray) -> np.ndarray:
    """Solve with a precomputed factorization (vector or multi-column rhs)."""
    return factor.solve(rhs)


# =============================================================================
# GMRES
# =============================================================================

@dataclass
class KrylovTrace:
    """
    Record of one GMRES run.

    Attributes:
        residual_norms: Residual norms in the supplied inner product
        l2_residual_norms: Euclidean residual norms of the same iterates
        system_residual_norms: Euclidean norms of the original system residual
            b - B x_k, filled only when gmres is given ``residual``
        iterations: Number of Arnoldi steps taken
        hessenberg: (iterations+1, iterations) upper Hessenberg matrix
        converged: Stopping criterion met (or Krylov space exhausted)
        breakdown: Arnoldi found an invariant subspace
        basis: Arnoldi basis, kept only on request
    """
    residual_norms: List[float] = field(default_factory=list)
    l2_residual_norms: List[float] = field(default_factory=list)
    system_residual_norms: List[float] = field(default_factory=list)
    iterations: int = 0
    hessenberg: np.ndarray = field(default_factory=lambda: np.zeros((1, 0)))
    converged: bool = False
    breakdown: bool = False
    basis: Optional[np.ndarray] = None
    cp_est: Optional[float] = None
    Cp_est: Optional[float] = None

    @staticmethod
    def _relative(values: List[float]) -> np.ndarray:
        arr = np.asarray(values, dtype=float)
        if arr.size == 0 or arr[0] == 0:
            return np.zeros_like(arr)
        return arr / arr[0]

    @property
    def relative_residuals(self) -> np.ndarray:
        return self._relative(self.residual_norms)

    @property
    def relative_l2_residuals(self) -> np.ndarray:
        return self._relative(self.l2_residual_norms)

    @property
    def relative_system_residuals(self) -> np.ndarray:
        return self._relative(self.system_residual_norms)


def euclidean_inner(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.dot(x, y))


def gmres(apply_op: Operator, g: np.ndarray,
          inner: Union[None, InnerProduct, MatrixLike] = None,
          tol: float = 1e-6, maxit: int = 200, monitor: str = "l2",
          keep_basis: bool = False,
          residual: Optional[Operator] = None) -> Tuple[np.ndarray, KrylovTrace]:
    """
    Full GMRES from a zero initial guess.

    Arnoldi orthogonalizes in ``inner`` by modified Gram-Schmidt with one
    reorthogonalization pass, so the iterates minimize the residual in the
    ``inner`` norm. Both that norm and the Euclidean norm of the residual
    are recorded. When ``residual`` maps an iterate to the residual of the
    original (unpreconditioned) system, its Euclidean norm is recorded too.
    ``monitor`` selects which norm the stopping test uses.

    Args:
        apply_op: Operator action v -> T v
        g: Right-hand side
        inner: None (Euclidean), an SPD matrix M (inner product x^T M y), or
            a callable (x, y) -> float
        tol: Relative reduction of the monitored residual norm
        maxit: Maximum number of iterations
        monitor: 'l2', 'inner' or 'system' (needs ``residual``)
        keep_basis: Store the Arnoldi basis in the trace
        residual: Optional map x -> b - B x of the original system

    Returns:
        (solution, KrylovTrace); on reaching maxit the last (best) iterate is
        returned with ``converged=False``

    Example:
        >>> x, tr = gmres(lambda v: np.array([1.0, 2.0]) * v, np.ones(2))
        >>> x
        array([1. , 0.5])
    """
    if maxit < 1:
        raise InvalidParameterError(f"maxit must be >= 1, got {maxit}")
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    if monitor not in ("l2", "inner", "system"):
        raise InvalidParameterError(f"monitor must be 'l2', 'inner' or 'system', got {monitor!r}")
    if monitor == "system" and residual is None:
        raise InvalidParameterError("monitor='system' needs a residual map")

    if inner is None:
        dual = lambda v: v                                    # noqa: E731
        ip = None
    elif callable(inner) and not hasattr(inner, "shape"):
        dual = None
        ip = inner
    else:
        metric = inner
        dual = lambda v: np.asarray(metric @ v).ravel()       # noqa: E731
        ip = None

    g = np.asarray(g, dtype=float)
    n = g.size
    trace = KrylovTrace()

    g_dual = dual(g) if dual is not None else None
    beta = np.sqrt(max(float(g @ g_dual) if dual is not None else ip(g, g), 0.0))
    l2_0 = float(np.linalg.norm(g))
    trace.residual_norms.append(beta)
    trace.l2_residual_norms.append(l2_0)
    sys_0 = 0.0
    if residual is not None:
        sys_0 = float(np.linalg.norm(residual(np.zeros(n))))
        trace.system_residual_norms.append(sys_0)
    if beta == 0.0:
        trace.converged = True
        return np.zeros(n), trace

    kmax = min(maxit, n)
    V = np.zeros((n, kmax + 1))
    MV = np.zeros((n, kmax + 1)) if dual is not None else None
    H = np.zeros((kmax + 1, kmax))
    V[:, 0] = g / beta
    if MV is not None:
        MV[:, 0] = g_dual / beta

    y = np.zeros(0)
    k = 0
    for j in range(kmax):
        w = np.array(apply_op(V[:, j]), dtype=float).ravel()
        w_norm0 = np.linalg.norm(w)
        for _ in range(2):
            for i in range(j + 1):
                hij = float(MV[:, i] @ w) if MV is not None else ip(V[:, i], w)
                H[i, j] += hij
                w -= hij * V[:, i]
        w_dual = dual(w) if dual is not None else None
        h_next = np.sqrt(max(float(w @ w_dual) if dual is not None else ip(w, w), 0.0))
        H[j + 1, j] = h_next
        k = j + 1
        breakdown = h_next <= BREAKDOWN_TOL * max(w_norm0, np.finfo(float).tiny)

        rhs = np.zeros(k + 1)
        rhs[0] = beta
        if breakdown:
            y = np.linalg.solve(H[:k, :k], rhs[:k])
            coeffs = np.zeros(k + 1)
        else:
            y = np.linalg.lstsq(H[:k + 1, :k], rhs, rcond=None)[0]
            coeffs = rhs - H[:k + 1, :k] @ y
            V[:, k] = w / h_next
            if MV is not None:
                MV[:, k] = w_dual / h_next

        res_inner = float(np.linalg.norm(coeffs))
        res_l2 = float(np.linalg.norm(V[:, :k + 1] @ coeffs))
        trace.residual_norms.append(res_inner)
        trace.l2_residual_norms.append(res_l2)
        logger.debug("gmres it=%d |r|_inner/|r0|=%.3e |r|_2/|r0|=%.3e",
                     k, res_inner / beta, res_l2 / l2_0)

        if residual is not None:
            res_sys = float(np.linalg.norm(residual(V[:, :k] @ y)))
            trace.system_residual_norms.append(res_sys)

        if monitor == "system":
            monitored = res_sys / sys_0 if sys_0 > 0 else res_sys
        elif monitor == "l2":
            monitored = res_l2 / l2_0
        else:
            monitored = res_inner / beta
        if breakdown:
            trace.breakdown = True
            trace.converged = True
            break
        if monitored <= tol:
            trace.converged = True
            break

    trace.iterations = k
    trace.hessenberg = H[:k + 1, :k].copy()
    if keep_basis:
        trace.basis = V[:, :k + 1].copy()
    x = V[:, :k] @ y
    if trace.iterations >= 2 or trace.breakdown:
        trace.cp_est, trace.Cp_est = estimate_cp_Cp(trace)
    if not trace.converged:
        logger.warning("gmres stopped at maxit=%d with relative residual %.3e",
                       maxit, trace.relative_l2_residuals[-1])
    return x, trace


def estimate_cp_Cp(trace: KrylovTrace, steps: Optional[int] = None) -> Tuple[float, float]:
    """
    Ritz-type estimates of (c_p, C_p) from the Hessenberg matrix.

    c_p_est is the smallest eigenvalue of the symmetric part of the leading
    m x m block, C_p_est the largest singular value of the (m+1) x m block.
    Over increasing m, c_p_est is nonincreasing and C_p_est nondecreasing.

    Args:
        trace: GMRES trace
        steps: Use only the first ``steps`` Arnoldi steps (default: all)

    Returns:
        (c_p_est, C_p_est)
    """
    m = trace.iterations if steps is None else int(steps)
    exhausted = trace.breakdown and m == trace.iterations
    if m < 1 or m > trace.iterations or (m < 2 and not exhausted):
        raise InsufficientDataError(f"need at least 2 Arnoldi steps, have {m}")
    H = trace.hessenberg
    square = H[:m, :m]
    cp = float(np.linalg.eigvalsh(0.5 * (square + square.T)).min())
    Cp = float(np.linalg.svd(H[:m + 1, :m], compute_uv=False).max())
    return cp, Cp


# =============================================================================
# Dense oracles
# =============================================================================

def dense_operator_matrix(apply_op: Operator, dim: int) -> np.ndarray:
    """
    Densify a linear operator column by column: column j = apply_op(e_j).

    Refuses dimensions above DENSE_OPERATOR_LIMIT.
    """
    if dim > DENSE_OPERATOR_LIMIT:
        raise InvalidParameterError(f"dim={dim} exceeds dense limit {DENSE_OPERATOR_LIMIT}")
    out = np.zeros((dim, dim))
    unit = np.zeros(dim)
    for j in range(dim):
        unit[j] = 1.0
        out[:, j] = apply_op(unit)
        unit[j] = 0.0
    return out


def energy_cp_Cp(T: np.ndarray, A: np.ndarray) -> Tuple[float, float]:
    """
    Exact (c_p, C_p) of a dense operator T in the inner product of SPD A.

    With A = L L^T the operator is congruent to L^T T L^{-T} in Euclidean
    coordinates; c_p is the smallest eigenvalue of its symmetric part and
    C_p its spectral norm.
    """
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    L = np.linalg.cholesky(A)
    X = sla.solve_triangular(L, np.asarray(T).T, lower=True).T
    That = L.T @ X
    cp = float(np.linalg.eigvalsh(0.5 * (That + That.T)).min())
    Cp = float(np.linalg.norm(That, 2))
    return cp, Cp


def residual_bound(cp: float, Cp: float, m: int) -> float:
    """Contraction factor (1 - c_p^2/C_p^2)^(m/2) after m steps."""
    return max(1.0 - (cp * cp) / (Cp * Cp), 0.0) ** (0.5 * m)

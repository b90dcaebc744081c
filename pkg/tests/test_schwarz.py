"""
Schwarz Tests
=============
Unit tests for edge functions, subspaces, the additive Schwarz operator and
the preconditioned GMRES solve.
"""

import pytest
import numpy as np
import scipy.sparse as sp
from crfve.core import (
    FactorizationError, InvalidParameterError, SchwarzSetupError,
    assemble_fe, build_problem, build_edge_basis, energy_norm, harmonic_extension,
    make_piecewise_constant, setup, apply_T, compute_g, solve, solve_fv_direct,
)


@pytest.fixture(scope="module")
def small():
    """n=4, m=2 with A = 1"""
    return build_problem(4, 2)


@pytest.fixture(scope="module")
def oscillatory():
    """n=8, m=2 with the freq=10 coefficient"""
    return build_problem(8, 2, freq=10, alpha1=100.0, red_mask=[0, 3])


def _setup(problem, variant="sym"):
    s = problem.system
    return setup(variant, s.A_FE, s.B_FV, problem.partition)


class TestEdgeBasis:
    """Tests for build_edge_basis"""

    def test_shape(self, small):
        """One column per interface"""
        basis = build_edge_basis(small.partition, small.system.A_FE)
        assert basis.n_interfaces == 4
        assert basis.theta.shape == (40, 4)

    def test_interface_values(self, small):
        """theta_kl is 1 on its own nodes and 0 on every other interface"""
        part = small.partition
        basis = build_edge_basis(part, small.system.A_FE)
        for i, block in enumerate(basis.blocks):
            theta = basis.column(i)
            assert np.allclose(theta[block.nodes], 1.0)
            for other in basis.blocks:
                if other is not block:
                    assert np.all(theta[other.nodes] == 0.0)

    def test_support(self, small):
        """theta_kl vanishes outside Gamma_kl and the two interiors"""
        part = small.partition
        basis = build_edge_basis(part, small.system.A_FE)
        block = basis.blocks[0]
        assert block.support.size == 2 + 8 + 8
        outside = np.setdiff1d(np.arange(40), block.support)
        assert np.all(basis.column(0)[outside] == 0.0)

    def test_discrete_harmonic(self, oscillatory):
        """A_FE theta_kl vanishes on the interiors of Omega_k and Omega_l"""
        part = oscillatory.partition
        A = oscillatory.system.A_FE
        basis = build_edge_basis(part, A)
        for i, block in enumerate(basis.blocks):
            residual = A @ basis.column(i)
            for k in (block.interface.k, block.interface.l):
                interior = part.free(part.interior_dofs[k])
                assert np.abs(residual[interior]).max() < 1e-12 * abs(A).max()

    def test_extension_columns(self, small):
        """Each extension column is 1 at one node and 0 at the other"""
        block = build_edge_basis(small.partition, small.system.A_FE).blocks[0]
        assert block.extension.shape == (18, 2)
        assert np.allclose(block.extension[:2], np.eye(2))
        assert np.allclose(block.theta_local, block.extension.sum(axis=1))

    def test_no_interfaces(self):
        """m=1 has an empty edge basis"""
        p = build_problem(4, 1)
        basis = build_edge_basis(p.partition, p.system.A_FE)
        assert basis.n_interfaces == 0
        assert basis.theta.shape == (40, 0)


class TestHarmonicExtension:
    """Tests for harmonic_extension"""

    def test_zero_data(self, small):
        """Zero boundary data extends to zero"""
        precond = _setup(small)
        boundary = small.partition.free(small.partition.boundary_dofs[0])
        assert np.all(precond.harmonic_extension(0, np.zeros(boundary.size)) == 0.0)

    def test_constant_data(self):
        """Constants extend to constants in the unreduced numbering"""
        p = build_problem(8, 2, freq=10)
        A_full = assemble_fe(p.mesh, p.dofmap, p.partition, p.coeff, eliminate=False)
        part = p.partition
        interior, boundary = part.interior_dofs[1], part.boundary_dofs[1]
        ext = harmonic_extension(A_full, interior, boundary, np.ones(boundary.size))
        assert np.allclose(ext[interior], 1.0)
        assert np.allclose(ext[boundary], 1.0)

    def test_minimal_energy(self, oscillatory):
        """Perturbing interior values never lowers the energy"""
        precond = _setup(oscillatory)
        part = oscillatory.partition
        A = oscillatory.system.A_FE
        boundary = part.free(part.boundary_dofs[2])
        interior = part.free(part.interior_dofs[2])
        rng = np.random.default_rng(0)
        ext = precond.harmonic_extension(2, rng.standard_normal(boundary.size))
        base = energy_norm(A, ext)
        for _ in range(5):
            v = ext.copy()
            v[interior] += 1e-2 * rng.standard_normal(interior.size)
            assert energy_norm(A, v) > base

    def test_multiple_columns(self, small):
        """Data given column-wise extends column by column"""
        part = small.partition
        A = small.system.A_FE
        interior = part.free(part.interior_dofs[3])
        boundary = part.free(part.boundary_dofs[3])
        data = np.random.default_rng(1).standard_normal((boundary.size, 3))
        block = harmonic_extension(A, interior, boundary, data)
        assert block.shape == (40, 3)
        assert np.allclose(block[:, 1], harmonic_extension(A, interior, boundary, data[:, 1]))

    def test_subdomain_range(self, small):
        """Out-of-range subdomains are rejected"""
        with pytest.raises(InvalidParameterError):
            _setup(small).harmonic_extension(4, np.zeros(4))


class TestSetup:
    """Tests for setup"""

    def test_subspace_order(self, small):
        """Coarse space, then interfaces in (k, l) order, then interiors"""
        precond = _setup(small)
        labels = [s.label for s in precond.subspaces]
        assert labels == ["V_0", "Gamma_0_1", "Gamma_0_2", "Gamma_1_3", "Gamma_2_3",
                          "Omega_0", "Omega_1", "Omega_2", "Omega_3"]
        assert precond.summary() == {"coarse": 1, "edge": 4, "interior": 4, "coarse_dim": 4}

    def test_coarse_matrix(self, small):
        """A_0 = Theta^T A_FE Theta is a symmetric 4x4 matrix"""
        precond = _setup(small)
        A0 = precond.coarse_matrix.toarray()
        assert A0.shape == (4, 4)
        assert np.allclose(A0, A0.T)
        assert np.linalg.eigvalsh(A0).min() > 0

    def test_edge_matrices_symmetric(self, oscillatory):
        """Edge subspace matrices of the sym variant are Cholesky factorized"""
        precond = _setup(oscillatory, "sym")
        kinds = {s.factor.kind for s in precond.subspaces if s.kind == "edge"}
        assert kinds == {"cholesky"}
        nsym = _setup(oscillatory, "nsym")
        assert {s.factor.kind for s in nsym.subspaces if s.kind == "edge"} == {"lu"}

    def test_variant_matrix(self, oscillatory):
        """M is A_FE for sym and B_FV for nsym"""
        sym = _setup(oscillatory, "sym")
        assert sym.M is sym.A_FE
        nsym = _setup(oscillatory, "nsym")
        assert nsym.M is nsym.B_FV

    def test_no_coarse_space(self):
        """A single subdomain has no coarse or edge subspaces"""
        precond = _setup(build_problem(4, 1))
        assert [s.kind for s in precond.subspaces] == ["interior"]

    def test_invalid_variant(self, small):
        """Unknown variants are rejected"""
        s = small.system
        with pytest.raises(InvalidParameterError):
            setup("both", s.A_FE, s.B_FV, small.partition)

    def test_shape_mismatch(self, small):
        """A_FE and B_FV must have the same shape"""
        s = small.system
        with pytest.raises(InvalidParameterError):
            setup("sym", s.A_FE, s.B_FV[:-1, :-1], small.partition)

    def test_singular_coarse(self, small):
        """A singular subspace matrix names the subspace"""
        s = small.system
        zero = sp.csr_matrix(s.A_FE.shape)
        with pytest.raises(SchwarzSetupError, match="V_0") as info:
            setup("nsym", s.A_FE, zero, small.partition)
        assert isinstance(info.value, FactorizationError)
        assert info.value.label == "V_0"


class TestOperator:
    """Tests for apply_T and compute_g"""

    def test_zero(self, oscillatory):
        """T 0 = 0 and g(0) = 0"""
        precond = _setup(oscillatory)
        n = precond.n_free
        assert np.all(apply_T(precond, np.zeros(n)) == 0.0)
        assert np.all(compute_g(precond, np.zeros(n)) == 0.0)

    def test_linear(self, oscillatory):
        """T is linear"""
        precond = _setup(oscillatory, "nsym")
        rng = np.random.default_rng(2)
        u, v = rng.standard_normal((2, precond.n_free))
        assert np.allclose(precond.apply_T(2.0 * u - v), 2.0 * precond.apply_T(u) - precond.apply_T(v))

    def test_reproducible(self, oscillatory):
        """Repeated applications agree bitwise"""
        precond = _setup(oscillatory)
        u = np.random.default_rng(3).standard_normal(precond.n_free)
        assert np.array_equal(precond.apply_T(u), precond.apply_T(u))

    def test_components_sum(self, oscillatory):
        """Components add up to T u"""
        precond = _setup(oscillatory)
        u = np.random.default_rng(4).standard_normal(precond.n_free)
        parts = precond.components(u)
        assert [label for label, _ in parts] == [s.label for s in precond.subspaces]
        assert np.allclose(sum(v for _, v in parts), precond.apply_T(u))

    @pytest.mark.parametrize("variant", ["sym", "nsym"])
    def test_g_equals_T_of_solution(self, oscillatory, variant):
        """g = T u* for the direct FV solution"""
        precond = _setup(oscillatory, variant)
        u_star = solve_fv_direct(oscillatory.system)
        g = precond.compute_g(oscillatory.system.b_FV)
        assert np.linalg.norm(g - precond.apply_T(u_star)) <= 1e-8 * np.linalg.norm(g)

    def test_variants_agree_for_constant_coefficient(self):
        """B_FV = A_FE makes both variants the same operator"""
        p = build_problem(8, 2, make_piecewise_constant([1.0, 10.0, 10.0, 1.0]))
        u = np.random.default_rng(5).standard_normal(p.dofmap.n_free)
        assert np.allclose(_setup(p, "sym").apply_T(u), _setup(p, "nsym").apply_T(u))

    def test_projections(self):
        """Every sym component is an energy-orthogonal projection when B_FV = A_FE"""
        p = build_problem(8, 2, make_piecewise_constant([1.0, 5.5, 10.0, 1.0]))
        precond = _setup(p)
        A = p.system.A_FE
        u = np.random.default_rng(6).standard_normal(precond.n_free)
        v = np.random.default_rng(7).standard_normal(precond.n_free)
        for i in range(len(precond.subspaces)):
            tu = precond.apply_subspace(i, u)
            assert np.allclose(precond.apply_subspace(i, tu), tu, atol=1e-10)
            tv = precond.apply_subspace(i, v)
            assert float(v @ (A @ tu)) == pytest.approx(float(tv @ (A @ u)), rel=1e-9, abs=1e-10)

    def test_single_subdomain_identity(self):
        """With one subdomain and B_FV = A_FE, T is the identity"""
        p = build_problem(4, 1)
        precond = _setup(p)
        u = np.random.default_rng(8).standard_normal(precond.n_free)
        assert np.allclose(precond.apply_T(u), u)

    def test_dense_basis(self, small):
        """Dense coarse basis is Theta"""
        precond = _setup(small)
        coarse = precond.subspaces[0]
        assert np.allclose(coarse.dense_basis(40), precond.edge_basis.theta.toarray())
        interior = precond.subspaces[-1]
        assert interior.dense_basis(40).shape == (40, 8)


class TestSolve:
    """Tests for the preconditioned GMRES solve"""

    @pytest.mark.parametrize("variant", ["sym", "nsym"])
    def test_matches_direct(self, oscillatory, variant):
        """GMRES solution agrees with the direct FV solve"""
        precond = _setup(oscillatory, variant)
        s = oscillatory.system
        u, trace = solve(precond, s.A_FE, s.b_FV, tol=1e-10)
        u_direct = solve_fv_direct(s)
        assert trace.converged
        assert energy_norm(s.A_FE, u - u_direct) <= 1e-6 * energy_norm(s.A_FE, u_direct)

    def test_energy_residual_monotone(self, oscillatory):
        """Energy residuals never increase"""
        precond = _setup(oscillatory)
        s = oscillatory.system
        _, trace = solve(precond, s.A_FE, s.b_FV)
        rel = trace.relative_residuals
        assert rel[0] == 1.0
        assert np.all(np.diff(rel) <= 1e-12)

    def test_stops_on_system_residual(self, oscillatory):
        """The default stop is ||b_FV - B_FV u|| <= tol ||b_FV||"""
        precond = _setup(oscillatory)
        s = oscillatory.system
        u, trace = solve(precond, s.A_FE, s.b_FV)
        actual = np.linalg.norm(s.b_FV - s.B_FV @ u) / np.linalg.norm(s.b_FV)
        assert trace.converged
        assert len(trace.system_residual_norms) == trace.iterations + 1
        assert trace.relative_system_residuals[-1] <= 1e-6
        assert actual == pytest.approx(trace.relative_system_residuals[-1], rel=1e-6, abs=1e-12)
        assert trace.relative_system_residuals[-2] > 1e-6

    def test_preconditioned_monitor(self, oscillatory):
        """monitor='l2' stops on the residual of T u = g"""
        precond = _setup(oscillatory)
        s = oscillatory.system
        _, trace = solve(precond, s.A_FE, s.b_FV, monitor="l2")
        assert trace.converged
        assert trace.relative_l2_residuals[-1] <= 1e-6
        assert trace.relative_l2_residuals[-2] > 1e-6

    def test_invalid_monitor(self, small):
        """Unknown stopping norms are rejected"""
        with pytest.raises(InvalidParameterError):
            solve(_setup(small), small.system.A_FE, small.system.b_FV, monitor="energy")

    def test_estimates_present(self, oscillatory):
        """A multi-step solve reports positive c_p and C_p estimates"""
        precond = _setup(oscillatory)
        s = oscillatory.system
        _, trace = solve(precond, s.A_FE, s.b_FV)
        assert trace.iterations >= 2
        assert 0 < trace.cp_est <= trace.Cp_est

    def test_zero_rhs(self, small):
        """b = 0 returns u = 0 without iterating"""
        precond = _setup(small)
        u, trace = solve(precond, small.system.A_FE, np.zeros(40))
        assert np.all(u == 0.0)
        assert trace.iterations == 0
        assert trace.converged

    def test_single_subdomain_one_step(self):
        """T = I converges in one step"""
        p = build_problem(4, 1)
        _, trace = solve(_setup(p), p.system.A_FE, p.system.b_FV)
        assert trace.iterations == 1
        assert trace.converged

    def test_maxit_reported(self, oscillatory):
        """An iteration cap below the need leaves converged False"""
        precond = _setup(oscillatory)
        s = oscillatory.system
        _, trace = solve(precond, s.A_FE, s.b_FV, tol=1e-12, maxit=2)
        assert trace.iterations == 2
        assert not trace.converged

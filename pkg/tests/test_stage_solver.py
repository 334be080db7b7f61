import numpy as np
import pytest

from manakov_hbvm import ManakovProblem, build_basis
from manakov_hbvm.hbvm_tableau import build_tableau
from manakov_hbvm.manakov_system import apply_J, grad_hamiltonian, rhs
from manakov_hbvm.stage_solver import (
    advance,
    apply_theta,
    blended_solve,
    build_theta,
    contraction_bound,
    fixed_point_solve,
    hsmall_bound,
    stage_residual,
)

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def dense_theta_inverse(h, tab, problem, basis):
    """I - h rho_s (I_s (x) beta (x) J_2 (x) D^2) in the vec(Gamma^T) ordering."""
    K = np.kron(np.kron(np.kron(np.eye(tab.s), np.diag(problem.beta)), J2), np.diag(basis.d**2))
    return np.eye(K.shape[0]) - h * tab.rho_s * K


def stage_map_matrix(y0, h, tab, problem, basis):
    """Affine map Gamma -> (P^T Omega (x) J) grad H(e (x) y0 + h I_s Gamma) for gamma = 0, as (M, c)."""
    shape = (tab.s,) + y0.shape
    size = int(np.prod(shape))

    def F(G):
        Y = y0 + h * np.einsum("ka,a...->k...", tab.Is, G.reshape(shape))
        return np.einsum("ak,k...->a...", tab.PtO, apply_J(grad_hamiltonian(Y, problem, basis))).ravel()

    c = F(np.zeros(size))
    M = np.column_stack([F(e) - c for e in np.eye(size)])
    return M, c


def linear(n=1, beta=1.0, L=2 * np.pi):
    return ManakovProblem(beta=np.full(n, beta), gamma=np.zeros((n, n)), a=0.0, b=L, T=1.0, psi0=None)


class TestResidual:
    def test_zero(self, make_problem):
        problem = make_problem(n=2)
        basis = build_basis(3, problem.a, problem.b)
        tab = build_tableau(4, 2)
        r = stage_residual(np.zeros((2, 4, 7)), np.zeros((4, 7)), 0.1, tab, problem, basis)
        assert np.all(r == 0)

    def test_at_zero_gamma(self, make_problem, rng):
        problem = make_problem(n=2)
        basis = build_basis(3, problem.a, problem.b)
        y0 = rng.standard_normal((4, 7))
        for k, s in [(2, 1), (4, 2), (6, 3)]:
            tab = build_tableau(k, s)
            r = stage_residual(np.zeros(s * 28), y0, 0.3, tab, problem, basis)
            f = rhs(y0, problem, basis)
            assert np.allclose(r[0], -f, rtol=0, atol=1e-13 * np.max(np.abs(f)))
            assert np.max(np.abs(r[1:]), initial=0.0) <= 1e-13 * np.max(np.abs(f))

    def test_shape_mismatch(self, make_problem):
        problem = make_problem(n=1)
        basis = build_basis(2, problem.a, problem.b)
        with pytest.raises(ValueError):
            stage_residual(np.zeros(7), np.zeros((2, 5)), 0.1, build_tableau(2, 1), problem, basis)


class TestTheta:
    def test_small_h_is_identity(self, make_problem, rng):
        problem = make_problem(n=2)
        basis = build_basis(3, problem.a, problem.b)
        theta = build_theta(0.0, build_tableau(2, 1), problem, basis)
        assert np.all(theta.B == 0)
        g = rng.standard_normal((1, 4, 7))
        assert np.array_equal(apply_theta(theta, g), g)
        assert np.all(apply_theta(theta, np.zeros(28)) == 0)

    def test_constant_mode(self):
        # only d_0 = 0 present in the diagonal block for j = 0
        problem = linear()
        basis = build_basis(1, 0.0, 2 * np.pi)
        theta = build_theta(1.0 / 0.5, build_tableau(1, 1), problem, basis)
        assert np.allclose(theta.B[0], [0.0, 1.0, 1.0], rtol=0, atol=1e-15)
        assert np.allclose(theta.inv[0], [1.0, 0.5, 0.5], rtol=0, atol=1e-15)
        assert theta.inv[0, 0] == 1.0 and theta.binv[0, 0] == 0.0

    def test_positive_diagonal(self, make_problem):
        problem = make_problem(n=3)
        theta = build_theta(5.0, build_tableau(6, 3), problem, build_basis(8, problem.a, problem.b))
        assert np.all(1 + theta.B**2 >= 1) and np.all(theta.inv > 0) and np.all(theta.inv <= 1)

    @pytest.mark.parametrize("n,N,s", [(1, 1, 1), (1, 3, 2), (2, 2, 1), (2, 3, 2)])
    def test_against_dense(self, make_problem, rng, n, N, s):
        problem = make_problem(n=n, b=3.0, beta=rng.uniform(-2, 2, n))
        basis = build_basis(N, problem.a, problem.b)
        tab = build_tableau(s + 1, s)
        h = 0.7
        theta = build_theta(h, tab, problem, basis)
        A = dense_theta_inverse(h, tab, problem, basis)
        v = rng.standard_normal(A.shape[0])
        dense = np.linalg.solve(A, v)
        assert np.max(np.abs(apply_theta(theta, v) - dense)) <= 1e-13
        G = v.reshape(s, 2 * n, 2 * N + 1)
        assert np.max(np.abs(apply_theta(theta, G).ravel() - dense)) <= 1e-13

    @pytest.mark.parametrize("h", [1e-3, 0.1, 1.0, 50.0])
    def test_inverse_identity(self, make_problem, rng, h):
        problem = make_problem(n=2, b=4.0)
        basis = build_basis(3, problem.a, problem.b)
        tab = build_tableau(4, 2)
        A = dense_theta_inverse(h, tab, problem, basis)
        v = rng.standard_normal(A.shape[0])
        assert np.max(np.abs(A @ apply_theta(build_theta(h, tab, problem, basis), v) - v)) <= 1e-13

    def test_shape_mismatch(self, make_problem):
        problem = make_problem(n=2)
        theta = build_theta(0.1, build_tableau(2, 1), problem, build_basis(3, problem.a, problem.b))
        with pytest.raises(ValueError):
            apply_theta(theta, np.zeros(27))


class TestBounds:
    def test_stated_bound(self):
        basis = build_basis(70, -4 * np.pi, 4 * np.pi)
        assert hsmall_bound(linear(2, 1.0), basis) == pytest.approx((8 * np.pi / 140) ** 2, rel=1e-14)
        assert hsmall_bound(linear(2, 1.0), basis) == pytest.approx(0.0322273, abs=5e-8)
        assert hsmall_bound(linear(2, 2.0), basis) == pytest.approx(0.5 * (8 * np.pi / 140) ** 2, rel=1e-14)
        big = build_basis(140, -4 * np.pi, 4 * np.pi)
        assert hsmall_bound(linear(2, 1.0), big) == pytest.approx(0.25 * hsmall_bound(linear(2, 1.0), basis))

    def test_zero_beta(self):
        basis = build_basis(2, 0.0, 1.0)
        assert hsmall_bound(linear(1, 0.0), basis) == np.inf
        assert contraction_bound(linear(1, 0.0), basis) == np.inf

    def test_bounds_differ_by_pi_squared(self):
        basis = build_basis(5, 0.0, 3.0)
        ratio = hsmall_bound(linear(), basis) / contraction_bound(linear(), basis)
        assert ratio == pytest.approx(np.pi**2, rel=1e-14)


class TestFixedPoint:
    def test_zero_state(self):
        problem = linear()
        basis = build_basis(2, problem.a, problem.b)
        G, rep = fixed_point_solve(np.zeros((2, 5)), 0.1, build_tableau(2, 1), problem, basis)
        assert rep.converged and rep.iterations == 1 and np.all(G == 0)

    @pytest.mark.parametrize("k,s", [(1, 1), (2, 1), (4, 2), (6, 3)])
    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_contraction_regime(self, rng, k, s, N):
        problem = linear()
        basis = build_basis(N, problem.a, problem.b)
        tab = build_tableau(k, s)
        y0 = rng.standard_normal((2, 2 * N + 1))
        hc = contraction_bound(problem, basis)
        _, ok = fixed_point_solve(y0, 0.9 * hc, tab, problem, basis, max_iter=200)
        assert ok.converged
        if s < 3:
            _, bad = fixed_point_solve(y0, 3 * hc, tab, problem, basis, max_iter=200)
            assert not bad.converged
        _, worse = fixed_point_solve(y0, 10 * hc, tab, problem, basis, max_iter=200)
        assert not worse.converged

    def test_stated_bound_too_large_for_low_order(self, rng):
        # the printed bound exceeds the contraction limit; documented deviation
        problem = linear()
        basis = build_basis(2, problem.a, problem.b)
        y0 = rng.standard_normal((2, 5))
        _, rep = fixed_point_solve(y0, 0.5 * hsmall_bound(problem, basis), build_tableau(2, 1), problem, basis,
                                   max_iter=200)
        assert not rep.converged

    def test_residual_at_solution(self, make_problem, rng):
        problem = make_problem(n=2, seed=4)
        basis = build_basis(3, problem.a, problem.b)
        tab = build_tableau(4, 2)
        y0 = 0.3 * rng.standard_normal((4, 7))
        h = 0.5 * contraction_bound(problem, basis)
        G, rep = fixed_point_solve(y0, h, tab, problem, basis)
        assert rep.converged and rep.final_residual <= 1e-13
        assert np.max(np.abs(stage_residual(G, y0, h, tab, problem, basis))) <= 1e-12


class TestBlended:
    def test_zero_state(self, make_problem):
        problem = make_problem(n=2)
        basis = build_basis(3, problem.a, problem.b)
        tab = build_tableau(4, 2)
        G, rep = blended_solve(np.zeros((4, 7)), 0.5, tab, build_theta(0.5, tab, problem, basis), problem, basis)
        assert rep.converged and rep.iterations == 1 and np.all(G == 0)

    @pytest.mark.parametrize("k,s", [(2, 1), (4, 2), (6, 3)])
    def test_agrees_with_fixed_point(self, make_problem, rng, k, s):
        problem = make_problem(n=2, seed=7)
        basis = build_basis(3, problem.a, problem.b)
        tab = build_tableau(k, s)
        y0 = 0.3 * rng.standard_normal((4, 7))
        h = 0.5 * contraction_bound(problem, basis)
        Gf, rf = fixed_point_solve(y0, h, tab, problem, basis)
        Gb, rb = blended_solve(y0, h, tab, build_theta(h, tab, problem, basis), problem, basis)
        assert rf.converged and rb.converged
        assert np.max(np.abs(Gf - Gb)) <= 10 * 1e-13 * (1 + np.max(np.abs(Gb)))

    @pytest.mark.parametrize("h", [0.05, 0.5, 2.0, 10.0])
    @pytest.mark.parametrize("k,s", [(1, 1), (2, 2), (4, 2), (6, 3)])
    def test_linear_dense_oracle(self, rng, h, k, s):
        problem = linear(2, 1.3)
        basis = build_basis(3, problem.a, problem.b)
        tab = build_tableau(k, s)
        y0 = rng.standard_normal((4, 7))
        M, c = stage_map_matrix(y0, h, tab, problem, basis)
        exact = np.linalg.solve(np.eye(M.shape[0]) - M, c)
        G, rep = blended_solve(y0, h, tab, build_theta(h, tab, problem, basis), problem, basis, max_iter=500)
        assert rep.converged
        assert np.max(np.abs(G.ravel() - exact)) <= 1e-12 * (1 + np.max(np.abs(exact)))
        assert np.max(np.abs(stage_residual(G, y0, h, tab, problem, basis))) <= 1e-12 * (1 + np.max(np.abs(exact)))

    def test_nonlinear_large_step(self, make_problem, rng):
        # well beyond the fixed-point regime
        problem = make_problem(n=2, seed=11, b=8 * np.pi)
        basis = build_basis(10, problem.a, problem.b)
        tab = build_tableau(4, 2)
        y0 = 0.2 * rng.standard_normal((4, 21))
        h = 20 * contraction_bound(problem, basis)
        G, rep = blended_solve(y0, h, tab, build_theta(h, tab, problem, basis), problem, basis)
        assert rep.converged
        assert np.max(np.abs(stage_residual(G, y0, h, tab, problem, basis))) <= 1e-11 * (1 + np.max(np.abs(G)))

    def test_theta_mismatch(self, make_problem):
        problem = make_problem(n=1)
        basis = build_basis(2, problem.a, problem.b)
        tab = build_tableau(2, 1)
        with pytest.raises(ValueError):
            blended_solve(np.zeros((2, 5)), 0.2, tab, build_theta(0.1, tab, problem, basis), problem, basis)

    def test_nan_is_fatal(self, make_problem):
        problem = make_problem(n=1)
        basis = build_basis(2, problem.a, problem.b)
        tab = build_tableau(2, 1)
        y0 = np.full((2, 5), np.nan)
        with pytest.raises(FloatingPointError):
            blended_solve(y0, 0.1, tab, build_theta(0.1, tab, problem, basis), problem, basis)

    def test_report(self, make_problem, rng):
        problem = make_problem(n=1)
        basis = build_basis(2, problem.a, problem.b)
        tab = build_tableau(6, 3)
        y0 = rng.standard_normal((2, 5))
        G, rep = blended_solve(y0, 0.1, tab, build_theta(0.1, tab, problem, basis), problem, basis, max_iter=1)
        assert rep.iterations == 1 and not rep.converged
        assert rep.gamma_block_norms.shape == (3,)
        assert np.allclose(rep.gamma_block_norms, [np.linalg.norm(g) for g in G])
        assert rep.rank_ratio == pytest.approx(rep.gamma_block_norms[2] / rep.gamma_block_norms[:2].max())


class TestAdvance:
    def test_trivial(self, rng):
        y0 = rng.standard_normal((2, 5))
        G = rng.standard_normal((2, 2, 5))
        assert np.array_equal(advance(y0, np.zeros_like(G), 0.3), y0)
        assert np.array_equal(advance(y0, G, 0.0), y0)
        assert np.array_equal(advance(y0, G, 0.5), y0 + 0.5 * G[0])

    @pytest.mark.parametrize("k,s", [(1, 1), (2, 1), (2, 2), (4, 2), (3, 3)])
    def test_linear_rotation(self, k, s):
        # (q, p)' = beta d^2 (p, -q): rotation by beta d^2 t
        problem = linear()
        basis = build_basis(1, problem.a, problem.b)
        tab = build_tableau(k, s)
        y0 = np.zeros((2, 3))
        y0[0, 2], y0[1, 2] = 0.8, 0.6
        errs = []
        for h in (0.2, 0.1):
            G, rep = blended_solve(y0, h, tab, build_theta(h, tab, problem, basis), problem, basis)
            y1 = advance(y0, G, h)
            ang = h
            exact = np.array([0.8 * np.cos(ang) + 0.6 * np.sin(ang), -0.8 * np.sin(ang) + 0.6 * np.cos(ang)])
            errs.append(np.max(np.abs(y1[:, 2] - exact)))
            assert errs[-1] <= h ** (2 * s + 1)
            assert np.all(y1[:, :2] == 0)
            # the Gauss-type step is an exact rotation of the pair
            assert np.hypot(*y1[:, 2]) == pytest.approx(1.0, abs=1e-14)
        assert np.log2(errs[0] / errs[1]) == pytest.approx(2 * s + 1, abs=0.2)

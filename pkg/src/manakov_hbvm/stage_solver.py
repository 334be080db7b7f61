"""Per-step nonlinear solvers for the reduced HBVM stage equation.

One step of HBVM(k, s) from y0 with stepsize h amounts to finding the block
coefficients Gamma = (Gamma_0, ..., Gamma_{s-1}), each of the shape of a
state, such that

    Gamma = (P_s^T Omega (x) J) grad H(e (x) y0 + h (I_s (x) I) Gamma),

after which y1 = y0 + h Gamma_0.  Gamma is stored as an array of shape
(s, 2n, 2N+1); its C-order ravel is the vector vec(Gamma^T) used in the
Kronecker formulation.
"""

from dataclasses import dataclass

import numpy as np

from .manakov_system import apply_J, grad_hamiltonian

__all__ = [
    "SolverReport",
    "ThetaOperator",
    "stage_residual",
    "fixed_point_solve",
    "hsmall_bound",
    "contraction_bound",
    "build_theta",
    "apply_theta",
    "blended_solve",
    "advance",
]


@dataclass
class SolverReport:
    """Outcome of a stage solve.

    ``final_residual`` is the scaled size of the last update,
    max|delta| / (1 + max|Gamma|), the quantity compared against ``tol``.
    """

    iterations: int
    final_residual: float
    converged: bool
    gamma_block_norms: np.ndarray

    @property
    def rank_ratio(self):
        """||Gamma_{s-1}|| / max_{i<s} ||Gamma_i|| (Frobenius); nan when s = 1."""
        norms = self.gamma_block_norms
        if norms.size < 2:
            return float("nan")
        top = np.max(norms[:-1])
        return float(norms[-1] / top) if top > 0 else 0.0


def _stage_values(Gamma, y0, h, tableau):
    return y0 + h * np.einsum("ka,a...->k...", tableau.Is, Gamma)


def _stage_map(Gamma, y0, h, tableau, problem, basis):
    """(P_s^T Omega (x) J) grad H(e (x) y0 + h I_s Gamma)."""
    Y = _stage_values(Gamma, y0, h, tableau)
    F = apply_J(grad_hamiltonian(Y, problem, basis))
    return np.einsum("ak,k...->a...", tableau.PtO, F)


def _as_blocks(Gamma, tableau, y0):
    Gamma = np.asarray(Gamma, dtype=float)
    shape = (tableau.s,) + y0.shape
    if Gamma.size != np.prod(shape):
        raise ValueError(f"Gamma has {Gamma.size} entries, expected shape {shape}")
    return Gamma.reshape(shape)


def stage_residual(Gamma, y0, h, tableau, problem, basis):
    """Gamma - (P_s^T Omega (x) J) grad H(e (x) y0 + h I_s Gamma), shape (s, 2n, 2N+1)."""
    y0 = np.asarray(y0, dtype=float)
    G = _as_blocks(Gamma, tableau, y0)
    return G - _stage_map(G, y0, h, tableau, problem, basis)


def _report(it, res, tol, G):
    norms = np.sqrt(np.sum(G * G, axis=tuple(range(1, G.ndim))))
    return SolverReport(iterations=it, final_residual=float(res), converged=bool(res <= tol),
                        gamma_block_norms=norms)


def fixed_point_solve(y0, h, tableau, problem, basis, tol=1e-13, max_iter=100):
    """Plain fixed-point iteration on the stage equation, starting from Gamma = 0.

    Converges for small h only (see :func:`contraction_bound`).  Failure is
    reported through ``report.converged``; divergent iterates that overflow
    stop the loop early.
    """
    y0 = np.asarray(y0, dtype=float)
    G = np.zeros((tableau.s,) + y0.shape)
    res = np.inf
    it = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while it < max_iter:
            it += 1
            Gn = _stage_map(G, y0, h, tableau, problem, basis)
            res = np.max(np.abs(Gn - G)) / (1.0 + np.max(np.abs(Gn)))
            G = Gn
            if not np.isfinite(res):
                res = np.inf
                break
            if res <= tol:
                break
    return G, _report(it, res, tol, G)


def hsmall_bound(problem, basis):
    """Stepsize bound ||beta||^-1 ((b - a)/(2N))^2 as usually stated.

    Note this is pi^2 times larger than what the contraction argument gives,
    because ||D^2|| = (2 pi N/(b - a))^2; use :func:`contraction_bound` to
    predict convergence of the fixed-point iteration.
    """
    bnorm = np.max(np.abs(problem.beta))
    if bnorm == 0:
        return np.inf
    return float((basis.length / (2 * basis.N)) ** 2 / bnorm)


def contraction_bound(problem, basis):
    """1 / (||beta|| ||D^2||): the fixed-point map contracts (gamma = 0) for h below it."""
    bnorm = np.max(np.abs(problem.beta))
    if bnorm == 0:
        return np.inf
    return float(1.0 / (bnorm * np.max(basis.d) ** 2))


@dataclass(frozen=True)
class ThetaOperator:
    """Blockwise form of (I - h rho_s I_s (x) beta (x) J_2 (x) D^2)^{-1}.

    For component i and frequency j with b = h rho_s beta_i d_j^2 the action
    on the pair (q, p) is ((q + b p), (p - b q)) / (1 + b^2).  ``inv`` holds
    1/(1 + b^2) and ``binv`` b/(1 + b^2), both of shape (n, 2N+1).
    """

    h: float
    rho_s: float
    B: np.ndarray
    inv: np.ndarray
    binv: np.ndarray


def build_theta(h, tableau, problem, basis):
    B = h * tableau.rho_s * np.outer(problem.beta, basis.d**2)
    inv = 1.0 / (1.0 + B * B)
    for arr in (B, inv):
        arr.setflags(write=False)
    binv = B * inv
    binv.setflags(write=False)
    return ThetaOperator(h=float(h), rho_s=tableau.rho_s, B=B, inv=inv, binv=binv)


def apply_theta(theta, g):
    """Multiply ``g`` by Theta.

    ``g`` may be the vector vec(Gamma^T) or any array whose C-order ravel is
    that vector, e.g. Gamma itself with shape (s, 2n, 2N+1); the result has
    the shape of ``g``.
    """
    g = np.asarray(g, dtype=float)
    n, cols = theta.inv.shape
    if g.size % (2 * n * cols):
        raise ValueError(f"size {g.size} is not a multiple of 2n(2N+1) = {2 * n * cols}")
    G = g.reshape(-1, n, 2, cols)
    q = G[:, :, 0, :]
    p = G[:, :, 1, :]
    out = np.empty_like(G)
    out[:, :, 0, :] = theta.inv * q + theta.binv * p
    out[:, :, 1, :] = theta.inv * p - theta.binv * q
    return out.reshape(g.shape)


def blended_solve(y0, h, tableau, theta, problem, basis, tol=1e-13, max_iter=100, Gamma0=None):
    """Blended (splitting-Newton) iteration for the stage equation.

    Each sweep computes eta = -f(g), eta1 = rho_s (X_s^{-1} (x) I) eta and
    the update delta = Theta [eta1 + Theta (eta - eta1)].  Stops once
    max|delta| <= tol (1 + max|g|).  Starts from ``Gamma0`` (zero by default).
    """
    y0 = np.asarray(y0, dtype=float)
    if not np.isclose(theta.h, h, rtol=1e-14, atol=0.0) or theta.rho_s != tableau.rho_s:
        raise ValueError("theta was built for a different stepsize or method")
    G = np.zeros((tableau.s,) + y0.shape) if Gamma0 is None else _as_blocks(Gamma0, tableau, y0).copy()
    coef = tableau.rho_s * tableau.Xs_inv
    res = np.inf
    it = 0
    while it < max_iter:
        it += 1
        eta = _stage_map(G, y0, h, tableau, problem, basis) - G
        if not np.all(np.isfinite(eta)):
            raise FloatingPointError(f"non-finite stage residual at blended iteration {it}")
        eta1 = np.einsum("ab,b...->a...", coef, eta)
        delta = apply_theta(theta, eta1 + apply_theta(theta, eta - eta1))
        G += delta
        res = np.max(np.abs(delta)) / (1.0 + np.max(np.abs(G)))
        if res <= tol:
            break
    return G, _report(it, res, tol, G)


def advance(y0, Gamma, h):
    """New approximation y1 = y0 + h Gamma_0."""
    return np.asarray(y0) + h * np.asarray(Gamma)[0]

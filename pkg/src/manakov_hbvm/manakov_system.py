"""Fourier-Galerkin semi-discretization of the Manakov system.

The complex field psi = u + i v (n components) is expanded as
u = q w(x), v = p w(x), and the coefficients are stored in the interleaved
real matrix ``y`` of shape (2n, 2N+1) whose rows are q_1, p_1, ..., q_n, p_n.
The semi-discrete problem is the canonical Hamiltonian system
y' = J grad H(y) with J = I_n (x) [[0, 1], [-1, 0]] and

    H(y) = 1/2 sum_j d_j^2 y_j^T beta_2 y_j
           - 1/8 int [Q (y w)^2]^T gamma_2 [Q (y w)^2] dx.
"""

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .exceptions import ConfigurationError
from .fourier_space import project, quadrature, synthesize

__all__ = [
    "ManakovProblem",
    "BlockMatrices",
    "InvariantRecord",
    "block_matrices",
    "interleave",
    "deinterleave",
    "apply_J",
    "initial_state",
    "grad_hamiltonian",
    "rhs",
    "hamiltonian",
    "hamiltonian_qp",
    "invariants",
    "momentum",
    "solution_error",
    "pad_state",
]


@dataclass(frozen=True)
class ManakovProblem:
    """i psi_t = -beta psi_xx - (gamma |psi|^2) o psi on [a, b] x [0, T], periodic in x.

    ``psi0`` maps an array of abscissae of shape (m,) to a complex array of
    shape (n, m).
    """

    beta: np.ndarray
    gamma: np.ndarray
    a: float
    b: float
    T: float
    psi0: Callable = field(repr=False)
    name: str = "custom"

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        gamma = np.atleast_2d(np.asarray(self.gamma, dtype=float))
        n = beta.size
        if beta.ndim != 1 or not np.all(np.isfinite(beta)):
            raise ConfigurationError("beta must be a finite vector")
        if gamma.shape != (n, n):
            raise ConfigurationError(f"gamma must have shape ({n}, {n}), got {gamma.shape}")
        if not np.array_equal(gamma, gamma.T):
            raise ConfigurationError("gamma must be symmetric")
        if not np.all(np.isfinite(gamma)):
            raise ConfigurationError("gamma must be finite")
        if not self.b > self.a:
            raise ConfigurationError(f"degenerate interval [{self.a}, {self.b}]")
        if not self.T > 0:
            raise ConfigurationError(f"T must be positive, got {self.T}")
        beta.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "T", float(self.T))

    @property
    def n(self):
        return self.beta.size


class BlockMatrices(NamedTuple):
    beta2: np.ndarray
    gamma2: np.ndarray
    J: np.ndarray
    Q: np.ndarray


J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def block_matrices(problem):
    """beta (x) I_2, gamma (x) I_2, I_n (x) J_2 and I_n (x) ones(2, 2)."""
    n = problem.n
    I2 = np.eye(2)
    return BlockMatrices(
        beta2=np.kron(np.diag(problem.beta), I2),
        gamma2=np.kron(problem.gamma, I2),
        J=np.kron(np.eye(n), J2),
        Q=np.kron(np.eye(n), np.ones((2, 2))),
    )


@dataclass(frozen=True)
class InvariantRecord:
    """Per-component masses, total mass, momentum and Hamiltonian of a state."""

    masses: np.ndarray
    M: float
    K: float
    H: float

    @property
    def E(self):
        return self.H


def interleave(q, p):
    """Stack (n, 2N+1) blocks q and p into rows q_1, p_1, ..., q_n, p_n."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.shape != p.shape:
        raise ValueError("q and p must have the same shape")
    y = np.empty(q.shape[:-2] + (2 * q.shape[-2], q.shape[-1]))
    y[..., 0::2, :] = q
    y[..., 1::2, :] = p
    return y


def deinterleave(y):
    """Inverse of :func:`interleave`; returns copies (q, p)."""
    y = np.asarray(y)
    return y[..., 0::2, :].copy(), y[..., 1::2, :].copy()


def apply_J(x):
    """Multiply (a stack of) interleaved matrices by I_n (x) J_2 from the left."""
    out = np.empty_like(x)
    out[..., 0::2, :] = x[..., 1::2, :]
    out[..., 1::2, :] = -x[..., 0::2, :]
    return out


def _check_shape(y, problem, basis):
    if y.shape[-2:] != (2 * problem.n, basis.size):
        raise ValueError(
            f"state shape {y.shape[-2:]} does not match (2n, 2N+1) = {(2 * problem.n, basis.size)}"
        )


def initial_state(problem, basis):
    """Project psi0 onto the basis and return the interleaved coefficient matrix."""
    psi = np.asarray(problem.psi0(basis.nodes), dtype=complex)
    psi = psi.reshape(problem.n, basis.m)
    if not np.all(np.isfinite(psi)):
        raise ValueError("initial field has non-finite samples")
    q = project(basis, psi.real.T)
    p = project(basis, psi.imag.T)
    return interleave(q, p)


def grad_hamiltonian(y, problem, basis):
    """Gradient of H with respect to y; accepts a leading stack axis.

    The nonlinear integral is evaluated by synthesis at the nodes, pointwise
    products, and projection back, which is exact for m >= 4N + 1.
    """
    y = np.asarray(y, dtype=float)
    _check_shape(y, problem, basis)
    W = basis.W
    n = problem.n
    # one flat GEMM per transform; batched matmul is much slower here
    z = (y.reshape(-1, basis.size) @ W.T).reshape(-1, n, 2, basis.m)
    rho = z[:, :, 0, :] ** 2 + z[:, :, 1, :] ** 2
    g = np.matmul(problem.gamma, rho)
    nl = (g[:, :, None, :] * z).reshape(-1, basis.m) @ W
    lin = np.repeat(problem.beta, 2)[:, None] * (basis.d**2) * y
    return lin - basis.wq * nl.reshape(lin.shape)


def rhs(y, problem, basis):
    """Semi-discrete vector field J grad H(y)."""
    return apply_J(grad_hamiltonian(y, problem, basis))


def hamiltonian(y, problem, basis):
    """H(y) in the block form with beta_2, gamma_2 and Q."""
    y = np.asarray(y, dtype=float)
    _check_shape(y, problem, basis)
    bm = block_matrices(problem)
    quad = 0.5 * np.sum(basis.d**2 * np.einsum("ij,ik,kj->j", y, bm.beta2, y))
    Qz2 = bm.Q @ (y @ basis.W.T) ** 2
    quart = quadrature(basis, np.einsum("im,ik,km->m", Qz2, bm.gamma2, Qz2))
    return float(quad - quart / 8.0)


def hamiltonian_qp(y, problem, basis):
    """H written on the (q, p) coefficient blocks with the 1/4 quartic factor.

    Algebraically equal to :func:`hamiltonian`; kept as a separate code path
    so each can check the other.
    """
    q, p = deinterleave(np.asarray(y, dtype=float))
    d2 = basis.d**2
    quad = 0.5 * np.sum(d2 * (np.sum(problem.beta[:, None] * q * q, axis=0)
                              + np.sum(problem.beta[:, None] * p * p, axis=0)))
    u = synthesize(basis, q)
    v = synthesize(basis, p)
    s = u**2 + v**2
    quart = quadrature(basis, np.sum(s * (problem.gamma @ s), axis=0))
    return float(quad - quart / 4.0)


def momentum(y, basis):
    """K = 2 sum_{j=1..N} d_{2j} y_{2j}^T J y_{2j-1} (columns of y).

    Equal to the integral of v_x^T u - u_x^T v over the period.
    """
    odd = y[:, 1::2]
    even = y[:, 2::2]
    # y_even^T J y_odd summed over components: q_even p_odd - p_even q_odd
    cross = even[0::2] * odd[1::2] - even[1::2] * odd[0::2]
    return float(2.0 * np.sum(basis.d[2::2] * cross.sum(axis=0)))


def invariants(y, problem, basis):
    """Masses, total mass, momentum and energy of the state ``y``."""
    y = np.asarray(y, dtype=float)
    _check_shape(y, problem, basis)
    sq = y * y
    masses = (sq[0::2] + sq[1::2]).sum(axis=1)
    return InvariantRecord(
        masses=masses,
        M=float(masses.sum()),
        K=momentum(y, basis),
        H=hamiltonian(y, problem, basis),
    )


def solution_error(y, yref):
    """Maximum absolute entrywise difference between two states."""
    y = np.asarray(y)
    yref = np.asarray(yref)
    if y.shape != yref.shape:
        raise ValueError(f"shape mismatch: {y.shape} vs {yref.shape}")
    return float(np.max(np.abs(y - yref))) if y.size else 0.0


def pad_state(y, N):
    """Embed a state into the basis of truncation index ``N`` (zero high modes)."""
    y = np.asarray(y)
    cols = 2 * N + 1
    if y.shape[-1] > cols:
        raise ValueError("cannot pad to a smaller basis")
    out = np.zeros(y.shape[:-1] + (cols,))
    out[..., : y.shape[-1]] = y
    return out

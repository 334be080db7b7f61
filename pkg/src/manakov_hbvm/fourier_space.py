"""Truncated periodic orthonormal Fourier basis on [a, b].

The basis is ordered as

    w_0 = 1/sqrt(L),
    w_{2j-1} = sqrt(2/L) sin(2 pi j (x - a)/L),
    w_{2j}   = sqrt(2/L) cos(2 pi j (x - a)/L),   j = 1..N,

with L = b - a.  Integrals of products are evaluated with the equal-weight
periodic trapezoidal rule on m = 4N + 1 nodes, which is exact for
trigonometric polynomials of degree <= m - 1 = 4N.  That covers every
integrand the semi-discrete Manakov system needs: W^T W (degree 2N), the
quartic Hamiltonian term (4N) and the cubic-times-basis projection in the
vector field (3N + N).
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError

__all__ = [
    "FourierBasis",
    "DiffMatrices",
    "build_basis",
    "build_diff",
    "basis_values",
    "project",
    "synthesize",
    "quadrature",
]


def _frozen(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FourierBasis:
    """Truncated basis w_0..w_{2N} together with its quadrature grid.

    Attributes
    ----------
    N : int
        Truncation index; the basis has 2N + 1 functions.
    a, b : float
        Domain endpoints.
    d : ndarray, shape (2N+1,)
        Frequency magnitudes d_j = 2 pi ceil(j/2) / (b - a).
    m : int
        Number of quadrature nodes.
    nodes : ndarray, shape (m,)
        x_i = a + i (b - a)/m, i = 0..m-1.
    W : ndarray, shape (m, 2N+1)
        Basis values W[i, j] = w_j(x_i).
    wq : float
        Uniform quadrature weight (b - a)/m.
    """

    N: int
    a: float
    b: float
    d: np.ndarray
    m: int
    nodes: np.ndarray
    W: np.ndarray
    wq: float

    @property
    def size(self):
        return 2 * self.N + 1

    @property
    def length(self):
        return self.b - self.a


@dataclass(frozen=True)
class DiffMatrices:
    """Spectral differentiation data.

    ``D`` is diagonal with entries d_j, ``Dtilde`` is block skew with 2x2
    blocks j*J_2 (scaled by 2 pi/(b - a)), and ``D2 = D @ D``.  For a
    coefficient row q, ``q @ Dtilde`` holds the coefficients of the first
    derivative and ``-q @ D2`` those of the second derivative.
    """

    D: np.ndarray
    Dtilde: np.ndarray
    D2: np.ndarray


def basis_values(N, a, b, xs):
    """Evaluate w_0..w_{2N} at the abscissae ``xs``; returns shape (len(xs), 2N+1)."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    L = b - a
    out = np.empty((xs.size, 2 * N + 1))
    out[:, 0] = 1.0 / np.sqrt(L)
    j = np.arange(1, N + 1)
    arg = 2.0 * np.pi * np.outer(xs - a, j) / L
    scale = np.sqrt(2.0 / L)
    out[:, 1::2] = scale * np.sin(arg)
    out[:, 2::2] = scale * np.cos(arg)
    return out


def build_basis(N, a, b, m=None):
    """Build the truncated basis and its quadrature grid.

    Parameters
    ----------
    N : int
        Truncation index, N >= 1.
    a, b : float
        Domain endpoints with b > a.
    m : int, optional
        Node count.  Defaults to 4N + 1; smaller values are rejected since the
        rule would no longer integrate the model's integrands exactly.
    """
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ConfigurationError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    a = float(a)
    b = float(b)
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise ConfigurationError(f"degenerate interval [{a}, {b}]")
    if m is None:
        m = 4 * N + 1
    if int(m) != m or m < 4 * N + 1:
        raise ConfigurationError(f"m must be an integer >= 4N+1 = {4 * N + 1}, got {m!r}")
    m = int(m)

    L = b - a
    d = 2.0 * np.pi / L * np.ceil(np.arange(2 * N + 1) / 2.0)
    nodes = a + np.arange(m) * (L / m)
    W = basis_values(N, a, b, nodes)
    return FourierBasis(
        N=N, a=a, b=b, d=_frozen(d), m=m, nodes=_frozen(nodes), W=_frozen(W), wq=L / m
    )


def build_diff(basis):
    """Differentiation matrices D, Dtilde and D^2 for ``basis``."""
    n = basis.size
    D = np.diag(basis.d)
    Dtilde = np.zeros((n, n))
    odd = np.arange(1, n, 2)
    Dtilde[odd, odd + 1] = basis.d[odd]
    Dtilde[odd + 1, odd] = -basis.d[odd]
    return DiffMatrices(D=_frozen(D), Dtilde=_frozen(Dtilde), D2=_frozen(np.diag(basis.d**2)))


def project(basis, samples):
    """Coefficients of sampled functions.

    ``samples`` has shape (m,) or (m, r): column t holds the values of the
    t-th function at ``basis.nodes``.  Returns shape (r, 2N+1) (or (2N+1,)
    for a 1-D input), row t being wq * sum_i samples[i, t] * W[i, :].
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] != basis.m:
        raise ValueError(f"expected {basis.m} samples per function, got {samples.shape[0]}")
    return basis.wq * (samples.T @ basis.W)


def synthesize(basis, coeffs, xs=None):
    """Evaluate coefficient rows at ``xs`` (defaults to the quadrature nodes).

    Returns shape (r, len(xs)) for coefficient matrices of shape (r, 2N+1).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != basis.size:
        raise ValueError(f"coefficient rows must have length {basis.size}, got {coeffs.shape[-1]}")
    if xs is None:
        return coeffs @ basis.W.T
    return coeffs @ basis_values(basis.N, basis.a, basis.b, xs).T


def quadrature(basis, node_values):
    """Periodic trapezoidal approximation of the integral over [a, b]."""
    node_values = np.asarray(node_values, dtype=float)
    if node_values.shape[-1] != basis.m:
        raise ValueError(f"expected {basis.m} node values, got {node_values.shape[-1]}")
    return basis.wq * np.sum(node_values, axis=-1)

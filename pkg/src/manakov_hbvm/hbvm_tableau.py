"""HBVM(k, s) coefficients.

A HBVM(k, s) is the k-stage Runge-Kutta method with Butcher matrix
A = I_s P_s^T Omega built on the k-point Gauss-Legendre rule on [0, 1] and
the first s orthonormal shifted Legendre polynomials P_0..P_{s-1}.  For
k = s it is the s-stage Gauss collocation method.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError

__all__ = [
    "HbvmTableau",
    "gauss_legendre",
    "legendre_shifted",
    "legendre_shifted_integral",
    "xs_closed_form",
    "build_tableau",
    "butcher_A",
    "spectral_k",
]

MAX_K = 64


def _legendre_and_derivative(n, t):
    """Classical Legendre L_n(t) and L_n'(t) by the three-term recurrence."""
    p0 = np.ones_like(t)
    if n == 0:
        return p0, np.zeros_like(t)
    p1 = t.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * t * p1 - (j - 1) * p0) / j
    dp = n * (t * p1 - p0) / (t * t - 1.0)
    return p1, dp


def gauss_legendre(k):
    """Nodes and weights of the k-point Gauss-Legendre rule on [0, 1].

    Newton iteration on L_k from Chebyshev-like initial guesses.  The rule
    is exact for polynomials of degree <= 2k - 1.
    """
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= MAX_K:
        raise ConfigurationError(f"k must be an integer in [1, {MAX_K}], got {k!r}")
    k = int(k)
    i = np.arange(1, k + 1)
    t = np.cos(np.pi * (i - 0.25) / (k + 0.5))
    for _ in range(50):
        L, dL = _legendre_and_derivative(k, t)
        dt = L / dL
        t = t - dt
        if np.max(np.abs(dt)) <= 1e-15:
            break
    L, dL = _legendre_and_derivative(k, t)
    w = 2.0 / ((1.0 - t * t) * dL * dL)
    # t decreases with i; map to increasing nodes on [0, 1]
    c = (1.0 - t) / 2.0
    bw = w / 2.0
    # enforce exact symmetry about 1/2
    c = 0.5 * (c + (1.0 - c[::-1]))
    bw = 0.5 * (bw + bw[::-1])
    return c, bw


def _legendre_table(nmax, x):
    """L_0..L_nmax evaluated at 2x - 1; shape (nmax+1,) + x.shape."""
    t = 2.0 * np.asarray(x, dtype=float) - 1.0
    out = np.empty((nmax + 1,) + t.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = t
    for j in range(2, nmax + 1):
        out[j] = ((2 * j - 1) * t * out[j - 1] - (j - 1) * out[j - 2]) / j
    return out


def legendre_shifted(j, x):
    """Orthonormal shifted Legendre polynomial P_j on [0, 1]."""
    return np.sqrt(2 * j + 1) * _legendre_table(j, x)[j]


def legendre_shifted_integral(j, x):
    """int_0^x P_j(t) dt.

    Uses (2j+1) L_j = (L_{j+1} - L_{j-1})' and L_{j+1}(-1) = L_{j-1}(-1).
    """
    x = np.asarray(x, dtype=float)
    if j == 0:
        return x.copy() if x.ndim else float(x)
    L = _legendre_table(j + 1, x)
    return (L[j + 1] - L[j - 1]) / (2.0 * np.sqrt(2 * j + 1))


def xs_closed_form(s):
    """Closed form of X_s = P_s^T Omega I_s.

    X[0, 0] = xi_0, X[i, i-1] = xi_i, X[i-1, i] = -xi_i, with
    xi_i = 1 / (2 sqrt(|4 i^2 - 1|)).
    """
    i = np.arange(s)
    xi = 1.0 / (2.0 * np.sqrt(np.abs(4.0 * i * i - 1.0)))
    X = np.zeros((s, s))
    X[0, 0] = xi[0]
    X[i[1:], i[1:] - 1] = xi[1:]
    X[i[1:] - 1, i[1:]] = -xi[1:]
    return X, xi


@dataclass(frozen=True)
class HbvmTableau:
    k: int
    s: int
    c: np.ndarray
    bw: np.ndarray
    Ps: np.ndarray
    Is: np.ndarray
    Omega: np.ndarray
    Xs: np.ndarray
    Xs_inv: np.ndarray
    rho_s: float
    xi: np.ndarray

    @property
    def PtO(self):
        """P_s^T Omega, shape (s, k)."""
        return self.Ps.T * self.bw

    @property
    def label(self):
        return f"HBVM({self.k},{self.s})"


# build-time identity checks; exact in exact arithmetic
_SELF_CHECK_TOL = 1e-12


def build_tableau(k, s):
    """Assemble HBVM(k, s) data and verify its defining identities."""
    if isinstance(s, bool) or int(s) != s or s < 1:
        raise ConfigurationError(f"s must be a positive integer, got {s!r}")
    if int(k) != k or k < s:
        raise ConfigurationError(f"HBVM needs k >= s, got k={k!r}, s={s!r}")
    k, s = int(k), int(s)
    c, bw = gauss_legendre(k)
    Ps = np.column_stack([legendre_shifted(j, c) for j in range(s)])
    Is = np.column_stack([legendre_shifted_integral(j, c) for j in range(s)])
    Xs = (Ps.T * bw) @ Is

    Xc, xi = xs_closed_form(s)
    if np.max(np.abs(Xs - Xc)) > _SELF_CHECK_TOL:
        raise ArithmeticError(f"X_s identity violated for k={k}, s={s}")
    e1 = np.zeros(s)
    e1[0] = 1.0
    if np.max(np.abs(Ps.T @ bw - e1)) > _SELF_CHECK_TOL:
        raise ArithmeticError(f"P_s^T Omega e = e_1 violated for k={k}, s={s}")

    rho_s = float(np.min(np.abs(np.linalg.eigvals(Xs))))
    arrays = dict(c=c, bw=bw, Ps=Ps, Is=Is, Omega=np.diag(bw), Xs=Xs, Xs_inv=np.linalg.inv(Xs), xi=xi)
    for v in arrays.values():
        v.setflags(write=False)
    return HbvmTableau(k=k, s=s, rho_s=rho_s, **arrays)


def butcher_A(tableau):
    """Runge-Kutta matrix I_s P_s^T Omega (k x k)."""
    return tableau.Is @ tableau.PtO


def spectral_k(s):
    """Stage count used when HBVM(k, s) serves as a spectral method in time."""
    return max(20, s + 2)

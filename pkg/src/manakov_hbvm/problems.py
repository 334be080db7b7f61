"""Built-in Manakov test problems."""

import numpy as np

from .exceptions import ConfigurationError
from .manakov_system import ManakovProblem

__all__ = ["problem_manakov1", "problem_manakov2", "zero_field", "get_problem", "BUILTIN"]


def problem_manakov1(sigma=1.0, e=2.0 / 3.0, a0=0.3, b0=0.3, c0=0.3 * np.sqrt(2.0),
                     ell=0.5, eps=0.1, theta=9.0 * np.pi / 4.0, T=100.0):
    """Three weakly modulated plane waves on [-4 pi, 4 pi], beta = I.

    With the default amplitudes the first two components carry equal mass,
    half that of the third.
    """

    def psi0(x):
        x = np.asarray(x, dtype=float)
        return np.array([
            a0 * (1.0 - eps * np.cos(ell * x)),
            b0 * (1.0 - eps * np.cos(ell * (x + theta))),
            c0 * (1.0 - eps * np.cos(ell * x)),
        ], dtype=complex)

    gamma = np.array([[sigma, e, sigma], [e, sigma, e], [sigma, e, sigma]])
    return ManakovProblem(beta=np.ones(3), gamma=gamma, a=-4 * np.pi, b=4 * np.pi, T=T,
                          psi0=psi0, name="manakov1")


def problem_manakov2(e=2.0 / 3.0, alpha=(1.0, 0.6, 0.3), v=(1.0, 0.1, -1.0),
                     centers=(0.0, 22.0, 50.0), a=-20.0, b=85.0, T=40.0):
    """Three sech-shaped solitons travelling with velocities ``v`` on [-20, 85]."""
    alpha = np.asarray(alpha, dtype=float)
    v = np.asarray(v, dtype=float)
    centers = np.asarray(centers, dtype=float)

    def psi0(x):
        x = np.asarray(x, dtype=float)
        xi = x[None, :] - centers[:, None]
        amp = np.sqrt(2.0 * alpha / (1.0 + e))[:, None]
        return amp / np.cosh(np.sqrt(2.0 * alpha)[:, None] * xi) * np.exp(1j * v[:, None] * xi)

    return ManakovProblem(beta=0.5 * np.ones(3), gamma=(1.0 + e) * np.ones((3, 3)), a=a, b=b, T=T,
                          psi0=psi0, name="manakov2")


def zero_field(problem):
    """Copy of ``problem`` with psi0 = 0."""
    n = problem.n
    return ManakovProblem(beta=problem.beta, gamma=problem.gamma, a=problem.a, b=problem.b,
                          T=problem.T, psi0=lambda x: np.zeros((n, np.size(x)), dtype=complex),
                          name=problem.name + "-zero")


BUILTIN = {"manakov1": problem_manakov1, "manakov2": problem_manakov2}


def get_problem(name, T=None, zero=False):
    try:
        factory = BUILTIN[name]
    except KeyError:
        raise ConfigurationError(f"unknown problem {name!r}; choose from {sorted(BUILTIN)}") from None
    problem = factory() if T is None else factory(T=T)
    return zero_field(problem) if zero else problem

"""
Fourier basis and exact quadrature
==================================

The spatial discretization uses the real orthonormal Fourier basis on [a, b]
and an equispaced rule with m = 4N + 1 nodes.  That rule integrates every
trigonometric polynomial of degree at most 4N exactly, which covers the
quartic nonlinearity of the Hamiltonian.
"""

import numpy as np

from manakov_hbvm import build_basis, build_diff, project, synthesize
from manakov_hbvm.fourier_space import quadrature

N = 6
basis = build_basis(N, -np.pi, 2.0)
print("basis size", basis.size, "nodes", basis.m)
print("d_j =", np.round(basis.d, 4))

# Discrete orthonormality of the sampled basis
G = basis.W.T @ (basis.wq * basis.W)
print("max |W^T diag(wq) W - I| =", np.abs(G - np.eye(basis.size)).max())

# A degree-N trigonometric polynomial, its coefficients and its derivative
L = basis.length
f = lambda x: 1.0 + np.sin(2 * np.pi * 3 * (x - basis.a) / L) - 0.5 * np.cos(2 * np.pi * (x - basis.a) / L)
c = project(basis, f(basis.nodes))
dm = build_diff(basis)
xs = np.linspace(basis.a, basis.b, 7)
fx = synthesize(basis, c @ dm.Dtilde, xs)
exact = (2 * np.pi / L) * (3 * np.cos(2 * np.pi * 3 * (xs - basis.a) / L)
                           + 0.5 * np.sin(2 * np.pi * (xs - basis.a) / L))
print("derivative error:", np.abs(fx - exact).max())

# The fourth power has degree 4N and is still integrated exactly
fine = build_basis(N, basis.a, basis.b, m=2001)
u4 = quadrature(basis, f(basis.nodes) ** 4)
u4_fine = quadrature(fine, f(fine.nodes) ** 4)
print(f"int f^4: m = {basis.m}: {u4:.15f}, m = {fine.m}: {u4_fine:.15f}")

"""
HBVM as a spectral method in time
=================================

With s large and k = max(20, s + 2) the polynomial approximation in each
step is accurate to round-off, so a step of h = 1 reproduces a reference
computed with a four times smaller step.  The blended iteration keeps the
cost per step close to that of a low-order method.

The ratio ||Gamma_{s-1}|| / max_{i<s} ||Gamma_i|| is logged at every step;
values above sqrt(eps) indicate that s is too small for the chosen h.
"""

import numpy as np

from manakov_hbvm import build_basis, problem_manakov1, reference_trajectory, spectral_time_run

problem = problem_manakov1(T=20.0)
basis = build_basis(70, problem.a, problem.b)

ref = reference_trajectory(problem, basis, sample_h=1.0, h=0.25)
tr = spectral_time_run(problem, basis, s=10, h=1.0, reference=ref)
err = tr.invariant_errors()
print(f"{tr.method}, h = 1: e_y = {tr.e_y:.2e}, e_H = {err['e_H']:.1e}, e_K = {err['e_K']:.1e}, "
      f"e_M = {err['e_M']:.1e}")
print("blended iterations per step:", tr.blended_iterations / tr.rank_ratios.size)
print("largest Gamma decay ratio:", np.nanmax(tr.rank_ratios), "flagged steps:", tr.rank_flags)

# Too small a degree for the same step: the monitor flags every step
low = spectral_time_run(problem, basis, s=4, h=1.0, k=20, reference=ref)
print(f"{low.method}: e_y = {low.e_y:.2e}, flagged steps: {low.rank_flags} of {low.rank_ratios.size}")

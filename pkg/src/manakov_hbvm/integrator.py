"""Time stepping with HBVM(k, s), invariant monitoring and error studies."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, SolverError
from .hbvm_tableau import build_tableau, spectral_k
from .manakov_system import InvariantRecord, initial_state, invariants, pad_state
from .stage_solver import advance, blended_solve, build_theta, fixed_point_solve

__all__ = [
    "IntegrationConfig",
    "Trajectory",
    "ConvergenceRow",
    "integrate",
    "reference_trajectory",
    "symmetry_probe",
    "convergence_study",
    "observed_rates",
    "spectral_time_run",
]

TOL_RANK = math.sqrt(np.finfo(float).eps)


@dataclass
class IntegrationConfig:
    """Controls for :func:`integrate`.

    ``steps`` defaults to round(T/h), where T is ``T`` if given and the
    problem's horizon otherwise; steps * h must reproduce T to 1e-12
    relative.  States are kept every ``state_every`` steps when
    ``store_states`` is set (defaults to ``record_every``).
    """

    h: float
    T: float = None
    steps: int = None
    record_every: int = 1
    solver: str = "blended"
    tol: float = 1e-13
    max_iter: int = 100
    spectral_check: bool = False
    tol_rank: float = TOL_RANK
    store_states: bool = False
    state_every: int = None
    warm_start: bool = False

    def resolve_steps(self, T):
        T = self.T if self.T is not None else T
        if not self.h > 0:
            raise ConfigurationError(f"h must be positive, got {self.h}")
        steps = self.steps if self.steps is not None else int(round(T / self.h))
        if steps < 1 or abs(steps * self.h - T) > 1e-12 * T:
            raise ConfigurationError(f"h = {self.h} does not divide T = {T}")
        if self.record_every < 1:
            raise ConfigurationError("record_every must be >= 1")
        if self.solver not in ("blended", "fixed_point"):
            raise ConfigurationError(f"unknown solver {self.solver!r}")
        return steps


@dataclass
class Trajectory:
    """Sampled invariants (and optionally states) of one integration."""

    method: str
    h: float
    N: int
    times: np.ndarray
    masses: np.ndarray
    M: np.ndarray
    K: np.ndarray
    H: np.ndarray
    final_state: np.ndarray
    state_times: np.ndarray = None
    states: np.ndarray = None
    blended_iterations: int = 0
    max_residual: float = 0.0
    rank_ratios: np.ndarray = None
    rank_flags: int = 0
    e_y: float = None
    wall_seconds: float = 0.0
    converged: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def invariant_log(self):
        return [
            InvariantRecord(masses=self.masses[i], M=self.M[i], K=self.K[i], H=self.H[i])
            for i in range(self.times.size)
        ]

    def invariant_errors(self):
        """Absolute drifts from the t = 0 values, maximized over the samples."""
        return {
            "e_H": float(np.max(np.abs(self.H - self.H[0]))),
            "e_K": float(np.max(np.abs(self.K - self.K[0]))),
            "e_M": float(np.max(np.abs(self.M - self.M[0]))),
            "e_i": np.max(np.abs(self.masses - self.masses[0]), axis=0),
        }

    def error_series(self):
        """Per-sample absolute drifts, shape (len(times),) each (and (len(times), n) for masses)."""
        return {
            "eH": np.abs(self.H - self.H[0]),
            "eK": np.abs(self.K - self.K[0]),
            "eM": np.abs(self.M - self.M[0]),
            "ei": np.abs(self.masses - self.masses[0]),
        }


def _reference_lookup(reference, h, steps):
    """Map step index -> reference state index for coinciding sample times."""
    if reference is None:
        return {}
    if reference.states is None:
        raise ConfigurationError("reference trajectory has no stored states")
    out = {}
    for idx, t in enumerate(reference.state_times):
        j = t / h
        r = round(j)
        if abs(j - r) <= 1e-9 * max(1.0, j) and 0 <= r <= steps:
            out[int(r)] = idx
    if not out:
        raise ConfigurationError("reference samples do not coincide with any step")
    return out


def _compare(y, yref, N):
    """Solution error; the coarser state is zero-padded into the finer basis."""
    Nref = (yref.shape[-1] - 1) // 2
    if Nref > N:
        y = pad_state(y, Nref)
    elif Nref < N:
        yref = pad_state(yref, N)
    return float(np.max(np.abs(y - yref)))


def integrate(problem, basis, tableau, config, y0=None, reference=None, theta=None):
    """Integrate the semi-discrete system over [0, T] with HBVM(k, s).

    Parameters
    ----------
    problem, basis, tableau
        Model, spatial discretization and time-stepping method.
    config : IntegrationConfig
    y0 : ndarray, optional
        Initial state; defaults to the projection of ``problem.psi0``.
    reference : Trajectory, optional
        Trajectory with stored states; ``e_y`` of the result is the largest
        solution error over the times both trajectories share.
    theta : ThetaOperator, optional
        Prebuilt weighting operator for the blended solver.

    Raises
    ------
    SolverError
        A stage solve did not converge, or the state became non-finite.
    """
    steps = config.resolve_steps(problem.T)
    h = config.h
    y = initial_state(problem, basis) if y0 is None else np.array(y0, dtype=float)
    if config.solver == "blended" and theta is None:
        theta = build_theta(h, tableau, problem, basis)
    ref_at = _reference_lookup(reference, h, steps)
    state_every = config.state_every or config.record_every

    nrec = steps // config.record_every + 1
    times = np.empty(nrec)
    masses = np.empty((nrec, problem.n))
    M, K, H = np.empty(nrec), np.empty(nrec), np.empty(nrec)
    state_times, states = [], []
    rank = np.full(steps, np.nan) if config.spectral_check else None

    def record(i, step, y):
        inv = invariants(y, problem, basis)
        times[i] = step * h
        masses[i] = inv.masses
        M[i], K[i], H[i] = inv.M, inv.K, inv.H

    record(0, 0, y)
    if config.store_states:
        state_times.append(0.0)
        states.append(y.copy())
    e_y = 0.0 if ref_at else None
    if 0 in ref_at:
        e_y = _compare(y, reference.states[ref_at[0]], basis.N)

    total_iters = 0
    max_res = 0.0
    flags = 0
    G = None
    t0 = time.perf_counter()
    for step in range(1, steps + 1):
        if config.solver == "blended":
            G, rep = blended_solve(y, h, tableau, theta, problem, basis, config.tol, config.max_iter,
                                   Gamma0=G if config.warm_start else None)
        else:
            G, rep = fixed_point_solve(y, h, tableau, problem, basis, config.tol, config.max_iter)
        total_iters += rep.iterations
        max_res = max(max_res, rep.final_residual)
        if not rep.converged:
            raise SolverError(
                f"{tableau.label} stage solve failed at step {step} (t = {step * h:g}): "
                f"residual {rep.final_residual:.3e} after {rep.iterations} iterations",
                step=step, report=rep,
            )
        y = advance(y, G, h)
        if not np.all(np.isfinite(y)):
            raise SolverError(f"non-finite state at step {step}", step=step, report=rep)
        if rank is not None:
            rank[step - 1] = rep.rank_ratio
            if rep.rank_ratio > config.tol_rank:
                flags += 1
        if step % config.record_every == 0:
            record(step // config.record_every, step, y)
        if config.store_states and step % state_every == 0:
            state_times.append(step * h)
            states.append(y.copy())
        if step in ref_at:
            e_y = max(e_y, _compare(y, reference.states[ref_at[step]], basis.N))
    wall = time.perf_counter() - t0

    return Trajectory(
        method=tableau.label, h=h, N=basis.N,
        times=times, masses=masses, M=M, K=K, H=H, final_state=y,
        state_times=np.array(state_times) if config.store_states else None,
        states=np.array(states) if config.store_states else None,
        blended_iterations=total_iters, max_residual=max_res,
        rank_ratios=rank, rank_flags=flags, e_y=e_y, wall_seconds=wall,
    )


def reference_trajectory(problem, basis, sample_h, h=None, k=20, s=10, T=None, tol=1e-13, max_iter=100):
    """High-accuracy trajectory with states stored every ``sample_h``.

    Defaults to HBVM(20, 10) with stepsize sample_h / 4, which is spectrally
    accurate in time for the built-in problems.
    """
    if h is None:
        h = sample_h / 4.0
    ratio = sample_h / h
    if abs(ratio - round(ratio)) > 1e-9 * ratio:
        raise ConfigurationError("reference stepsize must divide the sampling interval")
    cfg = IntegrationConfig(h=h, T=T, tol=tol, max_iter=max_iter, record_every=int(round(ratio)),
                            store_states=True)
    return integrate(problem, basis, build_tableau(k, s), cfg)


def symmetry_probe(problem, basis, tableau, y0, h, tol=1e-13, max_iter=100):
    """One step forward with h and back with -h; returns max|y - y0|."""
    y0 = np.asarray(y0, dtype=float)
    G, rep = blended_solve(y0, h, tableau, build_theta(h, tableau, problem, basis), problem, basis, tol, max_iter)
    if not rep.converged:
        raise SolverError("forward step did not converge", step=1, report=rep)
    y1 = advance(y0, G, h)
    G, rep = blended_solve(y1, -h, tableau, build_theta(-h, tableau, problem, basis), problem, basis, tol, max_iter)
    if not rep.converged:
        raise SolverError("backward step did not converge", step=2, report=rep)
    return float(np.max(np.abs(advance(y1, G, -h) - y0)))


@dataclass
class ConvergenceRow:
    method: str
    h: float
    e_y: float
    rate: float = None
    trajectory: Trajectory = field(default=None, repr=False)


def observed_rates(hs, errs):
    """log(e_{i-1}/e_i) / log(h_{i-1}/h_i); None for the first entry."""
    rates = [None]
    for i in range(1, len(errs)):
        if errs[i] > 0 and errs[i - 1] > 0:
            rates.append(math.log(errs[i - 1] / errs[i]) / math.log(hs[i - 1] / hs[i]))
        else:
            rates.append(None)
    return rates


def convergence_study(problem, basis, methods, h_list, reference=None, tol=1e-13, max_iter=100, T=None):
    """Solution errors and observed orders of HBVM(k, s) over a stepsize ladder.

    ``methods`` is a sequence of (k, s) pairs.  Without an explicit
    ``reference`` trajectory one is computed with HBVM(20, 10) at
    min(h_list)/4, sampled every min(h_list).
    """
    h_list = list(h_list)
    if reference is None:
        reference = reference_trajectory(problem, basis, min(h_list), T=T, tol=tol, max_iter=max_iter)
    rows = []
    for k, s in methods:
        tab = build_tableau(k, s)
        errs = []
        method_rows = []
        for h in h_list:
            tr = integrate(problem, basis, tab, IntegrationConfig(h=h, T=T, tol=tol, max_iter=max_iter),
                           reference=reference)
            errs.append(tr.e_y)
            method_rows.append(ConvergenceRow(method=tab.label, h=h, e_y=tr.e_y, trajectory=tr))
        for row, rate in zip(method_rows, observed_rates(h_list, errs)):
            row.rate = rate
        rows.extend(method_rows)
    return rows


def spectral_time_run(problem, basis, s, h, k=None, reference=None, **config):
    """HBVM(max(20, s+2), s) run with the per-step Gamma decay monitor enabled."""
    k = spectral_k(s) if k is None else k
    cfg = IntegrationConfig(h=h, spectral_check=True, **config)
    return integrate(problem, basis, build_tableau(k, s), cfg, reference=reference)

"""Time discretization of the competition system.

Two structure-preserving schemes advance (f, R):

  semi-implicit   f'_j = f_j / (1 - dt*G_j(R)),  then
                  R'_k = (R_k + dt*m_k*Rstar_k) / (1 + dt*m_k + dt*h*sum_j K_jk f'_j)

  fully implicit  the same update applied with R' inside G, solved by a
                  fixed-point sweep on R that starts from the current R.

Both keep f nonnegative and R positive whenever every denominator
1 - dt*G_j stays positive; dt below the derived bound mu0 guarantees that.
The fully implicit scheme additionally dissipates the relative entropy
against the ESD at a quantified per-step rate.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import FixedPointDiverged, Mu0Violation, StepRejected, UndefinedEntropy
from .esd import EsdResult
from .model import (
    Diagnostics,
    DerivedConstants,
    ModelParams,
    State,
    compute_diagnostics,
    growth_rate,
    lyapunov_S,
    validate_params,
)


class Scheme(enum.Enum):
    SEMI_IMPLICIT = "semi"
    FULLY_IMPLICIT = "implicit"


@dataclass(frozen=True)
class StepConfig:
    """Time-stepping configuration.

    fp_tol / fp_maxit control the fixed-point sweep of the implicit scheme;
    enforce_mu0 turns the sufficient step bound from a warning into an error.
    """

    dt: float
    scheme: Scheme = Scheme.SEMI_IMPLICIT
    fp_tol: float = 1e-12
    fp_maxit: int = 200
    enforce_mu0: bool = False

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        if not (self.fp_tol > 0):
            raise ValueError("fp_tol must be positive")
        if self.fp_maxit < 1:
            raise ValueError("fp_maxit must be at least 1")


@dataclass
class Trajectory:
    """Recorded time series: state and diagnostics at t=0 and after each step."""

    params: ModelParams
    times: list[float] = field(default_factory=list)
    states: list[State] = field(default_factory=list)
    diagnostics: list[Diagnostics] = field(default_factory=list)
    scheme_used: StepConfig | None = None
    fp_iteration_counts: list[int] = field(default_factory=list)

    @property
    def final_state(self) -> State:
        return self.states[-1]

    def f_matrix(self) -> np.ndarray:
        return np.array([s.f for s in self.states])

    def R_matrix(self) -> np.ndarray:
        return np.array([s.R for s in self.states])


@dataclass(frozen=True)
class EntropyTrace:
    """Per-step relative entropy against an ESD and its dissipation bound.

    bounds[n] is the guaranteed (nonpositive) bound on S[n+1] - S[n] for the
    fully implicit scheme; flagged_steps lists the step indices where the
    recorded decrement exceeded the bound beyond floating round-off.
    """

    times: np.ndarray
    S: np.ndarray
    bounds: np.ndarray
    flagged_steps: tuple[int, ...]


def max_stable_dt(constants: DerivedConstants) -> float:
    """Largest step with guaranteed positivity; math.inf when unconstrained."""
    return constants.mu0


def _new_f(params: ModelParams, f: np.ndarray, R: np.ndarray, dt: float) -> np.ndarray:
    denom = 1.0 - dt * growth_rate(params, R)
    if np.any(denom <= 0):
        j = int(np.flatnonzero(denom <= 0)[0])
        raise StepRejected(
            f"nonpositive update denominator for species {j} "
            f"(dt*G = {dt * growth_rate(params, R)[j]:.6g} >= 1); reduce dt"
        )
    return f / denom


def _new_R(params: ModelParams, R: np.ndarray, f_new: np.ndarray, dt: float) -> np.ndarray:
    num = R + dt * params.m * params.Rstar
    den = 1.0 + dt * params.m + dt * params.h * (params.K.T @ f_new)
    return num / den


def step_semi_implicit(params: ModelParams, state: State, dt: float) -> State:
    """One semi-implicit step: f update uses the current resources."""
    f_new = _new_f(params, state.f, state.R, dt)
    return State(f=f_new, R=_new_R(params, state.R, f_new, dt))


def step_fully_implicit(
    params: ModelParams,
    state: State,
    dt: float,
    fp_tol: float = 1e-12,
    fp_maxit: int = 200,
) -> tuple[State, int]:
    """One fully implicit step solved by fixed-point sweeps.

    Starting from the current resources, alternate the closed-form f and R
    updates until successive resource iterates agree to fp_tol in the max
    norm. Returns the new state and the number of sweeps performed.
    """
    R_iter = state.R
    for sweep in range(1, fp_maxit + 1):
        f_new = _new_f(params, state.f, R_iter, dt)
        R_new = _new_R(params, state.R, f_new, dt)
        if float(np.max(np.abs(R_new - R_iter))) <= fp_tol:
            return State(f=f_new, R=R_new), sweep
        R_iter = R_new
    raise FixedPointDiverged(
        f"fixed-point iteration did not contract within {fp_maxit} sweeps "
        f"(last update {float(np.max(np.abs(R_new - R_iter))):.3e})"
    )


def _plan_steps(T_final: float, dt: float) -> list[float]:
    """Uniform steps of dt, shrinking the last one so the sum is T_final."""
    n_exact = T_final / dt
    n_round = round(n_exact)
    if n_round >= 1 and abs(n_exact - n_round) <= 1e-9 * n_round:
        return [dt] * n_round
    n_full = int(math.floor(n_exact))
    steps = [dt] * n_full
    rem = T_final - n_full * dt
    if rem > 1e-12 * dt:
        steps.append(rem)
    return steps


def simulate(
    params: ModelParams,
    state0: State,
    T_final: float,
    config: StepConfig,
    reference: State | None = None,
) -> Trajectory:
    """Advance state0 to T_final, recording states and diagnostics.

    The entropy diagnostic S is recorded only when a reference state is
    supplied (and defined). Any loss of nonnegativity/positivity aborts with
    the failing step index.
    """
    constants = validate_params(params, state0)
    if math.isfinite(constants.mu0) and config.dt >= constants.mu0:
        msg = (
            f"dt = {config.dt:.6g} exceeds the guaranteed-stable bound "
            f"mu0 = {constants.mu0:.6g}"
        )
        if config.enforce_mu0:
            raise Mu0Violation(msg)
        warnings.warn(msg + "; proceeding (the bound is sufficient, not necessary)",
                      stacklevel=2)

    traj = Trajectory(params=params, scheme_used=config)
    t = 0.0
    state = state0
    traj.times.append(t)
    traj.states.append(state)
    traj.diagnostics.append(compute_diagnostics(params, state, reference))

    for i, dt in enumerate(_plan_steps(T_final, config.dt)):
        try:
            if config.scheme is Scheme.FULLY_IMPLICIT:
                state, sweeps = step_fully_implicit(
                    params, state, dt, config.fp_tol, config.fp_maxit
                )
                traj.fp_iteration_counts.append(sweeps)
            else:
                state = step_semi_implicit(params, state, dt)
        except (StepRejected, FixedPointDiverged) as err:
            err.step_index = i
            raise
        if (
            np.any(state.f < 0)
            or np.any(state.R <= 0)
            or not np.all(np.isfinite(state.f))
            or not np.all(np.isfinite(state.R))
        ):
            raise StepRejected(f"invalid state after step {i}", step_index=i)
        t += dt
        traj.times.append(t)
        traj.states.append(state)
        traj.diagnostics.append(compute_diagnostics(params, state, reference))
    return traj


def entropy_trace(trajectory: Trajectory, esd: EsdResult) -> EntropyTrace:
    """Relative entropy along a trajectory with its per-step decay bound.

    bounds[n] = -dt_n * sum_k m_k Rstar_k (R_k^{n+1} - Rt_k)^2 / (R_k^{n+1} Rt_k).
    Steps of a fully implicit trajectory whose entropy increment exceeds the
    bound by more than 1e-10 * (1 + |S^n|) are flagged; the bound is not
    asserted for semi-implicit trajectories.
    """
    if trajectory.scheme_used is None or not trajectory.states:
        raise ValueError("trajectory must carry its step configuration and states")
    reference = State(f=esd.f_tilde, R=esd.R_tilde)
    params = trajectory.params
    S = np.array([lyapunov_S(s, reference) for s in trajectory.states])
    times = np.asarray(trajectory.times)
    n_steps = len(times) - 1
    bounds = np.empty(n_steps)
    for n in range(n_steps):
        dt = times[n + 1] - times[n]
        R1 = trajectory.states[n + 1].R
        bounds[n] = -dt * float(
            np.sum(params.m * params.Rstar * (R1 - esd.R_tilde) ** 2 / (R1 * esd.R_tilde))
        )
    flagged: tuple[int, ...] = ()
    if trajectory.scheme_used.scheme is Scheme.FULLY_IMPLICIT:
        slack = 1e-10 * (1.0 + np.abs(S[:-1]))
        bad = np.flatnonzero(np.diff(S) > bounds + slack)
        flagged = tuple(int(i) for i in bad)
    return EntropyTrace(times=times, S=S, bounds=bounds, flagged_steps=flagged)

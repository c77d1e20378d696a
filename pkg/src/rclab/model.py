"""Core model data types and evaluations for the resource-competition system.

The system couples N species abundances f_j to N resource levels R_k:

    df_j/dt = f_j * G_j(R),          G_j(R) = a_j + h * sum_k K_jk (R_k - Rstar_k)
    dR_k/dt = m_k (Rstar_k - R_k) - h R_k * sum_j K_jk f_j

The effective net rates a*_j = a_j - h * sum_k K_jk Rstar_k must all be
strictly negative; gamma = -max_j a*_j measures the margin. The module also
evaluates the convex objective

    H(f) = -sum_j a*_j f_j - sum_k m_k Rstar_k ln(m_k + h sum_j K_jk f_j)

whose minimizer over f >= 0 is the evolutionarily stable distribution, plus
its gradient and Hessian (in factored form), and the diagnostic functionals
used to monitor trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AssumptionViolation,
    DimensionMismatch,
    NegativeInput,
    UndefinedEntropy,
)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ModelParams:
    """One instance of the competition system.

    N: number of traits (species and resources share the grid size)
    h: trait-cell width / resource weight
    a: intrinsic growth rates, shape (N,)
    K: consumption probabilities, shape (N, N); K[j, k] couples species j
       to resource k
    m: resource relaxation rates, shape (N,)
    Rstar: resource carrying capacities, shape (N,)
    """

    N: int
    h: float
    a: np.ndarray
    K: np.ndarray
    m: np.ndarray
    Rstar: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _freeze(self.a))
        object.__setattr__(self, "K", _freeze(self.K))
        object.__setattr__(self, "m", _freeze(self.m))
        object.__setattr__(self, "Rstar", _freeze(self.Rstar))

    def a_star(self) -> np.ndarray:
        """Net rates a* = a - h * K @ Rstar; validation requires these < 0."""
        return self.a - self.h * self.K @ self.Rstar


@dataclass(frozen=True)
class State:
    """Species abundances f >= 0 and resource levels R > 0 at one instant."""

    f: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _freeze(self.f))
        object.__setattr__(self, "R", _freeze(self.R))


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from validated model data and the initial state.

    beta = min(gamma, min_k m_k) is the uniform decay rate of the total
    mass surplus; M_tilde = M0 + max_k m_k * ||Rstar||_1 / beta bounds the
    total mass of every discrete trajectory; mu0 = 1 / (K_M * M_tilde -
    gamma)_+ is a sufficient step bound for positivity of the implicit
    scheme (math.inf when the positive part vanishes).
    """

    gamma: float
    K_M: float
    m_lower: float
    m_upper: float
    beta: float
    M0: float
    M_tilde: float
    mu0: float
    C_R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C_R", _freeze(self.C_R))


@dataclass(frozen=True)
class Diagnostics:
    """Scalar trajectory diagnostics; S is None when no reference applies."""

    mass: float
    S: float | None
    Q: float
    F: float
    H: float


def _check_dims(params: ModelParams, *vectors: np.ndarray) -> None:
    n = params.N
    if params.a.shape != (n,) or params.m.shape != (n,) or params.Rstar.shape != (n,):
        raise DimensionMismatch(f"coefficient vectors must have shape ({n},)")
    if params.K.shape != (n, n):
        raise DimensionMismatch(f"K must have shape ({n}, {n}), got {params.K.shape}")
    for v in vectors:
        if v.shape != (n,):
            raise DimensionMismatch(f"expected shape ({n},), got {v.shape}")


def validate_params(params: ModelParams, initial: State) -> DerivedConstants:
    """Check the standing assumptions and return all derived constants.

    Raises AssumptionViolation naming the failing condition, or
    DimensionMismatch for shape errors.
    """
    if params.N < 1:
        raise AssumptionViolation(f"N must be a positive integer, got {params.N}")
    _check_dims(params, initial.f, initial.R)
    if not (params.h > 0 and math.isfinite(params.h)):
        raise AssumptionViolation(f"h must be positive and finite, got {params.h}")
    if not np.all(np.isfinite(params.a)):
        raise AssumptionViolation("growth rates a must be finite")
    if not np.all(np.isfinite(params.K)):
        raise AssumptionViolation("consumption matrix K must be finite")
    if np.any(params.K < 0):
        j, k = np.argwhere(params.K < 0)[0]
        raise AssumptionViolation(f"K[{j}][{k}] = {params.K[j, k]} is negative")
    if not np.all(np.isfinite(params.m)) or np.any(params.m <= 0):
        raise AssumptionViolation("relaxation rates m must be positive and finite")
    if not np.all(np.isfinite(params.Rstar)) or np.any(params.Rstar <= 0):
        raise AssumptionViolation("carrying capacities Rstar must be positive and finite")

    astar = params.a_star()
    gamma = float(-np.max(astar))
    if gamma <= 0:
        j = int(np.argmax(astar))
        raise AssumptionViolation(
            f"net rate a*[{j}] = {astar[j]:.6g} is not negative; "
            "every a_j - h*sum_k K_jk*Rstar_k must be < 0"
        )

    if np.any(initial.f < 0):
        raise AssumptionViolation("initial species abundances must be nonnegative")
    if np.any(initial.R <= 0):
        raise AssumptionViolation("initial resource levels must be positive")
    if not (np.all(np.isfinite(initial.f)) and np.all(np.isfinite(initial.R))):
        raise AssumptionViolation("initial state must be finite")

    K_M = float(np.max(params.K)) if params.N > 0 else 0.0
    m_lower = float(np.min(params.m))
    m_upper = float(np.max(params.m))
    beta = min(gamma, m_lower)
    M0 = float(np.sum(initial.f) + np.sum(initial.R))
    M_tilde = M0 + m_upper * float(np.sum(params.Rstar)) / beta
    denom = K_M * M_tilde - gamma
    mu0 = math.inf if denom <= 0 else 1.0 / denom
    C_R = np.maximum(params.Rstar, initial.R)
    return DerivedConstants(
        gamma=gamma,
        K_M=K_M,
        m_lower=m_lower,
        m_upper=m_upper,
        beta=beta,
        M0=M0,
        M_tilde=M_tilde,
        mu0=mu0,
        C_R=C_R,
    )


def growth_rate(params: ModelParams, R: np.ndarray) -> np.ndarray:
    """Per-capita growth G_j = a_j + h * sum_k K_jk (R_k - Rstar_k)."""
    R = np.asarray(R, dtype=float)
    _check_dims(params, R)
    return params.a + params.h * params.K @ (R - params.Rstar)


def rhs(params: ModelParams, state: State) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand sides (df/dt, dR/dt) of the coupled system."""
    _check_dims(params, state.f, state.R)
    G = growth_rate(params, state.R)
    df = state.f * G
    dR = params.m * (params.Rstar - state.R) - params.h * state.R * (params.K.T @ state.f)
    return df, dR


def total_mass(state: State) -> float:
    """||f||_1 + ||R||_1."""
    return float(np.sum(np.abs(state.f)) + np.sum(np.abs(state.R)))


def lyapunov_S(state: State, reference: State) -> float:
    """Relative entropy of `state` against a reference steady state.

    S = sum_j (-fr_j ln f_j + f_j) + sum_k (-Rr_k ln R_k + R_k), where
    terms with fr_j = 0 contribute only f_j. Undefined (raises) when the
    reference supports a species that is extinct in `state`, or when any
    resource level is nonpositive.
    """
    f, R = state.f, state.R
    fr, Rr = reference.f, reference.R
    support = fr > 0
    if np.any(support & (f <= 0)):
        j = int(np.flatnonzero(support & (f <= 0))[0])
        raise UndefinedEntropy(f"species {j} is extinct but the reference supports it")
    if np.any(R <= 0) or np.any(Rr <= 0):
        raise UndefinedEntropy("resource levels must be positive")
    s = float(np.sum(f)) - float(np.sum(fr[support] * np.log(f[support])))
    s += float(np.sum(R - Rr * np.log(R)))
    return s


def extinction_F(state: State, params: ModelParams) -> float:
    """Extinction functional F = -sum_k Rstar_k ln R_k + sum_j f_j + sum_k R_k.

    Non-increasing along trajectories whenever all a_j <= 0.
    """
    if np.any(state.R <= 0):
        raise UndefinedEntropy("resource levels must be positive")
    return float(
        -np.sum(params.Rstar * np.log(state.R)) + np.sum(state.f) + np.sum(state.R)
    )


def q_value(state: State, reference_R: np.ndarray) -> float:
    """Quadratic resource deviation Q = 1/2 sum_k (R_k - ref_k)^2."""
    return 0.5 * float(np.sum((state.R - reference_R) ** 2))


def _consumption(params: ModelParams, f: np.ndarray) -> np.ndarray:
    """b_k = m_k + h * sum_j K_jk f_j, the shifted resource uptake rates."""
    return params.m + params.h * (params.K.T @ f)


def H_value(params: ModelParams, f: np.ndarray) -> float:
    """Objective H(f) = -a*.f - sum_k m_k Rstar_k ln(m_k + h sum_j K_jk f_j)."""
    f = np.asarray(f, dtype=float)
    _check_dims(params, f)
    if np.any(f < 0):
        raise NegativeInput("H is evaluated on the nonnegative orthant only")
    b = _consumption(params, f)
    return float(-params.a_star() @ f - np.sum(params.m * params.Rstar * np.log(b)))


def H_gradient(params: ModelParams, f: np.ndarray) -> np.ndarray:
    """Gradient of H; component i equals -G_i(Rhat(f)) for the reconstructed
    resource levels Rhat_k = m_k Rstar_k / (m_k + h sum_j K_jk f_j)."""
    f = np.asarray(f, dtype=float)
    _check_dims(params, f)
    if np.any(f < 0):
        raise NegativeInput("H is evaluated on the nonnegative orthant only")
    b = _consumption(params, f)
    return -params.a_star() - params.h * params.K @ (params.m * params.Rstar / b)


def H_hessian(params: ModelParams, f: np.ndarray) -> np.ndarray:
    """Hessian of H in factored form M M^T with
    M_jk = h sqrt(Rstar_k m_k) / (m_k + h sum_i K_ik f_i) * K_jk;
    symmetric positive semidefinite, and definite when K is nonsingular."""
    f = np.asarray(f, dtype=float)
    _check_dims(params, f)
    if np.any(f < 0):
        raise NegativeInput("H is evaluated on the nonnegative orthant only")
    b = _consumption(params, f)
    M = params.K * (params.h * np.sqrt(params.Rstar * params.m) / b)[None, :]
    return M @ M.T


def compute_diagnostics(
    params: ModelParams, state: State, reference: State | None = None
) -> Diagnostics:
    """All scalar diagnostics at one state.

    S is computed only when a reference is supplied and defined there; Q is
    measured against the reference resources when given, else against Rstar.
    """
    ref_R = reference.R if reference is not None else params.Rstar
    s: float | None = None
    if reference is not None:
        try:
            s = lyapunov_S(state, reference)
        except UndefinedEntropy:
            s = None
    return Diagnostics(
        mass=total_mass(state),
        S=s,
        Q=q_value(state, ref_R),
        F=extinction_F(state, params),
        H=H_value(params, state.f),
    )

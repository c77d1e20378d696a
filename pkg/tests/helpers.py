"""Shared test utilities: instance generators and independent oracles."""

from __future__ import annotations

import numpy as np

from rclab import H_gradient, H_value, ModelParams, State


def n1_instance() -> tuple[ModelParams, State]:
    """Single-trait instance with closed-form stable distribution (1, 1/2)."""
    params = ModelParams(
        N=1, h=1.0, a=np.array([0.5]), K=np.array([[1.0]]),
        m=np.array([1.0]), Rstar=np.array([1.0]),
    )
    return params, State(f=np.array([1.0]), R=np.array([1.0]))


def n2_decoupled() -> ModelParams:
    """Two independent copies of the single-trait instance (diagonal K)."""
    return ModelParams(
        N=2, h=1.0, a=np.array([0.5, 0.5]), K=np.eye(2),
        m=np.ones(2), Rstar=np.ones(2),
    )


def n2_coupled() -> ModelParams:
    """Symmetric pair with kernel overlap 0.3; two-peak weights solve
    1.3/(1 + 1.3 rho) = 0.8, i.e. rho = 0.625/1.3."""
    return ModelParams(
        N=2, h=1.0, a=np.array([0.5, 0.5]),
        K=np.array([[1.0, 0.3], [0.3, 1.0]]),
        m=np.ones(2), Rstar=np.ones(2),
    )


def random_instance(rng: np.random.Generator, n_max: int = 10) -> ModelParams:
    """Random valid instance: a is built from a target net rate so the
    negativity assumption holds by construction."""
    n = int(rng.integers(1, n_max + 1))
    h = float(rng.uniform(0.1, 1.0))
    K = rng.uniform(0.0, 1.0, size=(n, n))
    m = rng.uniform(0.5, 2.0, size=n)
    Rstar = rng.uniform(0.5, 2.0, size=n)
    astar_target = rng.uniform(-2.0, -0.1, size=n)
    a = astar_target + h * K @ Rstar
    return ModelParams(N=n, h=h, a=a, K=K, m=m, Rstar=Rstar)


def random_state(rng: np.random.Generator, params: ModelParams) -> State:
    return State(
        f=rng.uniform(0.0, 3.0, size=params.N),
        R=rng.uniform(0.1, 3.0, size=params.N),
    )


def fd_gradient(params: ModelParams, f: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of H, componentwise."""
    out = np.empty(params.N)
    for i in range(params.N):
        step = eps * max(1.0, abs(f[i]))
        fp = f.copy()
        fm = f.copy()
        fp[i] += step
        fm[i] = max(0.0, fm[i] - step)  # stay feasible near the boundary
        out[i] = (H_value(params, fp) - H_value(params, fm)) / (fp[i] - fm[i])
    return out


def fd_hessian(params: ModelParams, f: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of the analytic gradient, column by column."""
    out = np.empty((params.N, params.N))
    for i in range(params.N):
        step = eps * max(1.0, abs(f[i]))
        fp = f.copy()
        fm = f.copy()
        fp[i] += step
        fm[i] = max(0.0, fm[i] - step)
        out[:, i] = (H_gradient(params, fp) - H_gradient(params, fm)) / (fp[i] - fm[i])
    return out


def support_clusters(f: np.ndarray, eps: float = 1e-8) -> int:
    """Number of contiguous runs of entries above eps."""
    on = np.asarray(f) > eps
    return int(np.sum(on[1:] & ~on[:-1]) + (1 if on[0] else 0))

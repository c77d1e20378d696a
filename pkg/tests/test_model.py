"""Model-core: validation, right-hand sides, functionals, H and derivatives."""

import math

import numpy as np
import pytest

from helpers import (
    fd_gradient,
    fd_hessian,
    n1_instance,
    random_instance,
    random_state,
)
from rclab import (
    AssumptionViolation,
    DimensionMismatch,
    H_gradient,
    H_hessian,
    H_value,
    ModelParams,
    NegativeInput,
    Scheme,
    State,
    StepConfig,
    UndefinedEntropy,
    compute_diagnostics,
    extinction_F,
    growth_rate,
    lyapunov_S,
    reconstruct_R,
    rhs,
    simulate,
    total_mass,
    validate_params,
)


class TestValidateParams:
    def test_n1_constants_match_hand_arithmetic(self):
        params, state0 = n1_instance()
        c = validate_params(params, state0)
        assert c.gamma == pytest.approx(0.5, abs=0)
        assert c.K_M == 1.0
        assert c.m_lower == 1.0 and c.m_upper == 1.0
        assert c.beta == 0.5
        assert c.M0 == 2.0
        assert c.M_tilde == 4.0
        assert c.mu0 == pytest.approx(1.0 / 3.5, rel=1e-15)
        assert np.array_equal(c.C_R, [1.0])

    def test_zero_consumption_gives_unbounded_step(self):
        params = ModelParams(
            N=2, h=1.0, a=np.array([-1.0, -1.0]), K=np.zeros((2, 2)),
            m=np.ones(2), Rstar=np.ones(2),
        )
        c = validate_params(params, State(f=np.ones(2), R=np.ones(2)))
        assert c.gamma == 1.0
        assert c.K_M == 0.0
        assert c.mu0 == math.inf
        assert c.M_tilde >= c.M0

    def test_positive_net_rate_rejected(self):
        params = ModelParams(
            N=1, h=1.0, a=np.array([0.5]), K=np.zeros((1, 1)),
            m=np.ones(1), Rstar=np.ones(1),
        )
        with pytest.raises(AssumptionViolation, match="a\\*"):
            validate_params(params, State(f=np.ones(1), R=np.ones(1)))

    def test_dimension_mismatch(self):
        params, _ = n1_instance()
        with pytest.raises(DimensionMismatch):
            validate_params(params, State(f=np.ones(2), R=np.ones(2)))

    @pytest.mark.parametrize(
        "field,value",
        [
            ("K", np.array([[-0.1]])),
            ("m", np.array([0.0])),
            ("m", np.array([np.inf])),
            ("Rstar", np.array([0.0])),
            ("Rstar", np.array([-1.0])),
            ("a", np.array([np.nan])),
        ],
    )
    def test_bad_coefficients_rejected(self, field, value):
        base = dict(N=1, h=1.0, a=np.array([-1.0]), K=np.array([[1.0]]),
                    m=np.array([1.0]), Rstar=np.array([1.0]))
        base[field] = value
        params = ModelParams(**base)
        with pytest.raises(AssumptionViolation):
            validate_params(params, State(f=np.ones(1), R=np.ones(1)))

    def test_bad_initial_state_rejected(self):
        params, _ = n1_instance()
        with pytest.raises(AssumptionViolation):
            validate_params(params, State(f=np.array([-0.1]), R=np.ones(1)))
        with pytest.raises(AssumptionViolation):
            validate_params(params, State(f=np.ones(1), R=np.array([0.0])))

    def test_nonpositive_h_rejected(self):
        params = ModelParams(N=1, h=0.0, a=np.array([-1.0]), K=np.array([[1.0]]),
                             m=np.ones(1), Rstar=np.ones(1))
        with pytest.raises(AssumptionViolation):
            validate_params(params, State(f=np.ones(1), R=np.ones(1)))

    def test_mu0_unbounded_iff_no_positive_part(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            params = random_instance(rng)
            state = State(f=rng.uniform(0, 2, params.N), R=rng.uniform(0.5, 2, params.N))
            c = validate_params(params, state)
            if c.K_M * c.M_tilde <= c.gamma:
                assert c.mu0 == math.inf
            else:
                assert math.isfinite(c.mu0) and c.mu0 > 0


class TestGrowthAndRhs:
    def test_growth_at_carrying_capacity_is_a(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            params = random_instance(rng)
            assert np.array_equal(growth_rate(params, params.Rstar), params.a)

    def test_n1_growth_at_esd_resources(self):
        params, _ = n1_instance()
        assert growth_rate(params, np.array([0.5])) == pytest.approx([0.0], abs=1e-15)

    def test_zero_consumption_growth_is_a(self):
        params = ModelParams(N=2, h=1.0, a=np.array([-1.0, -2.0]), K=np.zeros((2, 2)),
                             m=np.ones(2), Rstar=np.ones(2))
        for R in (np.array([0.3, 5.0]), np.array([2.0, 0.1])):
            assert np.array_equal(growth_rate(params, R), params.a)

    def test_rhs_zero_at_extinction_state(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            params = random_instance(rng)
            df, dR = rhs(params, State(f=np.zeros(params.N), R=params.Rstar))
            assert np.array_equal(df, np.zeros(params.N))
            assert np.array_equal(dR, np.zeros(params.N))

    def test_n1_rhs_hand_values(self):
        params, _ = n1_instance()
        df, dR = rhs(params, State(f=np.array([1.0]), R=np.array([0.5])))
        assert df == pytest.approx([0.0], abs=1e-15)
        assert dR == pytest.approx([0.0], abs=1e-15)
        df, dR = rhs(params, State(f=np.array([1.0]), R=np.array([1.0])))
        assert df == pytest.approx([0.5], abs=1e-15)
        assert dR == pytest.approx([-1.0], abs=1e-15)

    def test_total_mass(self):
        assert total_mass(State(f=np.array([1.0]), R=np.array([1.0]))) == 2.0
        assert total_mass(State(f=np.array([1.0, 2.0]), R=np.array([0.5, 0.5]))) == 4.0


class TestLyapunovS:
    def test_at_reference(self):
        s = State(f=np.array([1.0]), R=np.array([1.0]))
        assert lyapunov_S(s, s) == pytest.approx(2.0, abs=0)

    def test_zero_support_convention(self):
        ref = State(f=np.array([0.0]), R=np.array([1.0]))
        state = State(f=np.array([0.5]), R=np.array([1.0]))
        assert lyapunov_S(state, ref) == pytest.approx(1.5, abs=0)

    def test_undefined_on_extinct_supported_species(self):
        ref = State(f=np.array([1.0]), R=np.array([1.0]))
        state = State(f=np.array([0.0]), R=np.array([1.0]))
        with pytest.raises(UndefinedEntropy):
            lyapunov_S(state, ref)

    def test_nonincreasing_along_n1_implicit_trajectory(self):
        params, state0 = n1_instance()
        ref = State(f=np.array([1.0]), R=np.array([0.5]))
        traj = simulate(params, state0, 30.0,
                        StepConfig(dt=0.1, scheme=Scheme.FULLY_IMPLICIT))
        S = np.array([lyapunov_S(s, ref) for s in traj.states])
        assert np.all(np.diff(S) <= 1e-12)

    def test_eventually_nonincreasing_along_n1_semi_trajectory(self):
        params, state0 = n1_instance()
        ref = State(f=np.array([1.0]), R=np.array([0.5]))
        traj = simulate(params, state0, 30.0, StepConfig(dt=0.1))
        S = np.array([lyapunov_S(s, ref) for s in traj.states])
        assert np.all(np.diff(S)[20:] <= 1e-12)


class TestExtinctionF:
    def test_hand_values(self):
        params, _ = n1_instance()
        assert extinction_F(State(f=np.array([0.0]), R=np.array([1.0])), params) == 1.0
        assert extinction_F(State(f=np.array([1.0]), R=np.array([1.0])), params) == 2.0

    def test_nonincreasing_when_all_rates_nonpositive(self, example2):
        params, state0 = example2
        traj = simulate(params, state0, 20.0, StepConfig(dt=0.4))
        F = np.array([d.F for d in traj.diagnostics])
        assert np.all(np.diff(F) <= 1e-12)


class TestHFunction:
    def test_value_at_zero(self):
        params, _ = n1_instance()
        assert H_value(params, np.zeros(1)) == 0.0

    def test_value_at_one(self):
        params, _ = n1_instance()
        assert H_value(params, np.ones(1)) == pytest.approx(0.5 - math.log(2), rel=1e-15)

    def test_negative_input(self):
        params, _ = n1_instance()
        with pytest.raises(NegativeInput):
            H_value(params, np.array([-0.5]))
        with pytest.raises(NegativeInput):
            H_gradient(params, np.array([-0.5]))
        with pytest.raises(NegativeInput):
            H_hessian(params, np.array([-0.5]))

    def test_gradient_at_origin_is_minus_a(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            params = random_instance(rng)
            g = H_gradient(params, np.zeros(params.N))
            scale = max(1.0, float(np.max(np.abs(params.a))))
            assert np.max(np.abs(g + params.a)) <= 1e-14 * scale

    def test_n1_gradient_values(self):
        params, _ = n1_instance()
        assert H_gradient(params, np.ones(1)) == pytest.approx([0.0], abs=1e-15)

    def test_hessian_zero_for_zero_kernel(self):
        params = ModelParams(N=2, h=1.0, a=np.array([-1.0, -1.0]), K=np.zeros((2, 2)),
                             m=np.ones(2), Rstar=np.ones(2))
        assert np.array_equal(H_hessian(params, np.ones(2)), np.zeros((2, 2)))

    def test_n1_hessian_value(self):
        params, _ = n1_instance()
        assert H_hessian(params, np.ones(1))[0, 0] == pytest.approx(0.25, rel=1e-15)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            params = random_instance(rng)
            f = rng.uniform(0.0, 3.0, params.N)
            g = H_gradient(params, f)
            rel = np.max(np.abs(g - fd_gradient(params, f))) / max(1.0, np.max(np.abs(g)))
            assert rel < 1e-6

    def test_hessian_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            params = random_instance(rng)
            f = rng.uniform(0.0, 3.0, params.N)
            hess = H_hessian(params, f)
            rel = np.max(np.abs(hess - fd_hessian(params, f))) / max(
                1e-12, np.max(np.abs(hess))
            )
            assert rel < 1e-5

    def test_hessian_symmetric_and_psd(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            params = random_instance(rng)
            f = rng.uniform(0.0, 3.0, params.N)
            hess = H_hessian(params, f)
            assert np.max(np.abs(hess - hess.T)) < 1e-12
            assert np.min(np.linalg.eigvalsh(hess)) > -1e-12

    def test_gradient_is_negative_growth_at_reconstructed_resources(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            params = random_instance(rng)
            f = rng.uniform(0.0, 3.0, params.N)
            g = H_gradient(params, f)
            G = growth_rate(params, reconstruct_R(params, f))
            assert np.max(np.abs(g + G)) < 1e-12

    def test_midpoint_convexity_on_random_segments(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            params = random_instance(rng)
            x = rng.uniform(0.0, 3.0, params.N)
            y = rng.uniform(0.0, 3.0, params.N)
            mid = 0.5 * (x + y)
            assert H_value(params, mid) <= 0.5 * (
                H_value(params, x) + H_value(params, y)
            ) + 1e-12


class TestDiagnostics:
    def test_q_and_s_wiring(self):
        params, state0 = n1_instance()
        ref = State(f=np.array([1.0]), R=np.array([0.5]))
        d = compute_diagnostics(params, state0, ref)
        assert d.mass == 2.0
        assert d.Q == pytest.approx(0.5 * (1.0 - 0.5) ** 2, rel=1e-15)
        assert d.S == pytest.approx(lyapunov_S(state0, ref), rel=1e-15)
        d_plain = compute_diagnostics(params, state0)
        assert d_plain.S is None
        assert d_plain.Q == pytest.approx(0.0, abs=0)

    def test_s_none_when_undefined(self):
        params, _ = n1_instance()
        ref = State(f=np.array([1.0]), R=np.array([0.5]))
        d = compute_diagnostics(params, State(f=np.zeros(1), R=np.ones(1)), ref)
        assert d.S is None

    def test_immutability(self):
        params, state0 = n1_instance()
        with pytest.raises(ValueError):
            params.a[0] = 2.0
        with pytest.raises(ValueError):
            state0.f[0] = 2.0

    def test_rhs_dimension_check(self):
        params, _ = n1_instance()
        with pytest.raises(DimensionMismatch):
            growth_rate(params, np.ones(3))

    def test_random_states_keep_mass_nonnegative(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            params = random_instance(rng)
            state = random_state(rng, params)
            assert total_mass(state) >= 0.0

"""Local steering loop: tangent projection, linearized inversion,
quasi-Newton contraction, and endpoint differentiability."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bilinctrl.errors import (ControllabilityDefectError, DegeneracyError,
                              DomainError, NonConvergenceError)
from bilinctrl.potentials import (PiecewisePotential, dirichlet_example,
                                  half_line_step, neumann_example,
                                  periodic_example)
from bilinctrl.propagator import (ControlSignal, Propagator, SobolevNorm,
                                  StateVector, basis_state, sobolev_norm)
from bilinctrl.spectral import SpectralModel
from bilinctrl.steering import (SteeringProblem, eigensolution,
                                endpoint_derivative_check, linearized_control,
                                perturbed_target, project_tangent, steer)

DIRICHLET = SpectralModel.dirichlet()
PERIODIC = SpectralModel.periodic(1.0)
NEUMANN = SpectralModel.neumann()
HARMONIC = SpectralModel.harmonic()


def _random_state(model, N, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return StateVector(model, c)


class TestProjectTangent:
    def test_evolved_eigenmode_projects_to_zero(self):
        # [TRIVIAL]
        phi = eigensolution(DIRICHLET, 8, 1, 0.7)
        assert project_tangent(phi, 1, 0.7).norm() < 1e-15

    def test_imaginary_multiple_is_unchanged(self):
        # i phi_l(T) pairs to zero under the real inner product
        phi = eigensolution(DIRICHLET, 8, 1, 0.7).scaled(1j)
        out = project_tangent(phi, 1, 0.7)
        assert (out - phi).norm() < 1e-15

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 1000), T=st.floats(0.1, 3.0))
    def test_idempotent_and_orthogonal(self, seed, T):
        psi = _random_state(DIRICHLET, 12, seed)
        once = project_tangent(psi, 1, T)
        twice = project_tangent(once, 1, T)
        assert (twice - once).norm() < 1e-12 * max(1.0, psi.norm())
        phi = eigensolution(DIRICHLET, 12, 1, T)
        assert abs(np.real(once.inner(phi))) < 1e-12 * max(1.0, psi.norm())


class TestLinearizedControl:
    @pytest.mark.parametrize("model,mu,l,T,norm,kwargs", [
        (DIRICHLET, dirichlet_example(), 1, 0.5, SobolevNorm.H10, {}),
        (PERIODIC, periodic_example(), 0, 0.5, SobolevNorm.H1P, {}),
        (HARMONIC, half_line_step(0.3), 0, 1.05 * np.pi, SobolevNorm.HHA,
         {"a": 0.3}),
    ])
    def test_linearization_consistency(self, model, mu, l, T, norm, kwargs):
        # the returned control should reproduce the target through the
        # linearized flow itself
        # periodic windows are symmetric and therefore odd-sized
        K = {HARMONIC: 30, PERIODIC: 21}.get(model, 20)
        rng = np.random.default_rng(8)
        raw = StateVector(model, 1e-2 * (rng.standard_normal(K)
                                         + 1j * rng.standard_normal(K)))
        target = project_tangent(raw, l, T)
        v = linearized_control(target, model, mu, l, T, K)
        prop = Propagator(model, mu, K)
        xi = prop.propagate_linearized(v, l)
        err = sobolev_norm(project_tangent(xi - target, l, T), norm, **kwargs)
        scale = sobolev_norm(target, norm, **kwargs)
        assert err < 1e-6 * scale

    def test_zero_target_gives_zero_control(self):
        target = StateVector(DIRICHLET, np.zeros(10, dtype=complex))
        v = linearized_control(target, DIRICHLET, dirichlet_example(), 1,
                               0.5, 10)
        assert v.l2_norm() == 0.0

    def test_resonant_mode_is_rejected(self):
        # around l = 5 the transition family degenerates
        rng = np.random.default_rng(0)
        target = StateVector(DIRICHLET, 1e-3 * rng.standard_normal(10)
                             + 1e-3j * rng.standard_normal(10))
        with pytest.raises(DegeneracyError):
            linearized_control(project_tangent(target, 5, 0.5), DIRICHLET,
                               dirichlet_example(), 5, 0.5, 10)

    def test_vanishing_coupling_is_a_controllability_defect(self):
        # the symmetric-well coupling vanishes on infinitely many modes
        rng = np.random.default_rng(0)
        target = StateVector(NEUMANN, 1e-3 * rng.standard_normal(10)
                             + 1e-3j * rng.standard_normal(10))
        with pytest.raises(ControllabilityDefectError):
            linearized_control(project_tangent(target, 0, 0.5), NEUMANN,
                               neumann_example(), 0, 0.5, 10)


class TestSteer:
    def test_trivial_problem_converges_immediately(self):
        N = 12
        psi0 = basis_state(DIRICHLET, N, 1)
        psi1 = eigensolution(DIRICHLET, N, 1, 0.4)
        report = steer(SteeringProblem(DIRICHLET, dirichlet_example(), 1,
                                       0.4, psi0, psi1), K=N)
        assert report.converged
        assert report.iterations == 0
        assert report.control.l2_norm() == 0.0

    def test_dirichlet_contraction_to_tolerance(self):
        N = 20
        T = 0.4
        psi1 = perturbed_target(DIRICHLET, N, 1, T, delta=1e-2, seed=3)
        problem = SteeringProblem(DIRICHLET, dirichlet_example(), 1, T,
                                  basis_state(DIRICHLET, N, 1), psi1)
        report = steer(problem, K=N)
        assert report.converged
        assert report.final_error <= 1e-8
        res = report.residuals
        for a, b in zip(res[:-1], res[1:]):
            if a > 1e-12:
                assert b < 0.1 * a

    def test_periodic_contraction_to_tolerance(self):
        N = 21
        T = 0.4
        psi1 = perturbed_target(PERIODIC, N, 0, T, delta=1e-2, seed=5)
        problem = SteeringProblem(PERIODIC, periodic_example(), 0, T,
                                  basis_state(PERIODIC, N, 0), psi1)
        report = steer(problem, K=N)
        assert report.converged
        assert report.final_error <= 1e-8

    def test_final_state_keeps_unit_norm(self):
        N = 20
        T = 0.4
        psi1 = perturbed_target(DIRICHLET, N, 1, T, delta=1e-2, seed=7)
        problem = SteeringProblem(DIRICHLET, dirichlet_example(), 1, T,
                                  basis_state(DIRICHLET, N, 1), psi1)
        report = steer(problem, K=N)
        prop = Propagator(DIRICHLET, dirichlet_example(), N)
        final = prop.endpoint(basis_state(DIRICHLET, N, 1), report.control)
        assert abs(final.norm() - 1.0) < 1e-10

    def test_control_window_cannot_exceed_simulation(self):
        N = 10
        psi1 = perturbed_target(DIRICHLET, N, 1, 0.4, delta=1e-2, seed=1)
        problem = SteeringProblem(DIRICHLET, dirichlet_example(), 1, 0.4,
                                  basis_state(DIRICHLET, N, 1), psi1)
        with pytest.raises(DomainError):
            steer(problem, K=12, N=10)

    def test_report_json_is_loadable(self):
        import json
        N = 12
        psi1 = perturbed_target(DIRICHLET, N, 1, 0.4, delta=1e-2, seed=2)
        problem = SteeringProblem(DIRICHLET, dirichlet_example(), 1, 0.4,
                                  basis_state(DIRICHLET, N, 1), psi1)
        report = steer(problem, K=N)
        doc = json.loads(report.to_json())
        assert doc["converged"]
        assert len(doc["residual_h1"]) == report.iterations + 1

    def test_nonconvergence_raises_with_history(self):
        # a nearly-vanishing coupling forces enormous corrections, so the
        # frozen linearization overshoots and the residual grows
        N = 12
        T = 0.4
        psi1 = perturbed_target(DIRICHLET, N, 1, T, delta=1e-2, seed=11)
        strong = dirichlet_example()
        weak = PiecewisePotential(strong.breakpoints,
                                  tuple(tuple(1e-6 * c for c in p)
                                        for p in strong.pieces),
                                  domain="unit_interval")
        problem = SteeringProblem(DIRICHLET, weak, 1, T,
                                  basis_state(DIRICHLET, N, 1), psi1,
                                  tolerance=1e-14, max_iters=10)
        try:
            report = steer(problem, K=N)
            assert not report.converged
        except NonConvergenceError as err:
            assert len(err.history) >= 3

    def test_target_outside_delta_ball_rejected(self):
        N = 10
        psi1 = perturbed_target(DIRICHLET, N, 1, 0.4, delta=0.5, seed=1)
        with pytest.raises(DomainError):
            SteeringProblem(DIRICHLET, dirichlet_example(), 1, 0.4,
                            basis_state(DIRICHLET, N, 1), psi1, delta=1e-3)


class TestPerturbedTarget:
    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 500))
    def test_unit_norm_and_proximity(self, seed):
        psi = perturbed_target(DIRICHLET, 16, 1, 0.4, delta=1e-2, seed=seed)
        assert abs(psi.norm() - 1.0) < 1e-12
        drift = (psi - eigensolution(DIRICHLET, 16, 1, 0.4)).norm()
        assert drift <= 1e-2

    def test_seeded_reproducibility(self):
        a = perturbed_target(DIRICHLET, 16, 1, 0.4, delta=1e-2, seed=9)
        b = perturbed_target(DIRICHLET, 16, 1, 0.4, delta=1e-2, seed=9)
        assert (a - b).norm() == 0.0


class TestEndpointDerivative:
    @pytest.mark.parametrize("model,mu,l", [
        (DIRICHLET, dirichlet_example(), 1),
        (PERIODIC, periodic_example(), 0),
        (NEUMANN, neumann_example(), 0),
        (HARMONIC, half_line_step(0.3), 0),
    ])
    def test_quadratic_remainder_slope(self, model, mu, l):
        T = 0.5
        rng = np.random.default_rng(17)
        u = ControlSignal(T, 0.2 * rng.standard_normal(513))
        v = ControlSignal(T, rng.standard_normal(513))
        slope = endpoint_derivative_check(u, v, model, mu, l, T, N=32)
        assert 1.8 < slope < 2.2

    def test_horizon_mismatch_rejected(self):
        u = ControlSignal.zero(0.5, 64)
        v = ControlSignal.zero(0.7, 64)
        with pytest.raises(DomainError):
            endpoint_derivative_check(u, v, DIRICHLET, dirichlet_example(),
                                      1, 0.5)

"""Local steering of the bilinear system around an eigensolution.

Pipeline: project the error onto the tangent space of the unit sphere at the
evolved eigenmode, invert the linearized endpoint map through the moment
solver, and iterate the correction (a quasi-Newton loop with the
linearization frozen at the eigensolution).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (ControllabilityDefectError, DomainError,
                     NonConvergenceError)
from .moments import MomentProblem, solve
from .potentials import PiecewisePotential, coefficient_table
from .propagator import (DEFAULT_STEPS, ControlSignal, Propagator,
                         SobolevNorm, StateVector, basis_state,
                         default_h1_norm, sobolev_norm)
from .spectral import SpectralModel, eigenvalue, index_window

_COEFFICIENT_FLOOR = 1e-12


def eigensolution(model: SpectralModel, N: int, l: int,
                  t: float) -> StateVector:
    """The free evolution e^{-i lambda_l t} phi_l."""
    return basis_state(model, N, l).scaled(
        np.exp(-1j * eigenvalue(model, l) * t))


def project_tangent(psi: StateVector, l: int, T: float) -> StateVector:
    """Remove the real pairing against the evolved eigenmode:
    psi - Re<psi, phi_l(T)> phi_l(T)."""
    phi = eigensolution(psi.model, psi.size, l, T)
    pairing = float(np.real(psi.inner(phi)))
    return psi - phi.scaled(pairing)


def linearized_control(target: StateVector, model: SpectralModel,
                       mu: PiecewisePotential, l: int, T: float, K: int,
                       n_steps: int = DEFAULT_STEPS,
                       condition_cap: float = 1e12) -> ControlSignal:
    """Control whose linearized endpoint (around the eigensolution at mode l)
    is the given tangent-space target, built from the moment targets

        x_k = i e^{i lambda_k T} <target, phi_k> / <mu phi_l, phi_k>

    over the first K modes; tail modes carry implicit zero targets."""
    model.check_index(l)
    table = coefficient_table(mu, model, l, K)
    lam_l = eigenvalue(model, l)
    freqs, targets = [], []
    for k, b in zip(table.indices, table.values):
        if abs(b) < _COEFFICIENT_FLOOR:
            raise ControllabilityDefectError(
                f"coupling coefficient at mode {k} vanishes; the moment "
                "target is undefined", index=k)
        lam_k = eigenvalue(model, k)
        x = 1j * np.exp(1j * lam_k * T) * target.coefficient(k) / b
        freqs.append(lam_k - lam_l)
        targets.append(x)
    if all(abs(x) < 1e-15 for x in targets):
        return ControlSignal.zero(T, n_steps)
    problem = MomentProblem(T, tuple(freqs), tuple(targets))
    solution = solve(problem, condition_cap=condition_cap, n_steps=n_steps)
    return solution.control


@dataclass(frozen=True)
class SteeringProblem:
    model: SpectralModel
    mu: PiecewisePotential
    l: int
    T: float
    psi0: StateVector
    psi1: StateVector
    tolerance: float = 1e-8
    max_iters: int = 10
    delta: float = 1e-2

    def __post_init__(self):
        if self.T <= 0.0:
            raise DomainError("horizon must be positive")
        for name, psi in (("psi0", self.psi0), ("psi1", self.psi1)):
            if abs(psi.norm() - 1.0) > 1e-12:
                raise DomainError(f"{name} must have unit L2 norm")
        if (self.psi0 - basis_state(self.model, self.psi0.size,
                                    self.l)).norm() > self.delta + 1e-9:
            raise DomainError("psi0 is not within delta of the eigenmode")
        drift = (self.psi1 - eigensolution(self.model, self.psi1.size, self.l,
                                           self.T)).norm()
        if drift > self.delta + 1e-9:
            raise DomainError(
                "psi1 is not within delta of the evolved eigenmode")


@dataclass(frozen=True)
class SteeringReport:
    control: ControlSignal
    residuals: list
    converged: bool
    final_error: float
    norm: SobolevNorm

    @property
    def iterations(self) -> int:
        return len(self.residuals) - 1

    def to_json(self) -> str:
        return json.dumps({
            "iterations": list(range(len(self.residuals))),
            "residual_h1": [float(r) for r in self.residuals],
            "control_l2_norm": self.control.l2_norm(),
            "converged": self.converged,
            "final_error": self.final_error,
        }, indent=2)


def steer(problem: SteeringProblem, K: int, N: int | None = None,
          n_steps: int = DEFAULT_STEPS,
          norm: SobolevNorm | None = None) -> SteeringReport:
    """Quasi-Newton steering from psi0 to psi1 (up to the tangent
    projection) at time T.

    Each iteration simulates the current control, projects the endpoint
    mismatch to the tangent space, and adds the linearized exact control for
    that mismatch.  Residuals are measured in the model's H^1-type norm.
    Raises NonConvergenceError (with the residual history) when the residual
    grows twice in a row.
    """
    if N is None:
        N = K
    if K > N:
        raise DomainError("cannot control more modes than simulated")
    model = problem.model
    if norm is None:
        norm = default_h1_norm(model)
    prop = Propagator(model, problem.mu, N)
    window_k = index_window(model, K)
    u = ControlSignal.zero(problem.T, n_steps)
    history = []
    for _ in range(problem.max_iters):
        psi_T = prop.endpoint(problem.psi0, u)
        r = project_tangent(problem.psi1 - psi_T, problem.l, problem.T)
        res = sobolev_norm(r, norm)
        history.append(res)
        if res <= problem.tolerance:
            return SteeringReport(control=u, residuals=history,
                                  converged=True, final_error=res, norm=norm)
        if len(history) >= 3 and history[-1] > history[-2] > history[-3]:
            raise NonConvergenceError(
                "steering residual grew two iterations in a row",
                history=history)
        r_window = StateVector(model, np.asarray(
            [r.coefficient(int(k)) for k in window_k]))
        v = linearized_control(r_window, model, problem.mu, problem.l,
                               problem.T, K, n_steps=n_steps)
        u = u + v
    psi_T = prop.endpoint(problem.psi0, u)
    r = project_tangent(problem.psi1 - psi_T, problem.l, problem.T)
    res = sobolev_norm(r, norm)
    history.append(res)
    return SteeringReport(control=u, residuals=history,
                          converged=res <= problem.tolerance,
                          final_error=res, norm=norm)


def perturbed_target(model: SpectralModel, N: int, l: int, T: float,
                     delta: float, seed: int, K: int | None = None,
                     norm: SobolevNorm | None = None) -> StateVector:
    """Unit-norm target within delta (in the model's H^1-type norm) of the
    evolved eigenmode, with the perturbation in the tangent space and
    supported on the first K modes."""
    if norm is None:
        norm = default_h1_norm(model)
    if K is None:
        K = N
    rng = np.random.default_rng(seed)
    window = index_window(model, N)
    window_k = set(int(k) for k in index_window(model, K))
    coeffs = np.zeros(window.size, dtype=complex)
    for i, k in enumerate(window):
        if int(k) in window_k:
            decay = 1.0 / (1.0 + abs(int(k)))**2
            coeffs[i] = decay * (rng.standard_normal()
                                 + 1j * rng.standard_normal())
    raw = project_tangent(StateVector(model, coeffs), l, T)
    scale = delta / (2.0 * sobolev_norm(raw, norm))
    psi = eigensolution(model, N, l, T) + raw.scaled(scale)
    return psi.scaled(1.0 / psi.norm())


def endpoint_derivative_check(u: ControlSignal, v: ControlSignal,
                              model: SpectralModel, mu: PiecewisePotential,
                              l: int, T: float, N: int = 64,
                              epsilons=(1e-2, 1e-3, 1e-4)) -> float:
    """Log-log slope of e(eps) = ||Psi(u + eps v) - Psi(u) - eps P(xi(T))||
    where Psi is the projected endpoint map from phi_l and xi the
    linearization along v; a C^1 endpoint map gives slope 2."""
    if abs(u.horizon - T) > 1e-12 or abs(v.horizon - T) > 1e-12:
        raise DomainError("controls must live on the horizon T")
    prop = Propagator(model, mu, N)
    psi0 = basis_state(model, N, l)
    base = project_tangent(prop.endpoint(psi0, u), l, T)
    xi = prop.propagate_linearized(v, l, u_base=u, mode="discrete")
    dxi = project_tangent(xi, l, T)
    errs = []
    for eps in epsilons:
        shifted = project_tangent(prop.endpoint(psi0, u + v.scaled(eps)),
                                  l, T)
        errs.append((shifted - base - dxi.scaled(eps)).norm())
    errs = np.asarray(errs)
    if np.all(errs < 1e-14):
        return 2.0
    slope = np.polyfit(np.log(np.asarray(epsilons)), np.log(errs), 1)[0]
    return float(slope)

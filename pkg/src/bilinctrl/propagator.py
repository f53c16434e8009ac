"""Galerkin simulation of the bilinear Schrodinger equation.

The truncated system is c' = -i (Lambda + u(t) B) c with Lambda the diagonal
eigenvalue matrix and B the coupling matrix of the multiplication operator
psi -> mu psi.  Time stepping is Strang splitting with exact diagonal phases
and an eigendecomposed B-exponential, so every step is exactly unitary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelError, NumericError
from .integrals import panel_grid, panel_nodes, poly_exp_integral
from .potentials import (PiecewisePotential, _check_domain, _harmonic_window,
                         _trig_coefficients)
from .spectral import (ModelKind, SpectralModel, eigenvalue,
                       hermite_function_values, index_window)

DEFAULT_STEPS = 4096

_HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class StateVector:
    """Spectral coefficients over the model's standard index window."""

    model: SpectralModel
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=complex)
        if not np.all(np.isfinite(coeffs)):
            raise NumericError("non-finite state coefficients")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def size(self) -> int:
        return self.coefficients.size

    @property
    def indices(self) -> np.ndarray:
        return index_window(self.model, self.size)

    def coefficient(self, k: int) -> complex:
        pos = np.nonzero(self.indices == k)[0]
        if pos.size == 0:
            raise DomainError(f"index {k} outside the truncation window")
        return complex(self.coefficients[pos[0]])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(other.coefficients, self.coefficients))

    def __add__(self, other):
        return StateVector(self.model, self.coefficients + other.coefficients)

    def __sub__(self, other):
        return StateVector(self.model, self.coefficients - other.coefficients)

    def scaled(self, factor) -> "StateVector":
        return StateVector(self.model, factor * self.coefficients)


def basis_state(model: SpectralModel, N: int, k: int) -> StateVector:
    window = index_window(model, N)
    pos = np.nonzero(window == k)[0]
    if pos.size == 0:
        raise DomainError(f"index {k} outside the truncation window")
    coeffs = np.zeros(window.size, dtype=complex)
    coeffs[pos[0]] = 1.0
    return StateVector(model, coeffs)


@dataclass(frozen=True)
class ControlSignal:
    """Real control on a uniform time grid, optionally carried in exponential
    -sum form sum_j amp_j exp(i freq_j t) (conjugate-symmetric terms)."""

    horizon: float
    samples: np.ndarray
    parametric: tuple | None = None

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise DomainError("horizon must be positive")
        samples = np.asarray(self.samples, dtype=float)
        if samples.size < 2:
            raise DomainError("need at least two samples")
        object.__setattr__(self, "samples", samples)
        if self.parametric is not None:
            terms = tuple((float(f), complex(a)) for f, a in self.parametric)
            object.__setattr__(self, "parametric", terms)

    @property
    def n_steps(self) -> int:
        return self.samples.size - 1

    @property
    def step(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.samples.size)

    def __call__(self, t):
        if self.parametric is not None:
            return _evaluate_terms(self.parametric, t)
        tarr = np.asarray(t, dtype=float)
        out = np.interp(tarr, self.times, self.samples)
        return float(out) if np.ndim(t) == 0 else out

    def midpoint_values(self) -> np.ndarray:
        if self.parametric is not None:
            return self(self.times[:-1] + 0.5 * self.step)
        return 0.5 * (self.samples[:-1] + self.samples[1:])

    def l2_norm(self) -> float:
        """Trapezoidal L2(0, T) norm of the sampled signal."""
        sq = self.samples**2
        return float(np.sqrt(np.trapezoid(sq, dx=self.step)))

    def __add__(self, other: "ControlSignal") -> "ControlSignal":
        if (other.horizon != self.horizon
                or other.samples.size != self.samples.size):
            raise DomainError("control signals live on different grids")
        parametric = None
        if self.parametric is not None and other.parametric is not None:
            merged = {}
            for f, a in self.parametric + other.parametric:
                merged[f] = merged.get(f, 0.0j) + a
            parametric = tuple(sorted(merged.items()))
        return ControlSignal(self.horizon, self.samples + other.samples,
                             parametric)

    def scaled(self, factor: float) -> "ControlSignal":
        parametric = None
        if self.parametric is not None:
            parametric = tuple((f, factor * a) for f, a in self.parametric)
        return ControlSignal(self.horizon, factor * self.samples, parametric)

    @staticmethod
    def zero(horizon: float, n_steps: int = DEFAULT_STEPS) -> "ControlSignal":
        return ControlSignal(horizon, np.zeros(n_steps + 1), ((0.0, 0.0j),))

    @staticmethod
    def constant(value: float, horizon: float,
                 n_steps: int = DEFAULT_STEPS) -> "ControlSignal":
        return ControlSignal(horizon, np.full(n_steps + 1, float(value)),
                             ((0.0, complex(value)),))

    @staticmethod
    def from_function(f, horizon: float,
                      n_steps: int = DEFAULT_STEPS) -> "ControlSignal":
        t = np.linspace(0.0, horizon, n_steps + 1)
        return ControlSignal(horizon, np.asarray(f(t), dtype=float))

    @staticmethod
    def from_terms(terms, horizon: float,
                   n_steps: int = DEFAULT_STEPS) -> "ControlSignal":
        """Build from (frequency, amplitude) pairs; the sampled signal must
        be real, so terms must be conjugate-symmetric."""
        terms = tuple((float(f), complex(a)) for f, a in terms)
        t = np.linspace(0.0, horizon, n_steps + 1)
        return ControlSignal(horizon, _evaluate_terms(terms, t), terms)


def _evaluate_terms(terms, t):
    tarr = np.atleast_1d(np.asarray(t, dtype=float))
    vals = np.zeros(tarr.shape, dtype=complex)
    for f, a in terms:
        vals += a * np.exp(1j * f * tarr)
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-10 * max(
            1.0, float(np.max(np.abs(vals.real), initial=0.0))):
        raise NumericError("parametric control evaluates to a complex signal")
    out = vals.real
    return float(out[0]) if np.ndim(t) == 0 else out


def _harmonic_coupling(mu: PiecewisePotential, ks: np.ndarray) -> np.ndarray:
    kmax = int(ks.max())
    xmax = _harmonic_window(mu, kmax)
    splits = tuple(mu.breakpoints) + (0.0,)

    def assemble(width):
        nodes, weights = panel_nodes(panel_grid(-xmax, xmax, splits, width))
        phi = hermite_function_values(kmax, nodes)[ks]
        return (phi * (weights * mu(nodes))) @ phi.T

    coarse = assemble(0.25)
    fine = assemble(0.125)
    if np.max(np.abs(fine - coarse)) > 1e-12 * max(
            1.0, float(np.max(np.abs(fine)))):
        raise NumericError("harmonic coupling quadrature did not converge")
    return fine.astype(complex)


def coupling_matrix(mu: PiecewisePotential, model: SpectralModel,
                    N: int) -> np.ndarray:
    """Dense Galerkin matrix B[k_row, j_col] = <mu phi_j, phi_k>."""
    _check_domain(mu, model)
    ks = index_window(model, N)
    if model.kind is ModelKind.HARMONIC:
        B = _harmonic_coupling(mu, ks)
    else:
        B = np.empty((ks.size, ks.size), dtype=complex)
        for col, j in enumerate(ks):
            B[:, col] = _trig_coefficients(mu, model, int(j), ks)
    defect = float(np.max(np.abs(B - B.conj().T)))
    if defect > _HERMITICITY_TOL:
        raise ModelError(f"coupling matrix non-Hermitian (defect {defect:.2e})")
    return 0.5 * (B + B.conj().T)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n_times, N)
    model: SpectralModel

    def state(self, i: int) -> StateVector:
        return StateVector(self.model, self.states[i])

    @property
    def final(self) -> StateVector:
        return self.state(-1)

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


class Propagator:
    """Precomputed spectral data for one (model, potential, truncation)."""

    def __init__(self, model: SpectralModel, mu: PiecewisePotential, N: int):
        self.model = model
        self.mu = mu
        self.N = int(N)
        self.indices = index_window(model, N)
        self.lam = eigenvalue(model, self.indices)
        self.B = coupling_matrix(mu, model, N)
        self._w, self._V = np.linalg.eigh(self.B)

    def _coupling_exp(self, theta: float) -> np.ndarray:
        """exp(-i theta B) through the Hermitian eigendecomposition."""
        return (self._V * np.exp(-1j * theta * self._w)) @ self._V.conj().T

    def _apply_coupling_exp(self, theta: float, vec: np.ndarray) -> np.ndarray:
        """exp(-i theta B) @ vec with two matvecs in the eigenbasis."""
        return self._V @ (np.exp(-1j * theta * self._w)
                          * (self._V.conj().T @ vec))

    def propagate(self, psi0: StateVector, u: ControlSignal,
                  store_trajectory: bool = True,
                  reverse: bool = False) -> Trajectory:
        """Strang-split evolution; with reverse=True the generator is negated
        and the control read backwards, which inverts the forward product
        exactly (time reversibility)."""
        if psi0.size != self.indices.size:
            raise DomainError("state truncation does not match propagator")
        h = u.step
        sign = -1.0 if reverse else 1.0
        mids = u.midpoint_values()
        if reverse:
            mids = mids[::-1]
        half_phase = np.exp(-1j * sign * 0.5 * h * self.lam)
        c = psi0.coefficients.copy()
        n = u.n_steps
        states = np.empty((n + 1 if store_trajectory else 1, c.size),
                          dtype=complex)
        states[0] = c
        for m in range(n):
            c = half_phase * c
            c = self._apply_coupling_exp(sign * mids[m] * h, c)
            c = half_phase * c
            if not np.all(np.isfinite(c)):
                raise NumericError(f"non-finite state at step {m}")
            if store_trajectory:
                states[m + 1] = c
        if not store_trajectory:
            states = np.vstack([states[0], c])
            times = np.asarray([0.0, u.horizon])
        else:
            times = u.times
        return Trajectory(times=times, states=states, model=self.model)

    def endpoint(self, psi0: StateVector, u: ControlSignal) -> StateVector:
        return self.propagate(psi0, u, store_trajectory=False).final

    def _source_column(self, l: int) -> np.ndarray:
        pos = np.nonzero(self.indices == l)[0]
        if pos.size == 0:
            raise DomainError(f"mode {l} outside the truncation window")
        return self.B[:, pos[0]]

    def propagate_linearized(self, v: ControlSignal, l: int,
                             u_base: ControlSignal | None = None,
                             mode: str = "auto") -> StateVector:
        """Endpoint of the linearization around the free eigensolution
        (u_base None or zero) or around a general base control.

        Around the free flow the update uses exact phase factors and exact
        per-step source integrals, so the result matches the closed-form
        Duhamel coefficients

            <xi(T), phi_k> = -i e^{-i lam_k T} <mu phi_l, phi_k>
                             * integral_0^T e^{i(lam_k - lam_l) s} v(s) ds

        up to the control's own quadrature.  Around a nonzero base control
        the update is the exact derivative of the discrete Strang flow, which
        is what a finite-difference check of the endpoint map differentiates.
        """
        self.model.check_index(l)
        if mode not in ("auto", "exact_phase", "discrete"):
            raise DomainError(f"unknown linearization mode {mode!r}")
        free_base = u_base is None or (u_base.parametric == ((0.0, 0.0j),)
                                       or not np.any(u_base.samples))
        if mode == "exact_phase" or (mode == "auto" and free_base):
            if not free_base:
                raise DomainError(
                    "exact-phase linearization needs a zero base control")
            return self._linearized_free(v, l)
        if u_base is None:
            u_base = ControlSignal.zero(v.horizon, v.n_steps)
        return self._linearized_discrete(v, l, u_base)

    def _linearized_free(self, v: ControlSignal, l: int) -> StateVector:
        b = self._source_column(l)
        lam_l = eigenvalue(self.model, l)
        delta = self.lam - lam_l
        T = v.horizon
        if v.parametric is not None:
            # the per-step recursion telescopes to the Duhamel closed form,
            # so evaluate the full-horizon integral directly
            integral = np.zeros(delta.shape, dtype=complex)
            for f, a in v.parametric:
                integral += a * poly_exp_integral((1.0,), 0.0, T, delta + f)
            return StateVector(self.model,
                               -1j * np.exp(-1j * self.lam * T) * b * integral)
        h = v.step
        times = v.times
        xi = np.zeros(self.lam.size, dtype=complex)
        step_phase = np.exp(-1j * h * self.lam)
        for m in range(v.n_steps):
            integral = _step_source_integral(v, times[m], times[m + 1], delta)
            xi = step_phase * xi - 1j * b * np.exp(
                -1j * self.lam * times[m + 1]) * integral
        return StateVector(self.model, xi)

    def _linearized_discrete(self, v: ControlSignal, l: int,
                             u_base: ControlSignal) -> StateVector:
        if v.samples.size != u_base.samples.size or v.horizon != u_base.horizon:
            raise DomainError("controls live on different grids")
        h = u_base.step
        half_phase = np.exp(-1j * 0.5 * h * self.lam)
        u_mid = u_base.midpoint_values()
        v_mid = v.midpoint_values()
        c = basis_state(self.model, self.N, l).coefficients
        xi = np.zeros_like(c)
        for m in range(u_base.n_steps):
            theta = u_mid[m] * h

            def step(y):
                return half_phase * self._apply_coupling_exp(
                    theta, half_phase * y)

            # derivative of the step in the control direction: B commutes
            # with its own exponential, so d/de exp(-i(u+ev)Bh) = -i v h B E
            xi = step(xi) + half_phase * (-1j * v_mid[m] * h * (
                self.B @ self._apply_coupling_exp(theta, half_phase * c)))
            c = step(c)
        return StateVector(self.model, xi)


def _step_source_integral(v: ControlSignal, t0: float, t1: float,
                          delta: np.ndarray) -> np.ndarray:
    """integral_{t0}^{t1} e^{i delta s} v(s) ds, exactly for parametric v and
    by linear interpolation of the samples otherwise."""
    if v.parametric is not None:
        out = np.zeros(delta.shape, dtype=complex)
        for f, a in v.parametric:
            out += a * poly_exp_integral((1.0,), t0, t1, delta + f)
        return out
    v0, v1 = v(t0), v(t1)
    slope = (v1 - v0) / (t1 - t0)
    return (v0 - slope * t0) * poly_exp_integral((1.0,), t0, t1, delta) \
        + slope * poly_exp_integral((0.0, 1.0), t0, t1, delta)


class SobolevNorm(enum.Enum):
    """Weighted little-l2 norms matching each model's H^1-type space."""

    L2 = "l2"
    H10 = "h10"
    H1P = "h1p"
    H1NEUMANN = "h1neumann"
    H1H = "h1h"
    HHA = "hha"


def sobolev_weights(model: SpectralModel, N: int, norm: SobolevNorm,
                    a: float | None = None) -> np.ndarray:
    ks = index_window(model, N)
    if norm is SobolevNorm.L2:
        return np.ones(ks.size)
    if norm is SobolevNorm.H10:
        return ks.astype(float)
    if norm is SobolevNorm.H1P:
        return np.maximum(1.0, np.abs(ks)).astype(float)
    if norm is SobolevNorm.H1NEUMANN:
        return np.maximum(1.0, ks).astype(float)
    if norm is SobolevNorm.H1H:
        return np.sqrt(2.0 * ks + 1.0)
    if a is None:
        raise DomainError("the half-line norm needs the breakpoint a")
    kmax = int(ks.max())
    phi = hermite_function_values(max(kmax - 1, 0), a)[:, 0]
    weights = np.ones(ks.size)
    for i, k in enumerate(ks):
        if k == 0:
            continue
        denom = abs(phi[k - 1])
        if denom < 1e-14:
            raise DomainError(
                f"Hermite function {k - 1} vanishes at a={a}; the half-line "
                "norm weight is undefined")
        weights[i] = np.sqrt(float(k)) / denom
    return weights


def sobolev_norm(psi: StateVector, norm: SobolevNorm,
                 a: float | None = None) -> float:
    weights = sobolev_weights(psi.model, psi.size, norm, a)
    return float(np.linalg.norm(weights * psi.coefficients))


def default_h1_norm(model: SpectralModel) -> SobolevNorm:
    """The H^1-type norm naturally attached to each model."""
    return {
        ModelKind.DIRICHLET: SobolevNorm.H10,
        ModelKind.PERIODIC_MAGNETIC: SobolevNorm.H1P,
        ModelKind.NEUMANN: SobolevNorm.H1NEUMANN,
        ModelKind.HARMONIC: SobolevNorm.H1H,
    }[model.kind]

"""Real-valued trigonometric moment problems.

Given frequencies {omega_k} and targets {x_k}, find a real u in L^2(0, T)
with integral_0^T u(s) e^{i omega_k s} ds = x_k.  The constructive solution
symmetrizes the frequency set to {+-omega_k} (conjugating the targets, so a
real signal can match them), then takes the least-norm exponential sum
u(t) = sum_j c_j e^{-i mu_j t}, whose coefficients solve the Gram system of
the family {e^{-i mu_j t}}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DomainError, IllConditionedError
from .integrals import poly_exp_integral
from .propagator import DEFAULT_STEPS, ControlSignal

# Two frequencies closer than this are treated as colliding.
_FREQ_TOL = 1e-9


@dataclass(frozen=True)
class MomentProblem:
    horizon: float
    frequencies: tuple
    targets: tuple

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise DomainError("horizon must be positive")
        freqs = tuple(float(f) for f in self.frequencies)
        targets = tuple(complex(x) for x in self.targets)
        if len(freqs) != len(targets):
            raise DomainError("frequency and target counts differ")
        if not freqs:
            raise DomainError("empty moment problem")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "targets", targets)
        fs = np.asarray(freqs)
        diffs = np.abs(fs[:, None] - fs[None, :])
        np.fill_diagonal(diffs, np.inf)
        if diffs.min() < _FREQ_TOL:
            raise DegeneracyError("repeated moment frequencies")
        for f, x in zip(freqs, targets):
            if abs(f) < _FREQ_TOL and abs(x.imag) > 1e-12 * max(1.0, abs(x)):
                raise DegeneracyError(
                    "target at frequency zero must be real")

    @property
    def zero_index(self):
        for i, f in enumerate(self.frequencies):
            if abs(f) < _FREQ_TOL:
                return i
        return None


def symmetrize(problem: MomentProblem) -> MomentProblem:
    """Extend to the reflected frequency set with conjugate targets.

    The extended data satisfy y(-omega) = conj(y(omega)) and real y(0), so
    the exponential-sum solution is a real signal.  A collision
    omega_j = -omega_k between distinct input frequencies makes the extended
    family degenerate and is reported as such.
    """
    fs = np.asarray(problem.frequencies)
    collide = np.abs(fs[:, None] + fs[None, :]) < _FREQ_TOL
    np.fill_diagonal(collide, False)
    if collide.any():
        j, k = np.argwhere(collide)[0]
        raise DegeneracyError(
            f"frequencies {fs[j]:g} and {fs[k]:g} are opposite; the "
            "symmetrized family is degenerate")
    pairs = {}
    for f, x in zip(problem.frequencies, problem.targets):
        if abs(f) < _FREQ_TOL:
            pairs[0.0] = complex(x.real)
        else:
            pairs[f] = x
            pairs[-f] = np.conj(x)
    freqs = tuple(sorted(pairs))
    return MomentProblem(problem.horizon, freqs,
                         tuple(pairs[f] for f in freqs))


def _gram(freqs: np.ndarray, T: float) -> np.ndarray:
    """G[m][j] = integral_0^T e^{i(mu_m - mu_j)s} ds (Hermitian PD)."""
    diff = freqs[:, None] - freqs[None, :]
    G = np.empty(diff.shape, dtype=complex)
    off = np.abs(diff) > 0
    G[~off] = T
    d = diff[off]
    G[off] = (np.exp(1j * d * T) - 1.0) / (1j * d)
    return G


def _cholesky_solve(G: np.ndarray, y: np.ndarray) -> np.ndarray:
    L = np.linalg.cholesky(G)
    z = np.linalg.solve(L, y)
    c = np.linalg.solve(L.conj().T, z)
    # one step of iterative refinement recovers digits near the cap
    r = y - G @ c
    z = np.linalg.solve(L, r)
    return c + np.linalg.solve(L.conj().T, z)


@dataclass(frozen=True)
class MomentSolution:
    problem: MomentProblem          # the symmetrized problem actually solved
    control: ControlSignal
    coefficients: np.ndarray
    residuals: np.ndarray
    gram_condition: float

    @property
    def residual_max(self) -> float:
        return float(np.max(np.abs(self.residuals)))

    def to_json(self) -> str:
        return json.dumps({
            "T": self.problem.horizon,
            "frequencies": list(self.problem.frequencies),
            "targets_re": [x.real for x in self.problem.targets],
            "targets_im": [x.imag for x in self.problem.targets],
            "coefficients_re": self.coefficients.real.tolist(),
            "coefficients_im": self.coefficients.imag.tolist(),
            "gram_condition": self.gram_condition,
            "residual_max": self.residual_max,
        }, indent=2)

    @staticmethod
    def from_json(text: str) -> "MomentSolution":
        doc = json.loads(text)
        problem = MomentProblem(
            doc["T"], tuple(doc["frequencies"]),
            tuple(np.asarray(doc["targets_re"])
                  + 1j * np.asarray(doc["targets_im"])))
        coeffs = (np.asarray(doc["coefficients_re"])
                  + 1j * np.asarray(doc["coefficients_im"]))
        control = _exponential_sum_control(
            np.asarray(problem.frequencies), coeffs, problem.horizon,
            DEFAULT_STEPS)
        mom = moments(control, problem.frequencies)
        return MomentSolution(problem=problem, control=control,
                              coefficients=coeffs,
                              residuals=mom - np.asarray(problem.targets),
                              gram_condition=float(doc["gram_condition"]))


def _exponential_sum_control(freqs, coeffs, T, n_steps) -> ControlSignal:
    terms = tuple((-f, c) for f, c in zip(freqs, coeffs))
    return ControlSignal.from_terms(terms, T, n_steps)


def solve(problem: MomentProblem, condition_cap: float = 1e12,
          tikhonov: bool = False, alpha: float | None = None,
          n_steps: int = DEFAULT_STEPS) -> MomentSolution:
    """Least-norm real exponential-sum solution of the moment problem."""
    sym = symmetrize(problem)
    freqs = np.asarray(sym.frequencies)
    y = np.asarray(sym.targets)
    G = _gram(freqs, sym.horizon)
    eig = np.linalg.eigvalsh(G)
    condition = float(eig[-1] / max(eig[0], np.finfo(float).tiny))
    if condition > condition_cap:
        if not tikhonov:
            raise IllConditionedError(
                f"Gram condition {condition:.3e} above cap "
                f"{condition_cap:.1e}; enlarge T, drop modes, or opt in to "
                "Tikhonov regularization", condition=condition)
        if alpha is None:
            alpha = 1e-10 * float(np.trace(G).real)
        c = _cholesky_solve(G + alpha * np.eye(len(G)), y)
    else:
        c = _cholesky_solve(G, y)
    # roundoff in ill-conditioned solves breaks the exact conjugate pairing
    # c(-mu) = conj(c(mu)) that makes the signal real; the symmetrized
    # frequencies are sorted, so the reflection is a reversal
    c = 0.5 * (c + np.conj(c[::-1]))
    control = _exponential_sum_control(freqs, c, sym.horizon, n_steps)
    return MomentSolution(problem=sym, control=control, coefficients=c,
                          residuals=G @ c - y, gram_condition=condition)


def moments(u: ControlSignal, frequencies) -> np.ndarray:
    """integral_0^T u(s) e^{i omega s} ds for each omega.

    Exact for parametric controls; otherwise composite panels of 8 grid
    steps, interpolating the samples by a degree-8 polynomial and
    integrating polynomial x exponential in closed form (exact phase).
    """
    omegas = np.atleast_1d(np.asarray(frequencies, dtype=float))
    if u.parametric is not None:
        out = np.zeros(omegas.shape, dtype=complex)
        for f, a in u.parametric:
            out += a * poly_exp_integral((1.0,), 0.0, u.horizon, omegas + f)
        return out
    times = u.times
    samples = u.samples
    out = np.zeros(omegas.shape, dtype=complex)
    chunk = 8
    for start in range(0, u.n_steps, chunk):
        stop = min(start + chunk, u.n_steps)
        t = times[start:stop + 1]
        s = samples[start:stop + 1]
        mid = 0.5 * (t[0] + t[-1])
        coeffs = np.polynomial.polynomial.polyfit(t - mid, s, deg=t.size - 1)
        out += np.exp(1j * omegas * mid) * poly_exp_integral(
            coeffs, t[0] - mid, t[-1] - mid, omegas)
    return out


def bessel_diagnostic(frequencies, T: float, trials: int,
                      seed: int = 0, band_factor: float = 1.5,
                      n_terms: int = 8) -> float:
    """Empirical lower estimate of the constant C(T) in
    ||moments(u)||_2 <= C ||u||_{L^2(0,T)}.

    Maximizes the ratio over random band-limited trial signals; a Monte
    Carlo maximum is a lower estimate, never an upper certificate.
    """
    freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
    if freqs.size > 1:
        gaps = np.diff(np.sort(freqs))
        if gaps.min() <= 0:
            raise DegeneracyError("frequency gaps must be positive")
    band = band_factor * max(1.0, float(np.max(np.abs(freqs))))
    rng = np.random.default_rng(seed)
    best = 0.0

    def try_terms(terms):
        nonlocal best
        u = ControlSignal.from_terms(terms, T, 2048)
        denom = u.l2_norm()
        if denom > 1e-14:
            best = max(best,
                       float(np.linalg.norm(moments(u, freqs))) / denom)

    # deterministic candidates: a resonant cosine/sine at each frequency
    for w in freqs:
        try_terms(((w, 0.5), (-w, 0.5)))
        try_terms(((w, -0.5j), (-w, 0.5j)))
    for _ in range(trials):
        thetas = rng.uniform(0.0, band, size=n_terms)
        amps = rng.standard_normal(n_terms) + 1j * rng.standard_normal(n_terms)
        terms = []
        for th, a in zip(thetas, amps):
            terms.append((th, 0.5 * a))
            terms.append((-th, 0.5 * np.conj(a)))
        try_terms(terms)
    return best

"""Piecewise-polynomial control potentials and their spectral coefficients.

A potential mu is polynomial between breakpoints (H^1 regularity up to the
discontinuities).  Coefficients <mu phi_l, phi_k> are computed in closed form
for the trigonometric bases (each piece is a polynomial times a complex
exponential) and by adaptive panel quadrature for the Hermite basis.
"""

from __future__ import annotations

import enum
import functools
import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .integrals import adaptive_integral, poly_exp_integral
from .spectral import (ModelKind, SpectralModel, eigenfunction_value,
                       hermite_function_values, index_window)


class PotentialDomain(enum.Enum):
    UNIT_INTERVAL = "unit_interval"
    REAL_LINE = "real_line"


class CoefficientMethod(enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class PiecewisePotential:
    """Polynomial pieces between strictly increasing interior breakpoints.

    pieces[i] holds ascending-degree coefficients on the i-th interval; there
    is one more piece than breakpoints.  On the real line the outermost
    pieces must be constant.
    """

    breakpoints: tuple
    pieces: tuple
    domain: PotentialDomain = PotentialDomain.UNIT_INTERVAL

    def __post_init__(self):
        if not isinstance(self.domain, PotentialDomain):
            try:
                object.__setattr__(self, "domain",
                                   PotentialDomain(self.domain))
            except ValueError:
                raise DomainError(f"unknown domain {self.domain!r}") from None
        bps = tuple(float(b) for b in self.breakpoints)
        pcs = tuple(tuple(float(c) for c in p) for p in self.pieces)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pcs)
        if any(b >= c for b, c in zip(bps, bps[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if len(pcs) != len(bps) + 1:
            raise DomainError("need exactly one more piece than breakpoints")
        if not all(p for p in pcs):
            raise DomainError("each piece needs at least one coefficient")
        if self.domain is PotentialDomain.UNIT_INTERVAL:
            if bps and not (0.0 < bps[0] and bps[-1] < 1.0):
                raise DomainError("breakpoints must lie inside (0, 1)")
        else:
            for outer in (pcs[0], pcs[-1]):
                if any(c != 0.0 for c in outer[1:]):
                    raise DomainError(
                        "real-line potentials must be constant outside the "
                        "breakpoint window")

    def intervals(self, lo=None, hi=None):
        """(a, b, coeffs) triples covering [lo, hi] (defaults: full domain)."""
        if self.domain is PotentialDomain.UNIT_INTERVAL:
            lo = 0.0 if lo is None else lo
            hi = 1.0 if hi is None else hi
        edges = (lo,) + self.breakpoints + (hi,)
        out = []
        for a, b, p in zip(edges[:-1], edges[1:], self.pieces):
            if b > a:
                out.append((a, b, p))
        return out

    def __call__(self, x):
        xarr = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.searchsorted(np.asarray(self.breakpoints), xarr, side="right")
        out = np.empty_like(xarr)
        for i, p in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                out[mask] = np.polynomial.polynomial.polyval(xarr[mask], p)
        return float(out[0]) if np.ndim(x) == 0 else out

    @property
    def is_zero(self) -> bool:
        return all(all(c == 0.0 for c in p) for p in self.pieces)

    def content_hash(self) -> str:
        blob = struct.pack("<i", len(self.pieces)) + self.domain.value.encode()
        for b in self.breakpoints:
            blob += struct.pack("<d", b)
        for p in self.pieces:
            blob += struct.pack("<i", len(p)) + b"".join(
                struct.pack("<d", c) for c in p)
        return hashlib.sha256(blob).hexdigest()[:16]


def indicator(a: float, b: float,
              domain: PotentialDomain = PotentialDomain.UNIT_INTERVAL
              ) -> PiecewisePotential:
    """The potential 1_{[a,b]}; endpoints on the domain boundary collapse
    the corresponding zero piece."""
    bps, pieces = [], [(0.0,)]
    if domain is not PotentialDomain.UNIT_INTERVAL or a > 0.0:
        bps.append(a)
    else:
        pieces = []
    pieces.append((1.0,))
    if domain is not PotentialDomain.UNIT_INTERVAL or b < 1.0:
        bps.append(b)
        pieces.append((0.0,))
    return PiecewisePotential(tuple(bps), tuple(pieces), domain)


def half_line_step(a: float) -> PiecewisePotential:
    """The potential 1_{[a, infinity)} on the real line."""
    return PiecewisePotential((a,), ((0.0,), (1.0,)),
                              PotentialDomain.REAL_LINE)


def zero_potential(domain: PotentialDomain = PotentialDomain.UNIT_INTERVAL
                   ) -> PiecewisePotential:
    return PiecewisePotential((), ((0.0,),), domain)


def dirichlet_example() -> PiecewisePotential:
    """1_{[0,1/2]} + 1_{[1/4,3/4]}: the two indicators overlap on [1/4,1/2]."""
    return PiecewisePotential((0.25, 0.5, 0.75),
                              ((1.0,), (2.0,), (1.0,), (0.0,)))


def periodic_example() -> PiecewisePotential:
    """x * 1_{[0,1/2]}."""
    return PiecewisePotential((0.5,), ((0.0, 1.0), (0.0,)))


def neumann_example() -> PiecewisePotential:
    """1_{[1/3,2/3]}: rational breakpoints, so infinitely many coefficients
    vanish exactly."""
    return indicator(1.0 / 3.0, 2.0 / 3.0)


def _harmonic_window(mu: PiecewisePotential, kmax: int) -> float:
    # cover the classical turning point sqrt(2 kmax + 1) plus Gaussian margin
    reach = 12.0
    if mu.breakpoints:
        reach = max(reach, max(abs(b) for b in mu.breakpoints) + 12.0)
    return max(reach, np.sqrt(2.0 * kmax + 1.0) + 8.0)


def _harmonic_coefficients(mu: PiecewisePotential, l: int,
                           ks: np.ndarray) -> np.ndarray:
    if mu.is_zero:
        return np.zeros(ks.size, dtype=complex)
    kmax = int(max(int(ks.max()), l))
    xmax = _harmonic_window(mu, kmax)
    if mu.domain is PotentialDomain.REAL_LINE:
        lo, hi = -xmax, xmax
    else:
        lo, hi = 0.0, 1.0

    def integrand(x):
        phi = hermite_function_values(kmax, x)
        return mu(x) * phi[l] * phi[ks]

    splits = tuple(b for b in mu.breakpoints) + ((0.0,) if lo < 0.0 < hi
                                                 else ())
    vals = adaptive_integral(integrand, lo, hi, splits=splits,
                             rtol=1e-13, atol=1e-16)
    return vals.astype(complex)


def _trig_coefficients(mu: PiecewisePotential, model: SpectralModel, l: int,
                       ks: np.ndarray) -> np.ndarray:
    out = np.zeros(ks.size, dtype=complex)
    if mu.is_zero:
        return out
    if model.kind is ModelKind.PERIODIC_MAGNETIC:
        omegas = [(np.full(ks.size, 1.0 + 0.0j), 2.0 * np.pi * (l - ks))]
    elif model.kind is ModelKind.DIRICHLET:
        wm, wp = (l - ks) * np.pi, (l + ks) * np.pi
        omegas = [(0.5, wm), (0.5, -wm), (-0.5, wp), (-0.5, -wp)]
    else:
        amp = (np.sqrt(2.0) if l else 1.0) * np.where(ks != 0, np.sqrt(2.0),
                                                      1.0) / 4.0
        wm, wp = (l - ks) * np.pi, (l + ks) * np.pi
        omegas = [(amp, wm), (amp, -wm), (amp, wp), (amp, -wp)]
    for a, b, p in mu.intervals():
        for amp, w in omegas:
            out += amp * poly_exp_integral(p, a, b, w)
    return out


def inner_product(mu: PiecewisePotential, model: SpectralModel, l: int,
                  k: int, method: CoefficientMethod | None = None) -> complex:
    """The spectral coefficient <mu phi_l, phi_k> =
    integral of mu(x) phi_l(x) conj(phi_k(x))."""
    model.check_index(l)
    model.check_index(k)
    _check_domain(mu, model)
    if method is None:
        method = (CoefficientMethod.QUADRATURE
                  if model.kind is ModelKind.HARMONIC
                  else CoefficientMethod.CLOSED_FORM)
    if method is CoefficientMethod.CLOSED_FORM:
        val = _trig_coefficients(mu, model, l, np.asarray([k]))[0]
        return complex(val)
    return complex(_quadrature_coefficient(mu, model, l, k))


def _quadrature_coefficient(mu, model, l, k):
    if model.kind is ModelKind.HARMONIC:
        return _harmonic_coefficients(mu, l, np.asarray([k]))[0]

    def integrand(x):
        return (mu(x) * eigenfunction_value(model, l, x)
                * np.conj(eigenfunction_value(model, k, x)))

    return adaptive_integral(integrand, 0.0, 1.0, splits=mu.breakpoints,
                             rtol=1e-13, atol=1e-16)


def _check_domain(mu: PiecewisePotential, model: SpectralModel) -> None:
    want = (PotentialDomain.REAL_LINE if model.kind is ModelKind.HARMONIC
            else PotentialDomain.UNIT_INTERVAL)
    if (mu.domain is PotentialDomain.REAL_LINE) != (want is
                                                    PotentialDomain.REAL_LINE):
        raise DomainError(
            f"potential domain {mu.domain.value} does not match the "
            f"{model.kind.value} model")


@dataclass(frozen=True)
class CoefficientTable:
    """Coefficients <mu phi_l, phi_k> over a contiguous index window."""

    l: int
    indices: tuple
    values: tuple
    method: CoefficientMethod
    model: SpectralModel = field(compare=False, default=None)

    def value(self, k: int) -> complex:
        return self.values[self.indices.index(k)]

    def abs_values(self) -> np.ndarray:
        return np.abs(np.asarray(self.values))


@functools.lru_cache(maxsize=128)
def coefficient_table(mu: PiecewisePotential, model: SpectralModel, l: int,
                      size: int) -> CoefficientTable:
    """Coefficient table over the model's standard index window.

    Cached: the propagator and steering loops reuse tables heavily, and the
    inputs are immutable value objects.
    """
    model.check_index(l)
    _check_domain(mu, model)
    ks = index_window(model, size)
    if model.kind is ModelKind.HARMONIC:
        vals = _harmonic_coefficients(mu, l, ks)
        method = CoefficientMethod.QUADRATURE
    else:
        vals = _trig_coefficients(mu, model, l, ks)
        method = CoefficientMethod.CLOSED_FORM
    return CoefficientTable(l=l, indices=tuple(int(k) for k in ks),
                            values=tuple(complex(v) for v in vals),
                            method=method, model=model)


class BoundWeight(enum.Enum):
    """Multiplier turning |<mu phi_l, phi_k>| into a candidate constant C in
    the lower bounds C/k, C/(|k|+1), C/sqrt(2k+1)."""

    INVERSE_K = "inverse_k"
    INVERSE_K_PLUS_1 = "inverse_k_plus_1"
    INVERSE_SQRT_LAMBDA = "inverse_sqrt_lambda"

    def multiplier(self, k: int) -> float:
        if self is BoundWeight.INVERSE_K:
            return float(abs(k))
        if self is BoundWeight.INVERSE_K_PLUS_1:
            return float(abs(k) + 1)
        return float(np.sqrt(2.0 * k + 1.0))


@dataclass(frozen=True)
class LowerBoundReport:
    passed: bool
    worst_constant: float
    argmin_index: int
    weight: BoundWeight
    threshold: float


def verify_lower_bound(table: CoefficientTable, weight: BoundWeight,
                       threshold: float = 1e-12) -> LowerBoundReport:
    """Smallest weighted coefficient over the table; passes when it stays
    above the threshold separating analytic zeros from roundoff."""
    if not table.indices:
        raise DomainError("empty coefficient table")
    constants = [abs(v) * weight.multiplier(k)
                 for k, v in zip(table.indices, table.values)]
    i = int(np.argmin(constants))
    worst = float(constants[i])
    return LowerBoundReport(passed=worst > threshold, worst_constant=worst,
                            argmin_index=table.indices[i], weight=weight,
                            threshold=threshold)


@dataclass(frozen=True)
class ObstructionReport:
    """Weighted Neumann coefficients (k+1)|<mu, phi_k>| and their running
    minimum; decay of the running minimum exhibits the failure of the
    uniform lower-bound hypothesis."""

    indices: np.ndarray
    weighted: np.ndarray
    running_min: np.ndarray

    @property
    def initial_level(self) -> float:
        return float(self.weighted[0])

    @property
    def final_min(self) -> float:
        return float(self.running_min[-1])


def neumann_obstruction_scan(mu: PiecewisePotential,
                             K: int) -> ObstructionReport:
    """Scan (k+1)|<mu phi_0, phi_k>| for k = 1..K on the Neumann model."""
    if K < 1:
        raise DomainError("need K >= 1")
    _check_domain(mu, SpectralModel.neumann())
    ks = np.arange(1, K + 1)
    vals = _trig_coefficients(mu, SpectralModel.neumann(), 0, ks)
    weighted = (ks + 1) * np.abs(vals)
    return ObstructionReport(indices=ks, weighted=weighted,
                             running_min=np.minimum.accumulate(weighted))


@dataclass(frozen=True)
class IdentityReport:
    lhs: complex
    rhs: complex
    abs_error: float


def harmonic_tail_coefficient(a: float, k: int) -> float:
    """Closed form for the half-line overlap integral_a^inf phi_k phi_0 dx.

    Follows from d/dx [phi_{k-1}(x) phi_0(x) e stays] -- concretely, from the
    Hermite derivative identity d/dx(e^{-x^2} H_{k-1}) = -e^{-x^2} H_k:

        integral_a^inf phi_k phi_0 dx
            = pi^{-1/4} e^{-a^2/2} phi_{k-1}(a) / sqrt(2 k).
    """
    if k < 1:
        raise DomainError("need k >= 1")
    phi_prev = float(hermite_function_values(k - 1, a)[k - 1, 0])
    return (np.pi ** (-0.25) * np.exp(-0.5 * a * a) * phi_prev
            / np.sqrt(2.0 * k))


def harmonic_coefficient_identity(a: float, k: int) -> IdentityReport:
    """Quadrature of integral_a^inf phi_k phi_0 against its closed form."""
    if k < 1:
        raise DomainError("need k >= 1")
    xmax = max(12.0, abs(a) + 12.0, np.sqrt(2.0 * k + 1.0) + 8.0)

    def integrand(x):
        phi = hermite_function_values(k, x)
        return (phi[k] * phi[0])[None, :]

    lhs = complex(adaptive_integral(integrand, a, xmax, rtol=1e-13,
                                    atol=1e-16)[0])
    rhs = complex(harmonic_tail_coefficient(a, k))
    return IdentityReport(lhs=lhs, rhs=rhs, abs_error=abs(lhs - rhs))

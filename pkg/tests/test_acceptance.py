"""Acceptance gate: one test per release criterion, each printing a single
pass/fail line.

Criterion 2 notes a systematic factor of 2 between the reference example
families and the normalized-eigenfunction coefficients (the references drop
the product of the two sqrt(2) sine normalizations); the independent
quadrature below confirms the normalized values, so the reference families
are compared after multiplying by SINE_NORMALIZATION = 2.  The reference
odd-index formula also has a vanishing denominator at k=1; that mismatch is
flagged rather than papered over.
"""

import numpy as np
import pytest

from bilinctrl.errors import IllConditionedError
from bilinctrl.moments import MomentProblem, moments, solve
from bilinctrl.potentials import (CoefficientMethod, dirichlet_example,
                                  half_line_step, harmonic_coefficient_identity,
                                  indicator, inner_product,
                                  neumann_obstruction_scan, periodic_example)
from bilinctrl.propagator import (ControlSignal, Propagator, basis_state)
from bilinctrl.spectral import (SpectralModel, check_resonance, eigenvalue,
                                gap_analysis, hermite_function_values,
                                index_window)
from bilinctrl.steering import (SteeringProblem, endpoint_derivative_check,
                                perturbed_target, steer)

DIRICHLET = SpectralModel.dirichlet()
NEUMANN = SpectralModel.neumann()
HARMONIC = SpectralModel.harmonic()

SINE_NORMALIZATION = 2.0


def _report(num, label, ok):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {label}")
    assert ok


def test_criterion_01_spectral_exactness():
    ok = True
    cases = [
        (DIRICHLET, lambda k: k**2 * np.pi**2),
        (NEUMANN, lambda k: k**2 * np.pi**2),
        (HARMONIC, lambda k: 2.0 * k + 1.0),
        (SpectralModel.periodic(1.0),
         lambda k: 4 * np.pi**2 * k**2 - 2 * np.pi * k),
    ]
    for model, law in cases:
        ks = index_window(model, 500)
        got = eigenvalue(model, ks)
        want = law(ks.astype(float))
        scale = np.maximum(np.abs(want), 1.0)
        ok = ok and bool(np.max(np.abs(got - want) / scale) <= 1e-14)
    _report(1, "eigenvalues match closed forms to 1e-14 over 500 indices",
            ok)


def test_criterion_02_example_coefficient_families():
    mu_d = dirichlet_example()
    mu_p = periodic_example()
    ok = True
    # even-index family at modes 2k, independent quadrature
    for k in range(1, 201):
        printed = abs(2.0 * (-1) ** k * k / (-np.pi + 4 * k**2 * np.pi))
        got = abs(inner_product(mu_d, DIRICHLET, 1, 2 * k,
                                method=CoefficientMethod.QUADRATURE))
        ok = ok and abs(got - SINE_NORMALIZATION * printed) <= 1e-10 * max(
            1.0, got)
    # odd-index family at modes 2k-1, valid from k=2
    for k in range(2, 201):
        printed = abs(
            (k * np.cos(k * np.pi / 2) + (1 - k) * np.sin(k * np.pi / 2))
            / (2 * k * (k - 1) * np.pi))
        got = abs(inner_product(mu_d, DIRICHLET, 1, 2 * k - 1,
                                method=CoefficientMethod.QUADRATURE))
        ok = ok and abs(got - SINE_NORMALIZATION * printed) <= 1e-10 * max(
            1.0, got)
    # the k=1 odd-index formula divides by zero while the true coefficient
    # is finite: flag the mismatch
    with np.errstate(invalid="ignore", divide="ignore"):
        printed_k1 = abs(
            (np.cos(np.pi / 2) + 0.0 * np.sin(np.pi / 2)) / (2 * 0 * np.pi))
    true_k1 = abs(inner_product(mu_d, DIRICHLET, 1, 1,
                                method=CoefficientMethod.QUADRATURE))
    flagged = (not np.isfinite(printed_k1)) and np.isfinite(true_k1) \
        and true_k1 > 0.1
    ok = ok and flagged
    # periodic family (unit-modulus eigenfunctions: no renormalization)
    model = SpectralModel.periodic(1.0)
    for k in [k for k in range(-200, 201) if k != 0]:
        printed = abs(((-1) ** (k + 1) + 1 - 1j * k * np.pi)
                      / (4 * k**2 * np.pi**2))
        got = abs(inner_product(mu_p, model, 0, k,
                                method=CoefficientMethod.QUADRATURE))
        ok = ok and abs(got - printed) <= 1e-10 * max(1.0, got)
    _report(2, "example coefficient families reproduced by quadrature "
               "(factor-2 renormalization, k=1 odd formula flagged)", ok)


def test_criterion_03_resonance_oracle():
    ok = True
    for l in (1, 2, 3, 4, 6, 7, 8, 9):
        ok = ok and check_resonance(l, 200).ok
    bad = check_resonance(5, 200)
    ok = ok and (not bad.ok) and ((7, 1) in bad.violations)
    _report(3, "non-resonance holds for l in {1,2,3,4,6,7,8,9}; l=5 fails "
               "with witness (7,1)", ok)


def test_criterion_04_drift_splitting():
    ok = True
    for drift in (1.0, np.sqrt(2.0)):
        model = SpectralModel.periodic(drift)
        for l in (0, 1):
            report = gap_analysis(model, l, 100)
            ok = ok and report.distinct and report.min_gap > 0
    degenerate = gap_analysis(SpectralModel.periodic(0.0), 0, 100)
    ok = ok and not degenerate.distinct
    _report(4, "drift splits the merged transition sequence; zero drift "
               "leaves duplicates", ok)


def test_criterion_05_unitarity_and_reversibility():
    prop = Propagator(DIRICHLET, dirichlet_example(), 128)
    rng = np.random.default_rng(0)
    ok = True
    for _ in range(3):
        u = ControlSignal(1.0, 0.5 * rng.standard_normal(4097))
        psi0 = basis_state(DIRICHLET, 128, 1)
        traj = prop.propagate(psi0, u)
        ok = ok and float(np.max(np.abs(traj.norms() - 1.0))) <= 1e-10
        back = prop.propagate(traj.final, u, store_trajectory=False,
                              reverse=True).final
        ok = ok and (back - psi0).norm() <= 1e-8
    _report(5, "unitary to 1e-10 along trajectories; round trip error "
               "<= 1e-8 at N=128, T=1", ok)


def test_criterion_06_linearized_duhamel_agreement():
    prop = Propagator(DIRICHLET, dirichlet_example(), 20)
    lam = prop.lam
    rng = np.random.default_rng(1)
    T = 0.8
    ok = True
    for _ in range(20):
        terms = []
        for f in rng.uniform(0.0, 60.0, 4):
            a = rng.standard_normal() + 1j * rng.standard_normal()
            terms += [(float(f), 0.5 * a), (float(-f), 0.5 * np.conj(a))]
        v = ControlSignal.from_terms(terms, T, 1024)
        xi = prop.propagate_linearized(v, 1)
        from bilinctrl.integrals import poly_exp_integral
        integral = np.zeros(20, dtype=complex)
        for f, a in terms:
            integral += a * poly_exp_integral((1.0,), 0.0, T,
                                              lam - lam[0] + f)
        want = -1j * np.exp(-1j * lam * T) * prop.B[:, 0] * integral
        ok = ok and float(np.max(np.abs(xi.coefficients - want))) <= 1e-8
    _report(6, "linearized propagation matches the Duhamel coefficient "
               "formula for 20 random controls", ok)


def test_criterion_07_moment_round_trip_and_conditioning():
    ok = True
    cases = [
        (DIRICHLET, 1, 0.5, 25),
        (SpectralModel.periodic(1.0), 0, 0.5, 25),
        (HARMONIC, 0, 1.05 * np.pi, 25),
    ]
    rng = np.random.default_rng(2)
    for model, l, T, K in cases:
        freqs = tuple(float(eigenvalue(model, int(k)) - eigenvalue(model, l))
                      for k in index_window(model, K))
        targets = tuple(
            complex(rng.standard_normal()) if w == 0.0
            else rng.standard_normal() + 1j * rng.standard_normal()
            for w in freqs)
        sol = solve(MomentProblem(T, freqs, targets))
        got = moments(sol.control, np.asarray(freqs))
        scale = max(1.0, float(np.max(np.abs(targets))))
        ok = ok and float(np.max(np.abs(got - np.asarray(targets)))) \
            <= 1e-8 * scale
    # harmonic conditioning across the critical horizon
    freqs = tuple(2.0 * k for k in range(30))
    targets = (0.1,) + tuple(0.1 + 0.1j for _ in range(29))
    try:
        tight = solve(MomentProblem(0.9 * np.pi, freqs, targets),
                      condition_cap=1e15)
        tight_cond = tight.gram_condition
    except IllConditionedError as err:
        tight_cond = err.condition
    roomy = solve(MomentProblem(1.2 * np.pi, freqs, targets))
    ok = ok and tight_cond / roomy.gram_condition >= 10.0
    _report(7, "moment round trips <= 1e-8 on three models; harmonic Gram "
               "conditioning degrades >= 10x below the critical horizon", ok)


def test_criterion_08_endpoint_map_differentiability():
    cases = [
        (DIRICHLET, dirichlet_example(), 1),
        (SpectralModel.periodic(1.0), periodic_example(), 0),
        (NEUMANN, indicator(1.0 / 3.0, 2.0 / 3.0), 0),
        (HARMONIC, half_line_step(0.3), 0),
    ]
    rng = np.random.default_rng(3)
    ok = True
    T = 0.5
    for model, mu, l in cases:
        for _ in range(5):
            u = ControlSignal(T, 0.2 * rng.standard_normal(513))
            v = ControlSignal(T, rng.standard_normal(513))
            slope = endpoint_derivative_check(u, v, model, mu, l, T, N=32)
            ok = ok and 1.8 <= slope <= 2.2
    _report(8, "finite-difference remainder slope in [1.8, 2.2] across 5 "
               "random pairs per model", ok)


@pytest.mark.parametrize("label,model,mu,l,K", [
    ("dirichlet", DIRICHLET, dirichlet_example(), 1, 20),
    ("periodic", SpectralModel.periodic(1.0), periodic_example(), 0, 21),
])
def test_criterion_09_local_exact_controllability(label, model, mu, l, K):
    T = 0.4
    tol = 1e-8
    ok = True
    for seed in range(10):
        psi1 = perturbed_target(model, K, l, T, delta=1e-2, seed=seed)
        problem = SteeringProblem(model, mu, l, T,
                                  basis_state(model, K, l), psi1,
                                  tolerance=tol, max_iters=6)
        report = steer(problem, K=K)
        ok = ok and report.converged and report.iterations <= 6
        res = report.residuals
        for a, b in zip(res[:-1], res[1:]):
            if a > tol:
                ok = ok and b <= 0.1 * a
    _report(9, f"Newton steering contracts >= 10x per iteration to <= 1e-8 "
               f"for 10 seeds ({label} mode {l})", ok)


def test_criterion_10_neumann_obstruction():
    ok = True
    symmetric = neumann_obstruction_scan(indicator(1.0 / 3.0, 2.0 / 3.0), 60)
    for k, w in zip(symmetric.indices, symmetric.weighted):
        if k % 3 == 0:
            ok = ok and abs(w) <= 1e-12
    irrational = neumann_obstruction_scan(
        indicator(0.0, np.sqrt(2.0) - 1.0), 100_000)
    ok = ok and irrational.final_min < 0.1 * irrational.initial_level
    _report(10, "symmetric-well coefficients vanish on 3N; irrational "
                "breakpoint running minimum falls below 10%", ok)


def test_criterion_11_harmonic_identities_and_bound():
    ok = True
    for a in (0.0, 0.3, 1.0):
        for k in range(1, 51):
            rep = harmonic_coefficient_identity(float(a), k)
            ok = ok and rep.abs_error <= 1e-8
    x = np.linspace(-10.0, 10.0, 4001)
    phi = hermite_function_values(500, x)
    ks = np.arange(10, 501)
    scaled = ks**0.25 * np.abs(phi[10:]).max(axis=1)
    ok = ok and scaled.max() / scaled.min() < 2.0
    _report(11, "half-line coefficient identity <= 1e-8 for k <= 50; "
                "scaled sup-norm constant stable over k in 10..500", ok)

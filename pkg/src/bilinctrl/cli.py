"""Command-line interface: runs one experiment verb per process and writes
plot-ready CSV/JSON artifacts stamped with the configuration hash."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .config import ExperimentConfig, load_config_file
from .errors import BilinearControlError, ConfigError
from .moments import MomentProblem, solve
from .potentials import (BoundWeight, coefficient_table,
                         harmonic_coefficient_identity,
                         neumann_obstruction_scan, verify_lower_bound)
from .propagator import (ControlSignal, Propagator, basis_state,
                         default_h1_norm, sobolev_weights)
from .spectral import (ModelKind, SpectralModel, check_resonance,
                       eigenvalue, gap_analysis, hermite_function_values,
                       index_window)
from .steering import (SteeringProblem, endpoint_derivative_check,
                       perturbed_target, steer)

OUTPUT_DIR_ENV = "BILINCTRL_OUT"

_DEFAULT_WEIGHTS = {
    ModelKind.DIRICHLET: BoundWeight.INVERSE_K,
    ModelKind.PERIODIC_MAGNETIC: BoundWeight.INVERSE_K_PLUS_1,
    ModelKind.NEUMANN: BoundWeight.INVERSE_K_PLUS_1,
    ModelKind.HARMONIC: BoundWeight.INVERSE_SQRT_LAMBDA,
}


def write_csv(path: str, header: str, rows, config_hash: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(c) for c in row) + "\n")


def _format_cell(c) -> str:
    if isinstance(c, (int, np.integer)):
        return str(int(c))
    return repr(float(c))


def read_csv(path: str):
    """Round-trip reader for package CSV artifacts."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if not first.startswith("# config_hash="):
            raise ConfigError(f"{path}: missing config hash line")
        config_hash = first.split("=", 1)[1]
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return config_hash, header, rows


def write_json(path: str, doc: dict, config_hash: str) -> None:
    doc = dict(doc)
    doc["config_hash"] = config_hash
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _control_from_task(cfg: ExperimentConfig) -> ControlSignal:
    spec = dict(cfg.task.control)
    kind = spec.pop("type", "zero")
    T, n = cfg.task.T, cfg.numerics.n_steps
    if kind == "zero":
        extra = spec
    elif kind == "constant":
        value = spec.pop("value", 0.0)
        extra = spec
    elif kind == "terms":
        terms = spec.pop("terms", ())
        extra = spec
    else:
        raise ConfigError(f"unknown control type {kind!r}")
    if extra:
        raise ConfigError(f"unknown control key(s) {sorted(extra)}")
    if kind == "zero":
        return ControlSignal.zero(T, n)
    if kind == "constant":
        return ControlSignal.constant(float(value), T, n)
    return ControlSignal.from_terms(
        [(float(f), complex(re, im)) for f, re, im in terms], T, n)


def _weight_from_config(cfg: ExperimentConfig,
                        model: SpectralModel) -> BoundWeight:
    if cfg.task.weight is None:
        return _DEFAULT_WEIGHTS[model.kind]
    try:
        return BoundWeight(cfg.task.weight)
    except ValueError:
        raise ConfigError(f"unknown bound weight {cfg.task.weight!r}")


def _band_limited(rng, T: float, n_steps: int, n_terms: int = 4,
                  band: float = 30.0) -> ControlSignal:
    terms = []
    for f in rng.uniform(0.0, band, n_terms):
        a = rng.standard_normal() + 1j * rng.standard_normal()
        terms.append((float(f), 0.25 * a))
        terms.append((float(-f), 0.25 * np.conj(a)))
    return ControlSignal.from_terms(terms, T, n_steps)


def _coefficient_rows(cfg: ExperimentConfig):
    model = cfg.spectral_model()
    mu = cfg.piecewise_potential()
    table = coefficient_table(mu, model, cfg.model.l, cfg.numerics.K)
    weight = _weight_from_config(cfg, model)
    rows = [(k, v.real, v.imag, abs(v), abs(v) * weight.multiplier(k))
            for k, v in zip(table.indices, table.values)]
    return table, weight, rows


def _cmd_spectrum(cfg, out):
    model = cfg.spectral_model()
    ks = index_window(model, cfg.numerics.N)
    rows = [(int(k), eigenvalue(model, int(k))) for k in ks]
    path = os.path.join(out, "spectrum.csv")
    write_csv(path, "k,lambda", rows, cfg.hash())
    print(f"wrote {path} ({len(rows)} eigenvalues)")
    return 0


def _cmd_gaps(cfg, out):
    report = gap_analysis(cfg.spectral_model(), cfg.model.l, cfg.numerics.K)
    path = os.path.join(out, "gaps.json")
    write_json(path, dataclasses.asdict(report), cfg.hash())
    print(f"min_gap={report.min_gap:.6g} gamma={report.gamma_estimate:.6g} "
          f"distinct={report.distinct}")
    return 0


def _cmd_resonance(cfg, out):
    report = check_resonance(cfg.model.l, cfg.numerics.K)
    path = os.path.join(out, "resonance.json")
    write_json(path, {"ok": report.ok, "l": report.l, "window": report.window,
                      "violations": [list(v) for v in report.violations]},
               cfg.hash())
    if report.ok:
        print(f"l={report.l}: no resonant pairs up to K={report.window}")
    else:
        print(f"l={report.l}: resonance violated by pairs "
              f"{list(report.violations)}")
    return 0


def _cmd_coeffs(cfg, out):
    _, _, rows = _coefficient_rows(cfg)
    path = os.path.join(out, "coefficients.csv")
    write_csv(path, "k,re,im,abs,weighted_abs", rows, cfg.hash())
    print(f"wrote {path} ({len(rows)} coefficients)")
    return 0


def _cmd_bound_check(cfg, out):
    table, weight, _ = _coefficient_rows(cfg)
    report = verify_lower_bound(table, weight,
                                threshold=cfg.numerics.bound_threshold)
    path = os.path.join(out, "bound_check.json")
    write_json(path, {"passed": report.passed,
                      "worst_constant": report.worst_constant,
                      "argmin_index": report.argmin_index,
                      "weight": report.weight.value,
                      "threshold": report.threshold}, cfg.hash())
    print(f"passed={report.passed} worst_constant={report.worst_constant:.6g}"
          f" at k={report.argmin_index}")
    return 0


def _cmd_obstruction_scan(cfg, out):
    mu = cfg.piecewise_potential()
    report = neumann_obstruction_scan(mu, cfg.numerics.K)
    rows = zip(report.indices, report.weighted, report.running_min)
    path = os.path.join(out, "obstruction.csv")
    write_csv(path, "k,weighted_abs,running_min", rows, cfg.hash())
    print(f"initial level {report.initial_level:.6g}, running minimum "
          f"{report.final_min:.6g} after K={cfg.numerics.K}")
    return 0


def _cmd_simulate(cfg, out):
    model = cfg.spectral_model()
    mu = cfg.piecewise_potential()
    prop = Propagator(model, mu, cfg.numerics.N)
    u = _control_from_task(cfg)
    traj = prop.propagate(basis_state(model, cfg.numerics.N, cfg.model.l), u)
    ks = index_window(model, cfg.numerics.N)
    rows = []
    for i, t in enumerate(traj.times):
        for k, c in zip(ks, traj.states[i]):
            rows.append((t, int(k), c.real, c.imag))
    path = os.path.join(out, "trajectory.csv")
    write_csv(path, "t,k,re,im", rows, cfg.hash())
    weights = sobolev_weights(model, cfg.numerics.N, default_h1_norm(model))
    norm_rows = [(t, float(np.linalg.norm(traj.states[i])),
                  float(np.linalg.norm(weights * traj.states[i])))
                 for i, t in enumerate(traj.times)]
    npath = os.path.join(out, "norms.csv")
    write_csv(npath, "t,l2,h1", norm_rows, cfg.hash())
    drift = float(np.abs(traj.norms() - 1.0).max())
    print(f"wrote {path} and {npath}; max unitarity drift {drift:.3e}")
    return 0


def _cmd_moments_solve(cfg, out):
    targets = tuple(complex(re, im) for re, im in
                    zip(cfg.task.targets_re, cfg.task.targets_im))
    problem = MomentProblem(cfg.task.T, cfg.task.frequencies, targets)
    solution = solve(problem, condition_cap=cfg.numerics.condition_cap,
                     n_steps=cfg.numerics.n_steps)
    path = os.path.join(out, "moments.json")
    write_json(path, json.loads(solution.to_json()), cfg.hash())
    print(f"gram condition {solution.gram_condition:.3e}, max residual "
          f"{solution.residual_max:.3e}")
    return 0


def _cmd_steer(cfg, out):
    model = cfg.spectral_model()
    mu = cfg.piecewise_potential()
    N, K = cfg.numerics.N, cfg.numerics.K
    psi0 = basis_state(model, N, cfg.model.l)
    psi1 = perturbed_target(model, N, cfg.model.l, cfg.task.T,
                            cfg.task.delta, cfg.task.seed, K=K)
    problem = SteeringProblem(model, mu, cfg.model.l, cfg.task.T, psi0, psi1,
                              tolerance=cfg.numerics.tolerance,
                              max_iters=cfg.task.max_iters,
                              delta=cfg.task.delta)
    report = steer(problem, K=K, N=N, n_steps=cfg.numerics.n_steps)
    path = os.path.join(out, "steering.json")
    write_json(path, json.loads(report.to_json()), cfg.hash())
    print(f"converged={report.converged} after {report.iterations} "
          f"iterations, final error {report.final_error:.3e}")
    return 0


def _cmd_derivative_check(cfg, out):
    model = cfg.spectral_model()
    mu = cfg.piecewise_potential()
    rng = np.random.default_rng(cfg.task.seed)
    u = _band_limited(rng, cfg.task.T, cfg.numerics.n_steps)
    v = _band_limited(rng, cfg.task.T, cfg.numerics.n_steps)
    slope = endpoint_derivative_check(u, v, model, mu, cfg.model.l,
                                      cfg.task.T, N=cfg.numerics.N)
    path = os.path.join(out, "derivative_check.json")
    write_json(path, {"slope": slope, "l": cfg.model.l, "T": cfg.task.T,
                      "seed": cfg.task.seed}, cfg.hash())
    print(f"finite-difference slope {slope:.4f}")
    return 0


def _cmd_hermite_check(cfg, out):
    rows = []
    for a in cfg.task.a_values:
        for k in range(1, cfg.task.kmax + 1):
            rep = harmonic_coefficient_identity(float(a), k)
            rows.append((float(a), k, rep.lhs.real, rep.rhs.real,
                         rep.abs_error))
    ipath = os.path.join(out, "hermite_identity.csv")
    write_csv(ipath, "a,k,lhs,rhs,abs_error", rows, cfg.hash())
    x = np.linspace(-10.0, 10.0, 4001)
    phi = hermite_function_values(500, x)
    bound_rows = [(k, float(k**0.25 * np.abs(phi[k]).max()))
                  for k in range(10, 501)]
    bpath = os.path.join(out, "hermite_bound.csv")
    write_csv(bpath, "k,scaled_max", bound_rows, cfg.hash())
    worst = max(r[-1] for r in rows)
    print(f"max identity error {worst:.3e}; scaled sup-norm range "
          f"[{min(r[1] for r in bound_rows):.4f}, "
          f"{max(r[1] for r in bound_rows):.4f}]")
    return 0


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "gaps": _cmd_gaps,
    "resonance": _cmd_resonance,
    "coeffs": _cmd_coeffs,
    "bound-check": _cmd_bound_check,
    "obstruction-scan": _cmd_obstruction_scan,
    "simulate": _cmd_simulate,
    "moments-solve": _cmd_moments_solve,
    "steer": _cmd_steer,
    "derivative-check": _cmd_derivative_check,
    "hermite-check": _cmd_hermite_check,
}


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON experiment configuration")
    parser.add_argument("--model", choices=[m.value for m in ModelKind])
    parser.add_argument("--drift", type=float)
    parser.add_argument("--l", type=int)
    parser.add_argument("--N", type=int)
    parser.add_argument("--K", type=int)
    parser.add_argument("--n-steps", type=int)
    parser.add_argument("--T", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--kmax", type=int)
    parser.add_argument("--weight",
                        choices=[w.value for w in BoundWeight])
    parser.add_argument("--preset", help="potential preset name")
    parser.add_argument("--a", type=float,
                        help="breakpoint of the half-line step potential")
    parser.add_argument("--output-dir", "-o")


def _apply_overrides(cfg: ExperimentConfig,
                     args: argparse.Namespace) -> ExperimentConfig:
    model = cfg.model
    if args.model is not None:
        model = dataclasses.replace(model, kind=args.model)
    if args.drift is not None:
        model = dataclasses.replace(model, drift=args.drift)
    if args.l is not None:
        model = dataclasses.replace(model, l=args.l)
    numerics = cfg.numerics
    for name, attr in (("N", "N"), ("K", "K"), ("n_steps", "n_steps")):
        value = getattr(args, attr)
        if value is not None:
            numerics = dataclasses.replace(numerics, **{name: value})
    task = cfg.task
    for name in ("T", "delta", "seed", "kmax", "weight"):
        value = getattr(args, name)
        if value is not None:
            task = dataclasses.replace(task, **{name: value})
    potential = cfg.potential
    if args.preset is not None:
        potential = dataclasses.replace(potential, preset=args.preset)
    if args.a is not None:
        potential = dataclasses.replace(potential, a=args.a)
    output_dir = cfg.output_dir
    if os.environ.get(OUTPUT_DIR_ENV):
        output_dir = os.environ[OUTPUT_DIR_ENV]
    if args.output_dir is not None:
        output_dir = args.output_dir
    return ExperimentConfig(model=model, potential=potential,
                            numerics=numerics, task=task,
                            output_dir=output_dir)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bilinctrl",
        description="Spectral experiments for bilinear quantum control: "
                    "spectra, coupling coefficients, unitary simulation, "
                    "moment problems, and local steering.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        _add_overrides(p)
    args = parser.parse_args(argv)
    try:
        cfg = (load_config_file(args.config) if args.config
               else ExperimentConfig())
        cfg = _apply_overrides(cfg, args)
        os.makedirs(cfg.output_dir, exist_ok=True)
        return _COMMANDS[args.command](cfg, cfg.output_dir)
    except (BilinearControlError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

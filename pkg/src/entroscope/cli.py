"""Command-line experiment runner.

Subcommands select the pipeline (overriding the config's ``pipeline``
key); every pipeline reads one JSON config, writes ``report.csv`` and
``report.json`` into the output directory, and the simulate pipeline
additionally writes the binary ensemble snapshot. Runs are deterministic
given the seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import covering, entropy, functionals, sampling, spectral
from .config import PIPELINES, ConfigError, ExperimentConfig, load_config
from .dynamics import DivergenceError, evolve, generate_ensemble, random_initial_state
from .field import Field, default_grid
from .params import gamma_value
from .reports import emit_report
from .snapshots import load_snapshot, save_snapshot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3


def _ensemble_for(cfg: ExperimentConfig, count: int | None = None):
    a = cfg.analysis
    if a.snapshot is not None:
        return load_snapshot(a.snapshot, cfg.make_model())
    size = count if count is not None else a.ensemble_size
    return generate_ensemble(size, cfg.make_model(), a.burn_in, a.seed,
                             cfg.make_grid())


def pipeline_simulate(cfg: ExperimentConfig, out_dir: Path) -> list[dict]:
    ens = _ensemble_for(cfg)
    path = out_dir / "ensemble.bin"
    save_snapshot(ens, path)
    print(f"wrote {path}")
    rows = []
    for i, m in enumerate(ens.members):
        rows.append({
            "member": i,
            "sup_u": float(np.abs(m.u.samples).max()),
            "sup_v": float(np.abs(m.v.samples).max()),
            "loc2_norm": functionals.sobolev_norm(
                "loc2", m, cfg.analysis.delta, cfg.model.eta),
        })
    return rows


def pipeline_functionals(cfg: ExperimentConfig, out_dir: Path) -> list[dict]:
    p = cfg.make_model()
    grid = cfg.make_grid()
    count = min(cfg.analysis.ensemble_size, 8)
    rows = []
    for i in range(count):
        state = random_initial_state(grid, np.random.default_rng([cfg.analysis.seed, i]))
        traj = evolve(state, p, t_final=40.0, sample_every=0.5)
        series = [(t, functionals.coercive_F0(s, p))
                  for t, s in zip(traj.times, traj.states)]
        fit = functionals.fit_decay_rate(series, "affine_ode")
        rows.append({
            "trajectory": i,
            "f0_initial": series[0][1],
            "f0_final": series[-1][1],
            "rate": fit.rate,
            "offset": fit.offset,
            "violation_fraction": fit.residual,
        })
    return rows


def pipeline_spectral_checks(cfg: ExperimentConfig, out_dir: Path) -> list[dict]:
    grid = cfg.make_grid()
    delta = cfg.analysis.delta
    rows = []
    for a in (4.0, 8.0, 16.0):
        for d in (delta, delta / 2.0):
            est_q = spectral.weighted_operator_norm(spectral.lowpass(a), d, 30, grid)
            est_p = spectral.weighted_operator_norm(spectral.highpass(a), d, 30, grid)
            rows.append({
                "a": a, "delta": d,
                "lowpass_norm": est_q.value, "lowpass_stable": est_q.stable,
                "highpass_norm": est_p.value, "highpass_stable": est_p.stable,
            })
    c_fit = spectral.fit_high_momentum_constant(grid, delta)
    gamma = gamma_value(cfg.model.eta, cfg.analysis.k_star, c_fit)
    for row in rows:
        row["c_high_momentum"] = c_fit
        row["gamma"] = gamma
    return rows


def pipeline_sampling_checks(cfg: ExperimentConfig, out_dir: Path) -> list[dict]:
    sigma = 8.0
    rows = []
    for J in (100, 200, 400):
        pts = np.arange(-J, J + 1) * (np.pi / (2.0 * sigma))
        values = np.sin(sigma * pts / 2.0)
        ss = sampling.SampleSet(sigma, pts, values, J)
        x = np.linspace(-1.0, 1.0, 801)
        err = float(np.abs(sampling.cartwright_reconstruct(ss, x)
                           - np.sin(sigma * x / 2.0)).max())
        rows.append({"check": "cartwright", "J": J, "sup_error": err})

    k_star = 4.0
    grid = default_grid()
    rng = np.random.default_rng(cfg.analysis.seed)
    raw = Field(grid, rng.standard_normal(grid.n))
    f = spectral.apply(spectral.lowpass(k_star), raw)
    L = 10.0
    xi_list = [0.0, 0.5 * L, 0.9 * L]
    residuals = sampling.remainder_profile(f, k_star, L, xi_list,
                                           cfg.analysis.delta)
    for xi, res in zip(xi_list, residuals):
        rows.append({"check": "remainder", "L": L, "xi": xi, "residual": res})
    return rows


def pipeline_cover(cfg: ExperimentConfig, out_dir: Path) -> list[dict]:
    eps = min(cfg.analysis.eps_list)
    bounds = covering.FunctionClassBounds(eps=eps, A=2 * eps, B=2 * eps, C=1.0)
    cover = covering.build_pl_cover(bounds)
    sc = bounds.scales
    rows = [{
        "eps": eps, "A": bounds.A, "B": bounds.B, "C": bounds.C,
        "R": bounds.R, "m_star": bounds.m_star, "n_star": sc.n_star,
        "xi": sc.xi, "tau": sc.tau, "eta_quantum": sc.eta,
        "log10_cardinality": (2 * bounds.m_star - 1)
        * np.log10(2 * sc.n_star + 1),
    }]
    rng = np.random.default_rng(cfg.analysis.seed)
    for trial in range(3):
        amp = 0.45 * bounds.A
        k1, k2 = rng.uniform(0.05, 0.2, 2)
        phase = rng.uniform(0, 2 * np.pi, 2)
        fn = lambda x: amp * (np.sin(k1 * x + phase[0]) + np.sin(k2 * x + phase[1])) / 2.0
        fp = lambda x: amp * (k1 * np.cos(k1 * x + phase[0]) + k2 * np.cos(k2 * x + phase[1])) / 2.0
        res = cover.match(fn, fp)
        x = np.linspace(-bounds.R, bounds.R, 4001)
        dist = max(
            float(np.abs(fn(x) - res.atom.evaluate(x)).max()),
            float(np.abs(fp(x) - res.atom.slope_at(x)).max()),
        )
        rows.append({"eps": eps, "trial": trial, "march_w1inf_distance": dist})
    return rows


def pipeline_entropy(cfg: ExperimentConfig, out_dir: Path) -> list[dict]:
    ens = _ensemble_for(cfg)
    rows = []
    for eps in cfg.analysis.eps_list:
        est = entropy.epsilon_entropy_per_length(ens, eps, cfg.analysis.lengths)
        for L, count in zip(est.lengths, est.counts):
            rows.append({
                "eps": eps, "L": L, "count": count,
                "slope": est.slope, "bound_const": est.bound_const,
                "degenerate": est.degenerate,
            })
    return rows


def pipeline_topo_entropy(cfg: ExperimentConfig, out_dir: Path) -> list[dict]:
    ens = _ensemble_for(cfg)
    p = cfg.make_model()
    a = cfg.analysis
    report = entropy.topological_entropy_report(ens, p, a.eps_list, a.T,
                                                a.tau_step, a.lengths)
    rows = []
    for eps in report.eps_list:
        for L in report.lengths:
            rows.append({
                "eps": eps, "L": L,
                "rate": report.rates[(eps, L)],
                "final_count": report.counts[(eps, L)][-1],
                "h_per_eps": report.h_per_eps[eps],
                "h_est": report.h_est,
            })
    try:
        consts = entropy.fit_difference_constants(ens, p, a.k_star, a.delta)
        fit = entropy.fit_time_unit(**consts)
        rows.append({
            "eps": float("nan"), "L": float("nan"),
            "rate": float("nan"), "final_count": 0,
            "h_per_eps": float("nan"), "h_est": report.h_est,
            "tau_star": fit.tau_star, "kappa": fit.kappa,
        })
    except ValueError:
        pass
    return rows


_PIPELINE_FNS = {
    "simulate": pipeline_simulate,
    "functionals": pipeline_functionals,
    "spectral-checks": pipeline_spectral_checks,
    "sampling-checks": pipeline_sampling_checks,
    "cover": pipeline_cover,
    "entropy": pipeline_entropy,
    "topo-entropy": pipeline_topo_entropy,
}


def run_experiment(config_path, pipeline: str | None = None,
                   out_dir=None, seed: int | None = None,
                   threads: int | None = None) -> int:
    """Execute one pipeline; returns a process exit status."""
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if pipeline is not None:
        cfg.pipeline = pipeline
    if seed is not None:
        cfg.analysis.seed = seed
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if threads is not None:
        import numba

        numba.set_num_threads(max(1, threads))
    out = Path(out_dir) if out_dir is not None else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    try:
        rows = _PIPELINE_FNS[cfg.pipeline](cfg, out)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ValueError, OSError) as exc:
        print(f"error: {cfg.pipeline} pipeline: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for fmt in ("csv", "json"):
        path = out / f"report.{fmt}"
        emit_report(rows, fmt, path)
        print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="entroscope",
        description="damped hyperbolic field simulator and entropy estimator",
    )
    sub = parser.add_subparsers(dest="pipeline", required=True)
    for name in PIPELINES:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON config path")
        sp.add_argument("--out-dir", default=None, help="artifact directory")
        sp.add_argument("--seed", type=int, default=None, help="seed override")
        sp.add_argument("--threads", type=int, default=None,
                        help="stepper thread count")
    args = parser.parse_args(argv)
    return run_experiment(args.config, pipeline=args.pipeline,
                          out_dir=args.out_dir, seed=args.seed,
                          threads=args.threads)


if __name__ == "__main__":
    raise SystemExit(main())

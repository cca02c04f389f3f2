"""Experiment configuration: JSON file, validated dataclasses.

Validation collects every violated precondition and reports them together
with the constraint formula, e.g.

    model.eta = 0.2 violates eta < eta0 = 1/sqrt(40) ~ 0.158114
    analysis.delta = 0.05 violates delta <= 1/80 = 0.0125
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .dynamics import ModelParams
from .field import Grid
from .params import DELTA_MAX, ETA0_MAX

PIPELINES = (
    "simulate",
    "functionals",
    "spectral-checks",
    "sampling-checks",
    "cover",
    "entropy",
    "topo-entropy",
)


class ConfigError(ValueError):
    pass


@dataclass
class GridConfig:
    x_min: float = -40.0
    x_max: float = 40.0
    n: int = 4096


@dataclass
class ModelConfig:
    eta: float = 0.1
    alpha: float = 0.25
    mu_f1: float = 0.05
    cfl_factor: float = 0.5
    scheme: str = "finite_difference"
    dt: float | None = None


@dataclass
class AnalysisConfig:
    delta: float = DELTA_MAX
    k_star: float = 10.0
    eps_list: list = dc_field(default_factory=lambda: [0.2, 0.1, 0.05])
    lengths: list = dc_field(default_factory=lambda: [10.0, 20.0, 40.0])
    burn_in: float = 200.0
    ensemble_size: int = 32
    seed: int = 7
    T: float = 20.0
    tau_step: float = 2.0
    n_quant: int | None = None
    snapshot: str | None = None


@dataclass
class ExperimentConfig:
    pipeline: str = "simulate"
    grid: GridConfig = dc_field(default_factory=GridConfig)
    model: ModelConfig = dc_field(default_factory=ModelConfig)
    analysis: AnalysisConfig = dc_field(default_factory=AnalysisConfig)

    def validate(self) -> None:
        problems: list[str] = []
        g, m, a = self.grid, self.model, self.analysis
        if self.pipeline not in PIPELINES:
            problems.append(
                f"pipeline = {self.pipeline!r} unknown; choose one of {', '.join(PIPELINES)}"
            )
        if g.x_max <= g.x_min:
            problems.append(f"grid domain [{g.x_min}, {g.x_max}] is empty")
        if g.n < 8 or g.n % 2:
            problems.append(f"grid.n = {g.n} violates n >= 8 and even")
        if not 0.0 < m.eta < ETA0_MAX:
            problems.append(
                f"model.eta = {m.eta} violates eta < eta0 = 1/sqrt(40) ~ {ETA0_MAX:.6f} "
                "(damping threshold for the high-frequency decay machinery)"
            )
        if not 0.0 < m.alpha <= 0.5:
            problems.append(f"model.alpha = {m.alpha} violates 0 < alpha <= 1/2")
        if m.mu_f1 <= 0:
            problems.append(f"model.mu_f1 = {m.mu_f1} must be positive")
        if not 0.0 < m.cfl_factor <= 0.5:
            problems.append(f"model.cfl_factor = {m.cfl_factor} violates 0 < cfl <= 1/2")
        if m.scheme not in ("spectral", "finite_difference"):
            problems.append(f"model.scheme = {m.scheme!r} unknown")
        if g.x_max > g.x_min and g.n >= 8 and not g.n % 2 \
                and 0 < m.eta < ETA0_MAX and m.dt is not None:
            bound = min(m.cfl_factor * m.eta * (g.x_max - g.x_min) / g.n,
                        0.5 * m.eta ** 2)
            if m.dt > bound:
                problems.append(
                    f"model.dt = {m.dt} violates dt <= min(cfl*eta*dx, eta^2/2) "
                    f"= {bound:.3e} (wave speed 1/eta and stiff relaxation)"
                )
        if not 0.0 < a.delta <= DELTA_MAX:
            problems.append(
                f"analysis.delta = {a.delta} violates delta <= 1/80 = {DELTA_MAX} "
                "(weight slope |h'/h| <= 2*delta must stay below 1/40)"
            )
        if a.k_star <= 0:
            problems.append(f"analysis.k_star = {a.k_star} must be positive")
        elif g.n >= 8 and g.x_max > g.x_min:
            nyquist = math.pi * g.n / (g.x_max - g.x_min)
            if a.k_star > nyquist / 2:
                problems.append(
                    f"analysis.k_star = {a.k_star} violates k_star <= nyquist/2 "
                    f"= {nyquist / 2:.4g} (cutoff must be resolved on the grid)"
                )
        if not a.eps_list or any(e <= 0 or e >= 1 for e in a.eps_list):
            problems.append(f"analysis.eps_list = {a.eps_list} needs radii in (0, 1)")
        if not a.lengths or any(b <= c for c, b in zip(a.lengths, a.lengths[1:])):
            problems.append(f"analysis.lengths = {a.lengths} must be increasing")
        if a.burn_in < 0:
            problems.append(f"analysis.burn_in = {a.burn_in} must be >= 0")
        if a.ensemble_size < 1:
            problems.append(f"analysis.ensemble_size = {a.ensemble_size} must be >= 1")
        if a.seed < 0:
            problems.append(f"analysis.seed = {a.seed} must be >= 0")
        if a.tau_step <= 0:
            problems.append(f"analysis.tau_step = {a.tau_step} must be positive")
        elif a.T <= 0 or abs(round(a.T / a.tau_step) * a.tau_step - a.T) > 1e-9:
            problems.append(
                f"analysis.T = {a.T} must be a positive integer multiple of "
                f"tau_step = {a.tau_step}"
            )
        if a.n_quant is not None and a.n_quant < 1:
            problems.append(f"analysis.n_quant = {a.n_quant} must be >= 1")
        if problems:
            raise ConfigError("invalid configuration:\n  " + "\n  ".join(problems))

    def make_grid(self) -> Grid:
        return Grid(self.grid.x_min, self.grid.x_max, self.grid.n)

    def make_model(self) -> ModelParams:
        m = self.model
        return ModelParams(eta=m.eta, alpha=m.alpha, mu_f1=m.mu_f1, dt=m.dt,
                           cfl_factor=m.cfl_factor, scheme=m.scheme)


def _merge(dc, data: dict, section: str):
    for key, value in data.items():
        if not hasattr(dc, key):
            raise ConfigError(f"unknown key {section}.{key}")
        setattr(dc, key, value)
    return dc


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    cfg = ExperimentConfig()
    for section, payload in data.items():
        if section == "pipeline":
            cfg.pipeline = payload
        elif section == "grid":
            _merge(cfg.grid, payload, "grid")
        elif section == "model":
            _merge(cfg.model, payload, "model")
        elif section == "analysis":
            _merge(cfg.analysis, payload, "analysis")
        else:
            raise ConfigError(f"unknown config section {section!r}")
    cfg.validate()
    return cfg

"""Experiment specs, presets, config files, and CSV/manifest output."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .metrics import IterationMetrics
from .sim import PopulationConfig, SimConfig, SimReport, TcpLinkConfig, run_simulation

CSV_HEADER = ("iteration", "delta_r_raw", "delta_r_norm", "utilization")
MANIFEST_NAME = "manifest.json"


class SpecError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    base: SimConfig = field(default_factory=SimConfig)
    alpha: list[float] = field(default_factory=list)
    estimator_kind: list[str] = field(default_factory=list)
    population: list[str] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0])
    output_dir: str = "results"
    max_runs: int = 64

    def points(self) -> list[SimConfig]:
        """Cross product of sweeps and seeds; empty sweeps keep the base value."""
        if not self.seeds:
            raise SpecError("at least one seed is required")
        alphas = self.alpha or [self.base.alpha]
        kinds = self.estimator_kind or [self.base.estimator_kind]
        pops = self.population or [self.base.population.mode]
        combos = list(itertools.product(pops, kinds, alphas, self.seeds))
        if len(combos) > self.max_runs:
            raise SpecError(f"{len(combos)} runs exceed max_runs={self.max_runs}")
        out = []
        for pop, kind, alpha, seed in combos:
            cfg = dataclasses.replace(
                self.base, alpha=alpha, estimator_kind=kind, rng_seed=seed,
                population=dataclasses.replace(self.base.population, mode=pop))
            cfg.validate()
            out.append(cfg)
        return out


PRESETS = {
    "paper-homogeneous": dict(
        base=dict(node_count=200, iterations=500, acquaintance_iterations=50, delta=0.3,
                  population=dict(mode="homogeneous")),
        alpha=[0.1, 0.3], estimator_kind=["blue", "baseline"],
        population=["homogeneous"], seeds=[1, 2, 3, 4, 5]),
    "paper-heterogeneous": dict(
        base=dict(node_count=200, iterations=500, acquaintance_iterations=50, delta=0.3,
                  population=dict(mode="heterogeneous")),
        alpha=[0.1, 0.3], estimator_kind=["blue", "baseline"],
        population=["heterogeneous"], seeds=[1, 2, 3, 4, 5]),
}


def _build(cls, data: dict[str, Any], where: str):
    if not isinstance(data, dict):
        raise SpecError(f"{where}: expected a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise SpecError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if cls is SimConfig and key == "population":
            value = _build(PopulationConfig, value, f"{where}.population")
        elif cls is SimConfig and key == "tcp":
            value = _build(TcpLinkConfig, value, f"{where}.tcp")
        elif cls is ExperimentSpec and key == "base":
            value = _build(SimConfig, value, "base")
        elif key.endswith("_range"):
            value = tuple(value)
        kwargs[key] = value
    return cls(**kwargs)


def spec_from_dict(data: dict[str, Any]) -> ExperimentSpec:
    data = dict(data)
    if "sweeps" in data:
        sweeps = data.pop("sweeps") or {}
        for key in ("alpha", "estimator_kind", "population"):
            if key in sweeps:
                data[key] = list(sweeps.pop(key))
        if sweeps:
            raise SpecError(f"sweeps: unknown keys {sorted(sweeps)}")
    return _build(ExperimentSpec, data, "spec")


def preset_spec(name: str) -> ExperimentSpec:
    try:
        return spec_from_dict(PRESETS[name])
    except KeyError:
        raise SpecError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = v
    return out


def load_spec(path: str | Path | None = None, preset: str | None = None) -> ExperimentSpec:
    """Read a YAML experiment file, optionally layered over a preset."""
    data: dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise SpecError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        data = PRESETS[preset]
    if path is not None:
        with open(path) as fh:
            loaded = yaml.safe_load(fh) or {}
        data = merge(data, loaded)
    return spec_from_dict(data)


def spec_to_dict(spec: ExperimentSpec) -> dict[str, Any]:
    d = dataclasses.asdict(spec)
    for key in ("rtt_range", "loss_range"):
        d["base"]["tcp"][key] = list(d["base"]["tcp"][key])
    sweeps = {k: d.pop(k) for k in ("alpha", "estimator_kind", "population")}
    d["sweeps"] = sweeps
    return d


def config_hash(config: SimConfig) -> str:
    blob = json.dumps(dataclasses.asdict(config), sort_keys=True, default=list)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(x: float) -> str:
    return format(x, ".17g")


def emit_series(report: SimReport | list[IterationMetrics], path: str | Path) -> Path:
    metrics = report.metrics if isinstance(report, SimReport) else report
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for m in metrics:
            w.writerow((m.iteration, _fmt(m.delta_r), _fmt(m.delta_r_norm), _fmt(m.utilization)))
    return path


def read_series(path: str | Path) -> list[IterationMetrics]:
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows)
        if tuple(header) != CSV_HEADER:
            raise SpecError(f"{path}: unexpected header {header}")
        return [IterationMetrics(int(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in rows]


def series_name(config: SimConfig) -> str:
    return (f"{config.population.mode}_{config.estimator_kind}"
            f"_a{config.alpha:g}_s{config.rng_seed}.csv")


def run_experiment(spec: ExperimentSpec, progress=None) -> list[Path]:
    """Run every sweep point and write one CSV per run plus ``manifest.json``.

    Returns the written paths, manifest last. ``progress`` is called with
    ``(config, report)`` after each run.
    """
    points = spec.points()
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    paths = []
    for cfg in points:
        report = run_simulation(cfg)
        path = emit_series(report, out / series_name(cfg))
        paths.append(path)
        manifest.append(dict(file=path.name, seed=cfg.rng_seed, estimator=cfg.estimator_kind,
                             alpha=cfg.alpha, population=cfg.population.mode,
                             config_hash=config_hash(cfg)))
        if progress is not None:
            progress(cfg, report)
    mpath = out / MANIFEST_NAME
    mpath.write_text(json.dumps(manifest, indent=2) + "\n")
    paths.append(mpath)
    return paths

"""Parameter sweeps: JSON configs in, deterministic CSV + manifest out.

Grid axes are enumerated in the fixed order (d, k, theta, Jtau); an `N`
axis selects which measurement rounds are emitted (the engine always runs
to the largest requested round).  Rows are sorted by (grid index, step,
site) regardless of worker count, floats are written with 17 significant
digits, and reruns of the same config are byte-identical.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .evolution import BathSpec
from .hamiltonians import BBHSpec, SpinStarSpec, SystemLayout, XXZSpec
from .oracles import fidelity_bbh_rank1_d3, fidelity_xx_rank1
from .protocol import ExtinctionError, ProtocolConfig, zeno_run

COLUMNS = (
    "preset_id", "topology", "model", "d", "L", "k", "J", "Delta_or_theta",
    "tau", "N_step", "site", "fidelity", "step_probability",
    "cum_probability", "log_cum_probability", "extinct",
)


class ConfigError(ValueError):
    """Config validation failure; the message names the offending field path."""


@dataclass(frozen=True)
class SweepSpec:
    """A base protocol configuration plus named parameter grids."""

    base: ProtocolConfig
    preset_id: str = "custom"
    d_axis: Optional[tuple[int, ...]] = None
    k_axis: Optional[tuple[int, ...]] = None
    theta_axis: Optional[tuple[float, ...]] = None
    jtau_axis: Optional[tuple[float, ...]] = None
    recorded_steps: Optional[tuple[int, ...]] = None  # None -> rounds 1..base N

    def __post_init__(self):
        for name, label in (("d_axis", "d"), ("k_axis", "k"), ("theta_axis", "theta"),
                            ("jtau_axis", "Jtau"), ("recorded_steps", "N")):
            ax = getattr(self, name)
            if ax is not None and len(ax) == 0:
                raise ConfigError(f"axes.{label}: grid must be non-empty")
        if self.theta_axis is not None and self.base.hamiltonian.model != "bbh":
            raise ConfigError("axes.theta: only meaningful for the bbh model")
        if self.jtau_axis is not None and self.base.hamiltonian.J == 0:
            raise ConfigError("axes.Jtau: base.J must be nonzero to convert Jtau to tau")

    def grid(self) -> list[tuple]:
        axes = [
            self.d_axis if self.d_axis is not None else (None,),
            self.k_axis if self.k_axis is not None else (None,),
            self.theta_axis if self.theta_axis is not None else (None,),
            self.jtau_axis if self.jtau_axis is not None else (None,),
        ]
        points = [(d, k, th, jt) for d in axes[0] for k in axes[1]
                  for th in axes[2] for jt in axes[3]]
        return points

    def config_at(self, point: tuple) -> ProtocolConfig:
        d, k, theta, jtau = point
        base = self.base
        layout = base.layout
        ham = base.hamiltonian
        if d is not None:
            layout = SystemLayout(layout.topology, layout.L, int(d))
        if theta is not None:
            ham = BBHSpec(J=ham.J, theta=float(theta), h=ham.h)
        tau = base.tau if jtau is None else float(jtau) / ham.J
        n_max = base.n_measurements if self.recorded_steps is None \
            else max(self.recorded_steps)
        rank = base.rank if k is None else int(k)
        return ProtocolConfig(layout=layout, hamiltonian=ham, tau=tau,
                              n_measurements=n_max, rank=rank,
                              regulator_prep=base.regulator_prep,
                              target_betas=base.target_betas, bath=base.bath)

    def steps_for(self, config: ProtocolConfig) -> list[int]:
        if self.recorded_steps is not None:
            return sorted(set(int(n) for n in self.recorded_steps))
        if config.n_measurements == 0:
            return [0]
        return list(range(1, config.n_measurements + 1))


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _point_rows(spec: SweepSpec, index: int) -> list[tuple]:
    point = spec.grid()[index]
    config = spec.config_at(point)
    steps = spec.steps_for(config)
    ham = config.hamiltonian
    dort = "" if ham.model == "spin_star" else (
        ham.Delta if ham.model == "xxz" else ham.theta)
    meta = (spec.preset_id, config.layout.topology, ham.model, config.layout.d,
            config.layout.L, config.rank, _fmt(ham.J), _fmt(dort) if dort != "" else "",
            _fmt(config.tau))
    rows: list[tuple] = []

    def emit(step, site, fid, p_step, p_cum, log_cum, extinct):
        rows.append(meta + (step, site, _fmt(fid), _fmt(p_step), _fmt(p_cum),
                            _fmt(log_cum), extinct))

    try:
        record = zeno_run(config, retain_state=False)
        extinction = None
    except ExtinctionError as err:
        record = err.partial
        extinction = err
    cum = record.cumulative_probabilities
    for n in steps:
        if n == 0:
            for site in range(1, config.layout.L + 1):
                emit(0, site, record.initial_fidelities[site - 1], 1.0, 1.0, 0.0, 0)
            continue
        if n <= len(record.steps):
            i = n - 1
            for site in range(1, config.layout.L + 1):
                emit(n, site, record.fidelities[i, site - 1], record.step_probabilities[i],
                     cum[i], record.log_cumulative[i], 0)
    if extinction is not None:
        log_prev = record.log_cumulative[-1] if len(record.steps) else 0.0
        dead_log = log_prev + (math.log(extinction.probability)
                               if extinction.probability > 0 else -math.inf)
        for site in range(1, config.layout.L + 1):
            emit(extinction.step, site, math.nan, extinction.probability,
                 math.exp(dead_log) if math.isfinite(dead_log) else 0.0,
                 dead_log, 1)
    return rows


def _run_point(args) -> tuple[int, list[tuple]]:
    spec, index = args
    return index, _point_rows(spec, index)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[tuple]:
    """All result rows of one sweep, in deterministic (grid, step, site) order."""
    indices = range(len(spec.grid()))
    if workers <= 1:
        chunks = [_point_rows(spec, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_run_point, [(spec, i) for i in indices]))
        chunks = [results[i] for i in indices]
    return [row for chunk in chunks for row in chunk]


# ---------------------------------------------------------------------------
# JSON config ingestion
# ---------------------------------------------------------------------------

_MODELS = ("xxz", "bbh", "spin_star")


def _require(mapping, key, types, path, default=None, required=False):
    if key not in mapping or mapping[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}: required field missing")
        return default
    value = mapping[key]
    if not isinstance(value, types):
        raise ConfigError(f"{path}.{key}: expected {types}, got {type(value).__name__}")
    return value


def _parse_beta(value, path):
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return math.inf
        raise ConfigError(f"{path}: unrecognized beta {value!r}")
    if isinstance(value, (int, float)) and value >= 0:
        return float(value)
    raise ConfigError(f"{path}: beta must be a non-negative number or 'inf'")


def parse_config(doc: dict, preset_id: Optional[str] = None) -> SweepSpec:
    """Validate a parsed JSON document and build the SweepSpec."""
    if not isinstance(doc, dict):
        raise ConfigError("config root: expected a JSON object")
    base = _require(doc, "base", dict, "config", required=True)
    topology = _require(base, "topology", str, "base", default="chain")
    if topology not in ("chain", "star"):
        raise ConfigError(f"base.topology: must be 'chain' or 'star', got {topology!r}")
    model = _require(base, "model", str, "base", required=True)
    if model not in _MODELS:
        raise ConfigError(f"base.model: must be one of {_MODELS}, got {model!r}")
    d = _require(base, "d", int, "base", required=True)
    L = _require(base, "L", int, "base", default=1)
    J = float(_require(base, "J", (int, float), "base", default=1.0))
    h = float(_require(base, "h", (int, float), "base", default=1.0))
    tau = float(_require(base, "tau", (int, float), "base", default=1.0))
    N = _require(base, "N", int, "base", required=True)
    k = _require(base, "k", int, "base", default=1)
    prep = _require(base, "regulator_prep", int, "base")

    try:
        layout = SystemLayout(topology, L, d)
        if model == "xxz":
            ham = XXZSpec(J=J, Delta=float(_require(base, "Delta", (int, float), "base", default=0.0)), h=h)
        elif model == "bbh":
            ham = BBHSpec(J=J, theta=float(_require(base, "theta", (int, float), "base", default=0.0)), h=h)
        else:
            ham = SpinStarSpec(J=J, h=h)

        betas = base.get("target_betas")
        if betas is not None:
            if not isinstance(betas, list):
                raise ConfigError("base.target_betas: expected a list")
            betas = tuple(_parse_beta(b, f"base.target_betas[{i}]") for i, b in enumerate(betas))

        bath = None
        bath_doc = _require(base, "bath", dict, "base")
        if bath_doc is not None:
            bath = BathSpec(
                temperature=float(_require(bath_doc, "temperature", (int, float), "base.bath", required=True)),
                gamma=float(_require(bath_doc, "gamma", (int, float), "base.bath", required=True)),
                omega=float(_require(bath_doc, "omega", (int, float), "base.bath", default=h)),
                site=_require(bath_doc, "site", int, "base.bath"))

        axes = _require(doc, "axes", dict, "config", default={})
        known = {"d", "k", "theta", "Jtau", "N"}
        for name in axes:
            if name not in known:
                raise ConfigError(f"axes.{name}: unknown axis (known: {sorted(known)})")

        def axis(name, kind):
            values = axes.get(name)
            if values is None:
                return None
            if not isinstance(values, list) or len(values) == 0:
                raise ConfigError(f"axes.{name}: grid must be a non-empty list")
            try:
                return tuple(kind(v) for v in values)
            except (TypeError, ValueError):
                raise ConfigError(f"axes.{name}: entries must be {kind.__name__}")

        config = ProtocolConfig(layout=layout, hamiltonian=ham, tau=tau,
                                n_measurements=N, rank=k, regulator_prep=prep,
                                target_betas=betas, bath=bath)
        return SweepSpec(
            base=config,
            preset_id=preset_id or _require(doc, "preset_id", str, "config", default="custom"),
            d_axis=axis("d", int), k_axis=axis("k", int),
            theta_axis=axis("theta", float), jtau_axis=axis("Jtau", float),
            recorded_steps=axis("N", int))
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(f"base: {err}") from err


def load_config(path) -> SweepSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file {path}: invalid JSON ({err})") from err
    return parse_config(doc)


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _json_safe(obj):
    if isinstance(obj, dict):
        return {key: _json_safe(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def spec_manifest(spec: SweepSpec) -> dict:
    base = spec.base
    ham = base.hamiltonian
    doc = {
        "preset_id": spec.preset_id,
        "base": {
            "topology": base.layout.topology, "model": ham.model,
            "d": base.layout.d, "L": base.layout.L, "J": ham.J, "h": ham.h,
            "tau": base.tau, "N": base.n_measurements, "k": base.rank,
            "regulator_prep": base.regulator_prep,
            "target_betas": list(base.betas),
        },
        "axes": {},
    }
    if ham.model == "xxz":
        doc["base"]["Delta"] = ham.Delta
    if ham.model == "bbh":
        doc["base"]["theta"] = ham.theta
    if base.bath is not None:
        doc["base"]["bath"] = {
            "temperature": base.bath.temperature, "gamma": base.bath.gamma,
            "omega": base.bath.omega, "site": base.bath.site}
    for name, ax in (("d", spec.d_axis), ("k", spec.k_axis), ("theta", spec.theta_axis),
                     ("Jtau", spec.jtau_axis), ("N", spec.recorded_steps)):
        if ax is not None:
            doc["axes"][name] = list(ax)
    return _json_safe(doc)


def write_results(sweeps: Sequence[SweepSpec], out_dir, workers: int = 1) -> tuple[Path, Path]:
    """Run every sweep, write results.csv and manifest.json; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    all_rows: list[tuple] = []
    for spec in sweeps:
        all_rows.extend(run_sweep(spec, workers=workers))
    csv_path = out / "results.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        writer.writerows(all_rows)
    manifest = {
        "engine": "zenocool",
        "version": __version__,
        "columns": list(COLUMNS),
        "rows": len(all_rows),
        "sweeps": [spec_manifest(s) for s in sweeps],
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    return csv_path, manifest_path


def run_config(path, out_dir, workers: int = 1) -> tuple[Path, Path]:
    return write_results([load_config(path)], out_dir, workers=workers)


# ---------------------------------------------------------------------------
# Region classification
# ---------------------------------------------------------------------------

@dataclass
class RegionSummary:
    """Per-(model, d, k) map from Jtau to the best fidelity over the N grid."""

    model: str
    d: int
    k: int
    jtau: list[float]
    max_fidelity: list[float]
    imperfect: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"model": self.model, "d": self.d, "k": self.k, "jtau": self.jtau,
                "max_fidelity": self.max_fidelity, "imperfect": self.imperfect}


def classify_regions(rows: Iterable[dict], threshold: float = 0.96) -> list[RegionSummary]:
    """Split each group's Jtau grid into cooling vs imperfect refrigerating values.

    A Jtau value is imperfect when no recorded round exceeds the fidelity
    threshold.  Rows are mappings with at least the model/d/k/J/tau/fidelity
    columns (e.g. csv.DictReader output).
    """
    best: dict[tuple, dict[float, float]] = {}
    count = 0
    for row in rows:
        try:
            key = (str(row["model"]), int(row["d"]), int(row["k"]))
            jt = float(row["J"]) * float(row["tau"])
            fid = float(row["fidelity"])
        except (KeyError, TypeError) as err:
            raise ConfigError(f"rows are not a fidelity grid: missing field {err}") from err
        except ValueError:
            continue  # extinct rows carry nan fidelity
        if math.isnan(fid):
            continue
        count += 1
        group = best.setdefault(key, {})
        group[jt] = max(group.get(jt, 0.0), fid)
    if count == 0:
        raise ConfigError("rows are not a fidelity grid: no usable fidelity entries")
    summaries = []
    for (model, d, k) in sorted(best):
        group = best[(model, d, k)]
        jts = sorted(group)
        summary = RegionSummary(model=model, d=d, k=k, jtau=jts,
                                max_fidelity=[group[j] for j in jts])
        summary.imperfect = [j for j in jts if group[j] <= threshold]
        summaries.append(summary)
    return summaries


# ---------------------------------------------------------------------------
# Oracle agreement report
# ---------------------------------------------------------------------------

@dataclass
class OracleCheckEntry:
    label: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance


@dataclass
class OracleReport:
    entries: list[OracleCheckEntry]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def lines(self) -> list[str]:
        return [f"{'PASS' if e.passed else 'FAIL'}  {e.label}: "
                f"max |deviation| = {e.max_deviation:.3e} (tolerance {e.tolerance:g})"
                for e in self.entries]


XX_ORACLE_GRID = tuple(round(0.1 * i, 10) for i in range(63))   # 0.0 .. 6.2
BBH_ORACLE_THETAS = (-5 * math.pi / 8, -math.pi / 8, math.pi / 2, 3 * math.pi / 4)


def _xx_run_fidelities(d: int, jtau: float, n_max: int) -> np.ndarray:
    config = ProtocolConfig(layout=SystemLayout("chain", 1, d),
                            hamiltonian=XXZSpec(J=1.0, Delta=0.0, h=1.0),
                            tau=jtau, n_measurements=n_max, rank=1)
    return zeno_run(config, retain_state=False).fidelities[:, 0]


def _bbh_run_fidelities(theta: float, jtau: float, n_max: int) -> np.ndarray:
    config = ProtocolConfig(layout=SystemLayout("chain", 1, 3),
                            hamiltonian=BBHSpec(J=1.0, theta=theta, h=1.0),
                            tau=jtau, n_measurements=n_max, rank=1)
    return zeno_run(config, retain_state=False).fidelities[:, 0]


def xx_oracle_deviation(d: int, grid=XX_ORACLE_GRID, n_max: int = 50) -> float:
    worst = 0.0
    for jt in grid:
        sim = _xx_run_fidelities(d, jt, n_max)
        exact = np.array([fidelity_xx_rank1(d, n, jt) for n in range(1, n_max + 1)])
        worst = max(worst, float(np.max(np.abs(sim - exact))))
    return worst


def bbh_oracle_deviation(thetas=BBH_ORACLE_THETAS, jtau: float = 1.0, n_max: int = 100) -> float:
    worst = 0.0
    for theta in thetas:
        sim = _bbh_run_fidelities(theta, jtau, n_max)
        exact = np.array([fidelity_bbh_rank1_d3(n, theta, jtau) for n in range(1, n_max + 1)])
        worst = max(worst, float(np.max(np.abs(sim - exact))))
    return worst


def oracle_check() -> OracleReport:
    """Engine-vs-closed-form agreement over the full validation grids."""
    entries = [
        OracleCheckEntry(f"XX rank-1 d={d} (63 Jtau x 50 N)", xx_oracle_deviation(d), 1e-8)
        for d in (2, 3, 4, 5)
    ]
    entries.append(OracleCheckEntry(
        "BBH rank-1 d=3 (4 theta x 100 N, Jtau=1)", bbh_oracle_deviation(), 1e-8))
    asym = abs(_xx_run_fidelities(3, math.pi, 200)[-1] - 0.5)
    entries.append(OracleCheckEntry("XX d=3 asymptote (Jtau=pi, N=200) vs 0.5", asym, 1e-3))
    return OracleReport(entries)

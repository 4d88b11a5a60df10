"""Scenario configuration: JSON in, validated dataclasses out.

Configs are plain JSON with a required ``schema_version``.  Validation
reports the dotted path of the offending field so the CLI can exit with a
machine-readable error.
"""

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

SCHEMA_VERSION = 1

EXPERIMENTS = ("entropy", "equivalence", "grw", "bohm")


def _get(d: dict, key: str, kinds, path: str, required: bool = True, default=None):
    if key not in d:
        if required:
            raise ConfigError(f"missing required field '{path}{key}'", field=path + key)
        return default
    val = d[key]
    if kinds is not None and not isinstance(val, kinds):
        names = kinds.__name__ if isinstance(kinds, type) else "/".join(k.__name__ for k in kinds)
        raise ConfigError(f"field '{path}{key}' must be {names}, got {type(val).__name__}",
                          field=path + key)
    return val


def _number(d, key, path, required=True, default=None, positive=False):
    val = _get(d, key, (int, float), path, required, default)
    if val is None:
        return None
    if isinstance(val, bool):
        raise ConfigError(f"field '{path}{key}' must be a number", field=path + key)
    if positive and val <= 0:
        raise ConfigError(f"field '{path}{key}' must be positive", field=path + key)
    return float(val)


@dataclass(frozen=True)
class LatticeSpec:
    n_sites: int
    coupling: float
    field: float


@dataclass(frozen=True)
class GridSpec:
    n_particles: int
    grid_points: int
    box_length: float
    mass: float
    hbar: float
    potential: dict

    def sampled_potential(self) -> np.ndarray:
        dq = self.box_length / (self.grid_points + 1)
        x = dq * np.arange(1, self.grid_points + 1)
        kind = self.potential.get("kind")
        if kind == "zero":
            return np.zeros(self.grid_points)
        if kind == "harmonic":
            omega = float(self.potential["omega"])
            center = float(self.potential.get("center", self.box_length / 2))
            return 0.5 * self.mass * omega ** 2 * (x - center) ** 2
        raise ConfigError(f"unknown potential kind {kind!r}", field="model.potential.kind")


@dataclass(frozen=True)
class ShellSpec:
    full_space: bool
    energy_min: float | None = None
    energy_width: float | None = None


@dataclass(frozen=True)
class MacroSpec:
    variable: str                          # left_half_occupation | total_occupation | box_halves
    bin_edges: tuple[float, ...] | None = None


@dataclass(frozen=True)
class IphSelector:
    mode: str                              # strong | weak
    cell_label: str | None = None
    lowest_energy_dim: int | None = None
    cell_labels: tuple[str, ...] | None = None
    selected_index: int = 0


@dataclass(frozen=True)
class DynamicsSpec:
    kind: str                              # unitary | grw | bohm
    t_end: float
    sample_interval: float | None = None
    dt: float | None = None
    trajectory_count: int | None = None
    record_stride: int | None = None
    histogram_bins: int | None = None
    collapse_rate: float | None = None
    collapse_width: float | None = None
    initial_state: dict | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    schema_version: int
    experiment: str
    name: str
    model: LatticeSpec | GridSpec
    shell: ShellSpec
    macro: MacroSpec | None
    iph: IphSelector | None
    dynamics: DynamicsSpec
    ensemble_size: int
    master_seed: int
    out_dir: str | None
    raw: dict

    def config_hash(self) -> str:
        """sha256 of the canonicalized config; out_dir is excluded because it
        does not influence any computed output."""
        canon = {k: v for k, v in self.raw.items() if k != "out_dir"}
        return hashlib.sha256(
            json.dumps(canon, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _parse_model(d: dict):
    kind = _get(d, "kind", str, "model.")
    if kind == "lattice":
        n = _get(d, "n_sites", int, "model.")
        if not 1 <= n <= 12:
            raise ConfigError("model.n_sites must be in [1, 12]", field="model.n_sites")
        return LatticeSpec(n, _number(d, "coupling", "model."), _number(d, "field", "model."))
    if kind == "grid":
        n = _get(d, "n_particles", int, "model.")
        if n not in (1, 2):
            raise ConfigError("model.n_particles must be 1 or 2", field="model.n_particles")
        gp = _get(d, "grid_points", int, "model.")
        if gp < 8:
            raise ConfigError("model.grid_points must be >= 8", field="model.grid_points")
        return GridSpec(
            n_particles=n,
            grid_points=gp,
            box_length=_number(d, "box_length", "model.", positive=True),
            mass=_number(d, "mass", "model.", positive=True),
            hbar=_number(d, "hbar", "model.", required=False, default=1.0, positive=True),
            potential=_get(d, "potential", dict, "model.", required=False,
                           default={"kind": "zero"}),
        )
    raise ConfigError(f"model.kind must be 'lattice' or 'grid', got {kind!r}", field="model.kind")


def _parse_shell(d: dict | None) -> ShellSpec:
    if d is None:
        return ShellSpec(full_space=True)
    if d.get("full_space"):
        return ShellSpec(full_space=True)
    return ShellSpec(
        full_space=False,
        energy_min=_number(d, "energy_min", "shell."),
        energy_width=_number(d, "energy_width", "shell.", positive=True),
    )


def _parse_macro(d: dict | None) -> MacroSpec | None:
    if d is None:
        return None
    variable = _get(d, "variable", str, "macro.")
    if variable not in ("left_half_occupation", "total_occupation", "box_halves"):
        raise ConfigError(f"unknown macro.variable {variable!r}", field="macro.variable")
    edges = _get(d, "bin_edges", list, "macro.", required=False)
    return MacroSpec(variable, tuple(float(e) for e in edges) if edges else None)


def _parse_iph(d: dict | None) -> IphSelector | None:
    if d is None:
        return None
    mode = _get(d, "mode", str, "iph.")
    if mode == "strong":
        label = _get(d, "cell_label", str, "iph.", required=False)
        dim = _get(d, "lowest_energy_dim", int, "iph.", required=False)
        if (label is None) == (dim is None):
            raise ConfigError("strong iph needs exactly one of cell_label / lowest_energy_dim",
                              field="iph")
        return IphSelector("strong", cell_label=label, lowest_energy_dim=dim)
    if mode == "weak":
        labels = _get(d, "cell_labels", list, "iph.")
        if not labels:
            raise ConfigError("iph.cell_labels must be non-empty", field="iph.cell_labels")
        idx = _get(d, "selected_index", int, "iph.")
        if not 0 <= idx < len(labels):
            raise ConfigError("iph.selected_index outside the admissible list",
                              field="iph.selected_index")
        return IphSelector("weak", cell_labels=tuple(str(x) for x in labels), selected_index=idx)
    raise ConfigError(f"iph.mode must be 'strong' or 'weak', got {mode!r}", field="iph.mode")


def _parse_dynamics(d: dict) -> DynamicsSpec:
    kind = _get(d, "kind", str, "dynamics.")
    if kind not in ("unitary", "grw", "bohm"):
        raise ConfigError(f"dynamics.kind must be unitary/grw/bohm, got {kind!r}",
                          field="dynamics.kind")
    spec = DynamicsSpec(
        kind=kind,
        t_end=_number(d, "t_end", "dynamics.", positive=True),
        sample_interval=_number(d, "sample_interval", "dynamics.", required=False, positive=True),
        dt=_number(d, "dt", "dynamics.", required=False, positive=True),
        trajectory_count=_get(d, "trajectory_count", int, "dynamics.", required=False),
        record_stride=_get(d, "record_stride", int, "dynamics.", required=False),
        histogram_bins=_get(d, "histogram_bins", int, "dynamics.", required=False),
        collapse_rate=_number(d, "collapse_rate", "dynamics.", required=False),
        collapse_width=_number(d, "collapse_width", "dynamics.", required=False, positive=True),
        initial_state=_get(d, "initial_state", dict, "dynamics.", required=False),
    )
    if kind == "grw":
        if spec.collapse_rate is None or spec.collapse_rate < 0:
            raise ConfigError("dynamics.collapse_rate required (>= 0) for grw",
                              field="dynamics.collapse_rate")
        if spec.collapse_width is None:
            raise ConfigError("dynamics.collapse_width required for grw",
                              field="dynamics.collapse_width")
    if kind == "bohm":
        for field_name in ("dt", "trajectory_count"):
            if getattr(spec, field_name) is None:
                raise ConfigError(f"dynamics.{field_name} required for bohm",
                                  field=f"dynamics.{field_name}")
    return spec


def parse_config(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    version = _get(data, "schema_version", int, "")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}", field="schema_version")
    experiment = _get(data, "experiment", str, "")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}", field="experiment")
    model = _parse_model(_get(data, "model", dict, ""))
    dynamics = _parse_dynamics(_get(data, "dynamics", dict, ""))
    ensemble = _get(data, "ensemble_size", int, "")
    if ensemble < 1:
        raise ConfigError("ensemble_size must be >= 1", field="ensemble_size")
    seed = _get(data, "master_seed", int, "")
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("master_seed must be a u64", field="master_seed")
    cfg = ScenarioConfig(
        schema_version=version,
        experiment=experiment,
        name=_get(data, "name", str, "", required=False, default=experiment),
        model=model,
        shell=_parse_shell(_get(data, "shell", dict, "", required=False)),
        macro=_parse_macro(_get(data, "macro", dict, "", required=False)),
        iph=_parse_iph(_get(data, "iph", dict, "", required=False)),
        dynamics=dynamics,
        ensemble_size=ensemble,
        master_seed=seed,
        out_dir=_get(data, "out_dir", str, "", required=False),
        raw=data,
    )
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: ScenarioConfig) -> None:
    exp = cfg.experiment
    if exp == "entropy":
        if not isinstance(cfg.model, LatticeSpec):
            raise ConfigError("entropy experiment requires a lattice model", field="model.kind")
        if cfg.macro is None:
            raise ConfigError("entropy experiment requires a macro section", field="macro")
        if cfg.iph is None:
            raise ConfigError("entropy experiment requires an iph section", field="iph")
        if cfg.dynamics.kind != "unitary" or cfg.dynamics.sample_interval is None:
            raise ConfigError("entropy experiment needs unitary dynamics with sample_interval",
                              field="dynamics")
    elif exp == "equivalence":
        if cfg.iph is None or cfg.iph.mode != "strong":
            raise ConfigError("equivalence experiment requires a strong iph section", field="iph")
        if cfg.ensemble_size < 16:
            raise ConfigError("equivalence needs ensemble_size >= 16 for the M/16 checkpoint",
                              field="ensemble_size")
    elif exp == "grw":
        if not isinstance(cfg.model, GridSpec):
            raise ConfigError("grw experiment requires a grid model", field="model.kind")
        if cfg.dynamics.kind != "grw":
            raise ConfigError("grw experiment needs grw dynamics", field="dynamics.kind")
        if cfg.iph is None:
            raise ConfigError("grw experiment requires an iph section", field="iph")
    elif exp == "bohm":
        if not isinstance(cfg.model, GridSpec):
            raise ConfigError("bohm experiment requires a grid model", field="model.kind")
        if cfg.dynamics.kind != "bohm":
            raise ConfigError("bohm experiment needs bohm dynamics", field="dynamics.kind")
        if cfg.dynamics.initial_state is None:
            raise ConfigError("bohm experiment needs dynamics.initial_state",
                              field="dynamics.initial_state")


def load_config(path, seed_override: int | None = None,
                out_override: str | None = None) -> ScenarioConfig:
    """Read, apply CLI overrides, and validate; overrides land in the raw
    dict before hashing so the config hash identifies the actual run."""
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if seed_override is not None:
        data["master_seed"] = seed_override
    if out_override is not None:
        data["out_dir"] = str(out_override)
    return parse_config(data)

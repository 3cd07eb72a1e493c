"""Experiment configuration: YAML parsing, unit handling and defaults.

Frequencies must carry an explicit unit, ``{value: 15.98, unit: MHz}`` or
``{value: 100.4, unit: rad/us}``, and are stored in rad/µs. Angles are
plain numbers in radians, or ``{value: 90, unit: deg}``. Times are µs, or
``{value: 450, unit: ns}``. A grid is either an explicit list or
``{start, stop, num}`` with an optional shared ``unit``.

Every resolved parameter is tagged with its origin: ``published`` for values
taken from the reference experiment, ``design`` for defaults chosen here,
and ``user`` for values supplied in the file.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np
import yaml

from . import models
from .core import mhz
from .errors import ConfigError

KINDS = ("scan", "rabi", "qfi-single", "qfi-two-qubit", "ramsey-fringe",
         "noise-scaling", "crb-audit", "alpha-sweep")
STOCHASTIC = ("ramsey-fringe", "noise-scaling", "crb-audit", "alpha-sweep")
OUT_ENV = "QFI_LAB_OUT"
DEFAULT_OUT = "qfi-lab-out"

FREQ, ANGLE, TIME, INT, FLOAT, BOOL = "freq", "angle", "time", "int", "float", "bool"
GRID_ANGLE, GRID_TIME, GRID_FREQ, GRID_INT = "grid-angle", "grid-time", "grid-freq", "grid-int"
PULSE = "pulse"

_PI = float(np.pi)
_REQUIRED = object()


def _p(kind, default, source="design"):
    return (kind, default, source)


_PHYS_SINGLE = {
    "A": _p(FREQ, models.PROBE_GAP, "published"),
    "theta": _p(ANGLE, _PI / 3),
    "beta": _p(ANGLE, _PI / 2),
    "a": _p(FLOAT, 0.1, "published"),
}

SCHEMA: dict = {
    "scan": {
        **_PHYS_SINGLE,
        "tau": _p(TIME, 0.45, "published"),
        "omega_grid": _p(GRID_FREQ, None),
    },
    "rabi": {
        **_PHYS_SINGLE,
        "omega": _p(FREQ, None),
        "tau_grid": _p(GRID_TIME, None),
    },
    "qfi-single": {
        "A": _p(FREQ, models.PROBE_GAP, "published"),
        "beta": _p(ANGLE, _PI / 2),
        "a": _p(FLOAT, 0.1, "published"),
        "tau_scan": _p(TIME, 0.45, "published"),
        "theta_grid": _p(GRID_ANGLE, tuple(k * _PI / 8 for k in range(1, 8))),
        "scan_points": _p(INT, 81),
        "periods": _p(FLOAT, 2.0),
        "samples": _p(INT, 48),
    },
    "qfi-two-qubit": {
        "A": _p(FREQ, models.PROBE_GAP),
        "A_par": _p(FREQ, models.A_PARALLEL, "published"),
        "A_perp": _p(FREQ, models.A_PERPENDICULAR, "published"),
        "omega_C": _p(FREQ, models.OMEGA_C13, "published"),
        "phi": _p(ANGLE, 0.0),
        "beta_grid": _p(GRID_ANGLE, tuple(np.round(np.linspace(0.2, 0.6, 21), 12))),
        "target_ratio": _p(FLOAT, 0.02),
        "protocol": _p(BOOL, True),
    },
    "ramsey-fringe": {
        "theta": _p(ANGLE, _PI / 3, "published"),
        "alpha": _p(ANGLE, _PI / 2, "published"),
        "xi": _p(FREQ, models.RAMSEY_DETUNING, "published"),
        "T_grid": _p(GRID_TIME, None),
        "N": _p(INT, 9, "published"),
        "replicas": _p(INT, 200),
    },
    "noise-scaling": {
        "theta": _p(ANGLE, _PI / 3, "published"),
        "beta": _p(ANGLE, _PI / 2, "published"),
        "alpha": _p(ANGLE, _PI / 2, "published"),
        "N_grid": _p(GRID_INT, (1, 2, 4, 9, 16, 25)),
        "replicas": _p(INT, 200),
    },
    "crb-audit": {
        "theta_grid": _p(GRID_ANGLE, tuple(k * _PI / 8 for k in range(1, 8))),
        "N": _p(INT, 1, "published"),
        "replicas": _p(INT, 200),
        "slope_runs": _p(INT, 1 << 20),
        "protocol": _p(BOOL, False),
        "A": _p(FREQ, models.PROBE_GAP, "published"),
    },
    "alpha-sweep": {
        "theta": _p(ANGLE, _PI / 2, "published"),
        "beta": _p(ANGLE, _PI / 2, "published"),
        "alpha_grid": _p(GRID_ANGLE, tuple(k * _PI / 10 for k in range(1, 10))),
        "N": _p(INT, 1, "published"),
        "replicas": _p(INT, 200),
        "slope_runs": _p(INT, 1 << 20),
        "xi": _p(FREQ, models.RAMSEY_DETUNING, "published"),
        "pulse": _p(PULSE, None),
    },
}

PHOTON_DEFAULTS = {"n0_mean": 120.0, "n1_mean": 84.0, "extra_noise_sd": 0.0}

_FREQ_UNITS = {"mhz": mhz, "rad/us": float, "rad/µs": float}
_ANGLE_UNITS = {"rad": float, "deg": np.deg2rad, "pi": lambda v: v * _PI}
_TIME_UNITS = {"us": float, "µs": float, "ns": lambda v: v * 1e-3}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    params: tuple
    seed: Optional[int] = None
    photon: Optional[tuple] = None
    output_dir: str = DEFAULT_OUT
    prefix: str = ""
    sources: tuple = field(default=(), compare=False)

    def __getitem__(self, name):
        return dict(self.params)[name]

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    @property
    def photon_model(self):
        from .ramsey import PhotonModel
        if self.photon is None:
            return None
        return PhotonModel(**dict(self.photon), seed=self.seed or 0)

    def to_document(self) -> dict:
        """Plain, fully resolved form that ``parse_config`` reads back unchanged."""
        schema = SCHEMA[self.kind]
        params = {}
        for name, value in self.params:
            params[name] = _emit(schema[name][0], value)
        doc = {"kind": self.kind, "params": params, "output": {"dir": self.output_dir, "prefix": self.prefix}}
        if self.seed is not None:
            doc["seed"] = self.seed
        if self.photon is not None:
            doc["photon_model"] = {k: float(v) for k, v in self.photon}
        return doc


def _emit(kind, value):
    if value is None:
        return None
    if kind == FREQ:
        return {"value": float(value), "unit": "rad/us"}
    if kind == GRID_FREQ:
        return {"values": [float(v) for v in value], "unit": "rad/us"}
    if kind in (GRID_ANGLE, GRID_TIME):
        return [float(v) for v in value]
    if kind == GRID_INT:
        return [int(v) for v in value]
    if kind == PULSE:
        d = dict(value)
        return {"rabi": _emit(FREQ, d["rabi"]), "detuning": _emit(FREQ, d["detuning"]),
                "carrier": _emit(FREQ, d["carrier"])}
    if kind == INT:
        return int(value)
    if kind == BOOL:
        return bool(value)
    return float(value)


def _unit_value(raw, units, name, what):
    if isinstance(raw, Mapping):
        if "value" not in raw:
            raise ConfigError(f"{name}: missing 'value'", field=f"{name}.value")
        unit = str(raw.get("unit", "")).strip().lower()
        if unit not in units:
            raise ConfigError(f"{name}: unknown {what} unit {raw.get('unit')!r}; use one of {sorted(units)}",
                              field=f"{name}.unit")
        return float(units[unit](float(raw["value"])))
    return None


def _number(raw, name):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {raw!r}", field=name)
    return float(raw)


def _scalar(kind, raw, name):
    if kind == FREQ:
        v = _unit_value(raw, _FREQ_UNITS, name, "frequency")
        if v is None:
            raise ConfigError(f"{name}: frequencies need an explicit unit, e.g. {{value: 15.98, unit: MHz}}",
                              field=f"{name}.unit")
        return v
    if kind == ANGLE:
        v = _unit_value(raw, _ANGLE_UNITS, name, "angle")
        return v if v is not None else _number(raw, name)
    if kind == TIME:
        v = _unit_value(raw, _TIME_UNITS, name, "time")
        return v if v is not None else _number(raw, name)
    if kind == INT:
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{name}: expected an integer, got {raw!r}", field=name)
        return int(raw)
    if kind == BOOL:
        if not isinstance(raw, bool):
            raise ConfigError(f"{name}: expected true or false, got {raw!r}", field=name)
        return raw
    return _number(raw, name)


def _grid(kind, raw, name):
    elem = {GRID_ANGLE: ANGLE, GRID_TIME: TIME, GRID_FREQ: FREQ, GRID_INT: INT}[kind]
    unit = None
    if isinstance(raw, Mapping):
        unit = raw.get("unit")
        if "values" in raw:
            raw = raw["values"]
        else:
            missing = [k for k in ("start", "stop", "num") if k not in raw]
            if missing:
                raise ConfigError(f"{name}: grid needs start, stop and num", field=f"{name}.{missing[0]}")
            num = raw["num"]
            if isinstance(num, bool) or not isinstance(num, int) or num < 2:
                raise ConfigError(f"{name}.num must be an integer >= 2", field=f"{name}.num")
            raw = list(np.linspace(float(raw["start"]), float(raw["stop"]), num))
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ConfigError(f"{name}: expected a non-empty list or a {{start, stop, num}} grid", field=name)
    out = []
    for i, v in enumerate(raw):
        item = {"value": v, "unit": unit} if unit is not None and not isinstance(v, Mapping) else v
        if elem == INT and isinstance(item, float) and item.is_integer():
            item = int(item)
        out.append(_scalar(elem, item, f"{name}[{i}]"))
    return tuple(out)


def _pulse(raw, name):
    if raw is None:
        return None
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{name}: expected a mapping with rabi, detuning and carrier", field=name)
    rabi = _scalar(FREQ, raw["rabi"], f"{name}.rabi") if "rabi" in raw else models.DEFAULT_PULSE_RABI
    det = _scalar(FREQ, raw["detuning"], f"{name}.detuning") if "detuning" in raw else 0.0
    carrier = raw.get("carrier", "default")
    if carrier == "default":
        carrier = models.DEFAULT_CARRIER
    elif carrier is not None:
        carrier = _scalar(FREQ, carrier, f"{name}.carrier")
    return (("rabi", rabi), ("detuning", det), ("carrier", carrier))


def _resolve(kind, raw, name):
    if raw is None:
        return None
    if kind == PULSE:
        return _pulse(raw, name)
    if kind.startswith("grid-"):
        return _grid(kind, raw, name)
    return _scalar(kind, raw, name)


def parse_config(doc: Any, env: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    """Validate a loaded YAML document and fill defaults."""
    env = os.environ if env is None else env
    if not isinstance(doc, Mapping):
        raise ConfigError("config must be a mapping with at least a 'kind' field", field="kind")
    if "kind" not in doc:
        raise ConfigError("missing required field 'kind'", field="kind")
    kind = doc["kind"]
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", field="kind")
    schema = SCHEMA[kind]
    user = doc.get("params") or {}
    if not isinstance(user, Mapping):
        raise ConfigError("'params' must be a mapping", field="params")
    unknown = sorted(set(user) - set(schema))
    if unknown:
        raise ConfigError(f"unknown parameter {unknown[0]!r} for kind {kind}", field=f"params.{unknown[0]}")

    params, sources = [], []
    for name, (ptype, default, origin) in schema.items():
        if name in user:
            value = _resolve(ptype, user[name], f"params.{name}")
            src = "user"
        else:
            value, src = default, origin
        params.append((name, value))
        sources.append((name, src))

    seed = doc.get("seed")
    if kind in STOCHASTIC and seed is None:
        raise ConfigError(f"kind {kind} is stochastic and needs a 'seed'", field="seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        raise ConfigError("seed must be a non-negative integer", field="seed")

    photon = None
    if kind in STOCHASTIC:
        pm = dict(PHOTON_DEFAULTS)
        given = doc.get("photon_model") or {}
        if not isinstance(given, Mapping):
            raise ConfigError("'photon_model' must be a mapping", field="photon_model")
        for key in given:
            if key not in pm:
                raise ConfigError(f"unknown photon_model field {key!r}", field=f"photon_model.{key}")
            pm[key] = _number(given[key], f"photon_model.{key}")
        photon = tuple(pm.items())
        for key in pm:
            sources.append((f"photon_model.{key}", "user" if key in given else "design"))

    out = doc.get("output") or {}
    out_dir = str(out.get("dir") or env.get(OUT_ENV) or DEFAULT_OUT)
    prefix = str(out.get("prefix") or kind)
    cfg = ExperimentConfig(kind, tuple(params), seed, photon, out_dir, prefix, tuple(sources))
    _check_ranges(cfg)
    return cfg


def _check_ranges(cfg: ExperimentConfig):
    p = cfg.param_dict
    for name in ("theta",):
        if name in p and not 0 <= p[name] <= _PI:
            raise ConfigError(f"params.{name} must lie in [0, π]", field=f"params.{name}")
    if "a" in p and not 0 <= p["a"] <= models.MAX_MODULATION:
        raise ConfigError("params.a must lie in [0, 0.2]", field="params.a")
    for name in ("N", "replicas", "samples", "scan_points", "slope_runs"):
        if name in p and p[name] < 1:
            raise ConfigError(f"params.{name} must be positive", field=f"params.{name}")
    if cfg.photon is not None:
        pm = dict(cfg.photon)
        if not pm["n0_mean"] > pm["n1_mean"] > 0:
            raise ConfigError("photon_model needs n0_mean > n1_mean > 0", field="photon_model.n0_mean")
        if pm["extra_noise_sd"] < 0:
            raise ConfigError("photon_model.extra_noise_sd must be non-negative",
                              field="photon_model.extra_noise_sd")


def load_config(path, env: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", field="path") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}", field="document") from exc
    return parse_config(doc, env)

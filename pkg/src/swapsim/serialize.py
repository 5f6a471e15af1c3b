"""
Config files, record files, summaries and run manifests.

Configs are TOML with one table per concern; physical quantities carry
their unit in the key name::

    [run]
    trials = 13000
    seed = 42
    order = "ABFirst"          # or "EveFirst"
    mode = "montecarlo"        # or "analytic"
    eo_toggle = false

    [phase]
    points = 13                # evenly spaced in [0, 2 pi]; or one of
    # phases_rad = [0.0, 1.57]
    # mirror_displacements_nm = [0.0, 64.3]
    wavelength_nm = 727.6

    [detectors]
    efficiency = 0.45
    dark_count = 0.0

    [interference]
    visibility = 0.91

    [timing]
    delay_ns = 20.0
    trial_period_ns = 1000.0
    coherence_time_ps = 0.1

    [optics]
    station_transmittivity = 0.7071067811865476

    [fock]
    cutoff = 2

Records are JSON lines, one trial per line. Summaries and manifests are
indented JSON documents.
"""

from __future__ import annotations

import dataclasses
import json
import re
import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analysis import FringeSummary
from .experiment import ExperimentConfig, Order, RecordTable, default_phases
from .measure import OUTCOMES, BellOutcome
from .optics import mirror_phase


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# (section, key) -> (ExperimentConfig field, scale to SI)
_SCALARS = {
    ("run", "trials"): ("trials", None),
    ("run", "seed"): ("seed", None),
    ("run", "order"): ("order", None),
    ("run", "mode"): ("mode", None),
    ("run", "sampler"): ("sampler", None),
    ("run", "eo_toggle"): ("eo_toggle", None),
    ("phase", "wavelength_nm"): ("wavelength", 1e-9),
    ("detectors", "efficiency"): ("efficiency", None),
    ("detectors", "dark_count"): ("dark_count", None),
    ("interference", "visibility"): ("visibility", None),
    ("timing", "delay_ns"): ("delay", 1e-9),
    ("timing", "trial_period_ns"): ("trial_period", 1e-9),
    ("timing", "coherence_time_ps"): ("coherence_time", 1e-12),
    ("optics", "station_transmittivity"): ("station_transmittivity", None),
    ("fock", "cutoff"): ("cutoff", None),
}
_PHASE_KEYS = ("points", "phases_rad", "mirror_displacements_nm")
_TYPES = {
    "trials": int,
    "seed": int,
    "cutoff": int,
    "eo_toggle": bool,
    "order": str,
    "mode": str,
    "sampler": str,
}

PRESETS = {
    "paper": {
        "run": {"trials": 1_000_000, "order": "ABFirst"},
        "phase": {"points": 13, "wavelength_nm": 727.6},
        "detectors": {"efficiency": 0.45},
        "interference": {"visibility": 0.91},
        "timing": {"delay_ns": 20.0, "coherence_time_ps": 0.1},
    },
}


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        m = re.fullmatch(r"\[\s*([^\]]+?)\s*\]", line)
        if m:
            current = m.group(1)
            if key is None and current == section:
                return n
            continue
        if key is not None and current == section and re.match(rf"{re.escape(key)}\s*=", line):
            return n
    return None


def merge(base: dict, override: dict) -> dict:
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in base.items()}
    for section, table in override.items():
        if isinstance(table, dict):
            target = out.setdefault(section, {})
            if section == "phase" and any(k in table for k in _PHASE_KEYS):
                for k in _PHASE_KEYS:
                    target.pop(k, None)
            target.update(table)
        else:
            out[section] = table
    return out


def config_from_dict(data: dict, text: str = "") -> ExperimentConfig:
    """Build a config from parsed TOML tables; ``text`` locates errors."""
    kwargs = {}
    for section, table in data.items():
        if not isinstance(table, dict):
            raise ConfigError(f"top-level key {section!r} must be a table", _line_of(text, section))
        for key, value in table.items():
            line = _line_of(text, section, key)
            if section == "phase" and key in _PHASE_KEYS:
                continue
            if (section, key) not in _SCALARS:
                raise ConfigError(f"unknown key [{section}] {key}", line)
            name, scale = _SCALARS[(section, key)]
            expected = _TYPES.get(name, float)
            if expected is float:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"[{section}] {key} must be a number, got {value!r}", line)
                value = float(value) * (scale or 1.0)
            elif expected is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"[{section}] {key} must be an integer, got {value!r}", line)
            elif not isinstance(value, expected):
                raise ConfigError(f"[{section}] {key} must be {expected.__name__}, got {value!r}", line)
            kwargs[name] = value
    phase = data.get("phase", {})
    given = [k for k in _PHASE_KEYS if k in phase]
    if len(given) > 1:
        raise ConfigError(f"give only one of {given} in [phase]", _line_of(text, "phase", given[1]))
    wavelength = kwargs.get("wavelength", ExperimentConfig().wavelength)
    try:
        if "points" in phase:
            kwargs["phases"] = default_phases(int(phase["points"]))
        elif "phases_rad" in phase:
            kwargs["phases"] = tuple(float(p) for p in phase["phases_rad"])
        elif "mirror_displacements_nm" in phase:
            kwargs["phases"] = tuple(mirror_phase(float(x) * 1e-9, wavelength) for x in phase["mirror_displacements_nm"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad phase schedule: {exc}", _line_of(text, "phase", given[0])) from None
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        line = next(
            (_line_of(text, s, k) for (s, k), (name, _) in _SCALARS.items() if re.search(rf"\b{name}\b", str(exc))),
            None,
        )
        raise ConfigError(str(exc), line) from None


def load_config(path: str | Path | None = None, preset: str | None = None) -> ExperimentConfig:
    data: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; known: {sorted(PRESETS)}")
        data = merge(data, PRESETS[preset])
    text = ""
    if path is not None:
        text = Path(path).read_text()
        try:
            parsed = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            m = re.search(r"line (\d+)", str(exc))
            raise ConfigError(f"malformed config: {exc}", int(m.group(1)) if m else None) from None
        data = merge(data, parsed)
    return config_from_dict(data, text)


def config_to_dict(config: ExperimentConfig) -> dict:
    """Nested tables mirroring the config-file layout, in file units."""
    return {
        "run": {
            "trials": config.trials,
            "seed": config.seed,
            "order": config.order.value,
            "mode": config.mode,
            "sampler": config.sampler,
            "eo_toggle": config.eo_toggle,
        },
        "phase": {"phases_rad": list(config.phases), "wavelength_nm": config.wavelength / 1e-9},
        "detectors": {"efficiency": config.efficiency, "dark_count": config.dark_count},
        "interference": {"visibility": config.visibility},
        "timing": {
            "delay_ns": config.delay / 1e-9,
            "trial_period_ns": config.trial_period / 1e-9,
            "coherence_time_ps": config.coherence_time / 1e-12,
        },
        "optics": {"station_transmittivity": config.station_transmittivity},
        "fock": {"cutoff": config.cutoff},
    }


def _b(x) -> str:
    return "true" if x else "false"


def write_records(records: RecordTable, path: str | Path) -> None:
    order = records.order.value
    with open(path, "w") as fh:
        for i in range(len(records)):
            fh.write(
                f'{{"trial_id": {int(records.trial_id[i])}, "phase": {float(records.phase[i])!r}, '
                f'"eo_flip": {_b(records.eo_flip[i])}, '
                f'"ab_clicks": [{_b(records.d1s[i])}, {_b(records.d2s[i])}], '
                f'"t_ab": {float(records.t_ab[i])!r}, '
                f'"eve_outcome": "{OUTCOMES[int(records.eve[i])].value}", '
                f'"t_e": {float(records.t_e[i])!r}, "order": "{order}"}}\n'
            )


def read_records(path: str | Path) -> RecordTable:
    cols = {c: [] for c in RecordTable.columns}
    orders = set()
    with open(path) as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                cols["trial_id"].append(row["trial_id"])
                cols["phase"].append(row["phase"])
                cols["eo_flip"].append(row["eo_flip"])
                cols["d1s"].append(row["ab_clicks"][0])
                cols["d2s"].append(row["ab_clicks"][1])
                cols["eve"].append(BellOutcome(row["eve_outcome"]).code)
                cols["t_ab"].append(row["t_ab"])
                cols["t_e"].append(row["t_e"])
                orders.add(row["order"])
            except (KeyError, ValueError, IndexError, TypeError) as exc:
                raise ValueError(f"{path}:{n}: bad record ({exc})") from None
    if not cols["trial_id"]:
        raise ValueError(f"{path}: no records")
    if len(orders) != 1:
        raise ValueError(f"{path}: records mix measurement orders {sorted(orders)}")
    return RecordTable(*(np.asarray(cols[c]) for c in RecordTable.columns), Order(orders.pop()))


def write_json(data: dict, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def write_summary(summary: FringeSummary, path: str | Path) -> None:
    write_json(summary.to_dict(), path)


def read_summary(path: str | Path) -> FringeSummary:
    with open(path) as fh:
        return FringeSummary.from_dict(json.load(fh))


def config_si(config: ExperimentConfig) -> dict:
    """Lossless echo of every config field in SI units."""
    data = dataclasses.asdict(config)
    data["order"] = config.order.value
    data["phases"] = list(config.phases)
    return data


def make_manifest(config: ExperimentConfig, duration: float, version: str) -> dict:
    return {
        "config": config_to_dict(config),
        "config_si": config_si(config),
        "mode": config.mode,
        "seed": config.seed,
        "version": version,
        "duration_s": duration,
    }


def config_from_manifest(path: str | Path) -> ExperimentConfig:
    with open(path) as fh:
        manifest = json.load(fh)
    if "config_si" in manifest:
        return ExperimentConfig(**manifest["config_si"])
    return config_from_dict(manifest["config"])

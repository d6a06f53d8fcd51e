"""Scenario configuration files.

A config is a JSON object mirroring the Scenario type. ``preset`` selects
the experiment machinery; every other key overrides that preset's default.
Frequency-valued entries carry a ``_hz`` suffix and are converted to
rad/sample internally using the configured sample rate.
"""

from __future__ import annotations

import json
from pathlib import Path

from . import framing
from .scenarios import PRESETS, Scenario, preset_scenario


class ConfigError(ValueError):
    pass


_SCALAR_KEYS = {
    "name": str, "preset": str, "seed": int, "trials": int,
    "sample_rate_hz": float, "n_fft": int, "cp_len": int, "n_data": int,
    "n_mltf": int, "mltf_gap": int, "dl_snr_db": float, "osc_factor": float,
    "arrival_jitter": bool,
}
_LIST_KEYS = {"allocations", "cfo_hz", "snr_grid_db"}


def scenario_from_dict(data: dict) -> Scenario:
    problems = validate_dict(data)
    if problems:
        raise ConfigError("; ".join(problems))
    overrides = {k: v for k, v in data.items() if k != "preset"}
    return preset_scenario(data["preset"], **overrides)


def validate_dict(data) -> list:
    """Return a list of problems (empty when the config is usable)."""
    problems = []
    if not isinstance(data, dict):
        return ["config root must be a JSON object"]
    preset = data.get("preset")
    if preset not in PRESETS:
        problems.append(
            f"unknown or missing preset {preset!r}; one of {sorted(PRESETS)}")
    for key, value in data.items():
        if key in ("preset", "params"):
            continue
        if key in _SCALAR_KEYS:
            want = _SCALAR_KEYS[key]
            if want is float and isinstance(value, int):
                continue
            if not isinstance(value, want):
                problems.append(f"{key} must be {want.__name__}")
        elif key in _LIST_KEYS:
            if not isinstance(value, list):
                problems.append(f"{key} must be a list")
        else:
            problems.append(f"unknown key {key!r}")
    if isinstance(data.get("params"), dict) is False and "params" in data:
        problems.append("params must be an object")
    if "trials" in data and isinstance(data["trials"], int) and data["trials"] <= 0:
        problems.append("trials must be positive")
    if "seed" in data and not isinstance(data["seed"], int):
        problems.append("seed must be an integer")
    if "snr_grid_db" in data and isinstance(data["snr_grid_db"], list) \
            and len(data["snr_grid_db"]) == 0:
        problems.append("snr_grid_db must be non-empty")
    allocs = data.get("allocations")
    if isinstance(allocs, list) and allocs:
        try:
            framing.validate_disjoint(
                [framing.SubcarrierAllocation(u, tuple(a))
                 for u, a in enumerate(allocs)],
                data.get("n_fft", 64),
            )
        except (framing.LayoutError, TypeError) as exc:
            problems.append(f"allocations invalid: {exc}")
    return problems


def load_scenario(name_or_path: str, **overrides) -> Scenario:
    """Resolve a preset name or a JSON config path into a Scenario."""
    if name_or_path in PRESETS:
        return preset_scenario(name_or_path, **overrides)
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigError(
            f"{name_or_path!r} is neither a preset nor a config file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    data.update(overrides)
    return scenario_from_dict(data)

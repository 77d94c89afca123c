"""Scenario configuration: a flat key = value text format.

Lines are ``key = value``; blank lines and ``#`` comments are ignored.
Unknown keys are rejected with their line number, and every referenced
domain type is validated when the configuration is loaded.  See
``DEFAULTS`` for the full key set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from .channels import DecayType, InitialState
from .errors import ConfigError
from .optics import ModeGeometry
from .timecourse import DecayRates, SweepMode, SweepSpec

# Rates reproducing the bundled decay scenarios: equal cascade rates,
# gamma31 = 2*gamma32 for lambda, gamma21 = 2*gamma31 for vee.
_DEFAULT_RATES = {
    DecayType.CASCADE: {"gamma21": 1.0, "gamma31": 0.0, "gamma32": 1.0},
    DecayType.LAMBDA: {"gamma21": 0.0, "gamma31": 2.0, "gamma32": 1.0},
    DecayType.V: {"gamma21": 2.0, "gamma31": 1.0, "gamma32": 0.0},
}

DEFAULTS = {
    "decay_type": "cascade",
    "intensity_1": "1.0",
    "intensity_2": "1.0",
    "intensity_3": "1.0",
    "phase_1": "0.0",
    "phase_2": "0.0",
    "phase_3": "0.0",
    "gamma21": None,  # filled from _DEFAULT_RATES when absent
    "gamma31": None,
    "gamma32": None,
    "sweep_mode": "probability",
    "sweep_start": "0.0",
    "sweep_stop": "1.0",
    "sweep_step": "0.125",
    "sweep_times": None,
    "mode_spacing": "1.0",
    "mode_width": "0.05",
    "focal_length": "150.0",
    "wavenumber": "9926.0",
    "det_rows": "256",
    "det_cols": "32",
    "det_pitch": "0.0125",
    "axis_rotation": "0.0",
    "mean_photons": "1e5",
    "repetitions": "64",
    "noiseless": "false",
    "seed": "1",
    "out_dir": "out",
}

_DECAY_NAMES = {
    "cascade": DecayType.CASCADE,
    "lambda": DecayType.LAMBDA,
    "v": DecayType.V,
    "vee": DecayType.V,
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated bundle of every knob a pipeline run needs."""

    decay_type: DecayType
    state: InitialState
    rates: DecayRates
    sweep_mode: SweepMode
    samples: tuple[float, ...]
    geometry: ModeGeometry
    det_rows: int
    det_cols: int
    det_pitch: float
    axis_rotation: float
    mean_photons: float
    repetitions: int
    noiseless: bool
    seed: int
    out_dir: str

    def sweep_spec(self) -> SweepSpec:
        return SweepSpec(
            decay_type=self.decay_type,
            rates=self.rates,
            samples=self.samples,
            mode=self.sweep_mode,
        )

    def override(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)


def _parse_lines(text: str):
    """Yield (line_number, key, value) for every assignment line."""
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {n}: empty key or value")
        yield n, key, value


def _to_float(entries, key, *, minimum=None, strict_min=None):
    raw, line = entries[key]
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"line {line}: {key} must be a number, got {raw!r}")
    if not math.isfinite(v):
        raise ConfigError(f"line {line}: {key} must be finite")
    if minimum is not None and v < minimum:
        raise ConfigError(f"line {line}: {key} must be >= {minimum}, got {v}")
    if strict_min is not None and v <= strict_min:
        raise ConfigError(f"line {line}: {key} must be > {strict_min}, got {v}")
    return v


def _to_int(entries, key, *, minimum=None):
    raw, line = entries[key]
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"line {line}: {key} must be an integer, got {raw!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"line {line}: {key} must be >= {minimum}, got {v}")
    return v


def _to_bool(entries, key):
    raw, line = entries[key]
    low = raw.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"line {line}: {key} must be true or false, got {raw!r}")


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a configuration document."""
    entries: dict[str, tuple[str, int]] = {}
    for n, key, value in _parse_lines(text):
        if key not in DEFAULTS:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        entries[key] = (value, n)

    raw_type, line = entries.get("decay_type", (DEFAULTS["decay_type"], 0))
    try:
        decay_type = _DECAY_NAMES[raw_type.lower()]
    except KeyError:
        raise ConfigError(
            f"line {line}: decay_type must be one of "
            f"{sorted(set(_DECAY_NAMES))}, got {raw_type!r}"
        )

    # fill remaining defaults (rates depend on the decay type)
    for key, default in DEFAULTS.items():
        if key in entries or key == "sweep_times":
            continue
        if key in ("gamma21", "gamma31", "gamma32"):
            entries[key] = (str(_DEFAULT_RATES[decay_type][key]), 0)
        elif default is not None:
            entries[key] = (default, 0)

    def wrap(key, builder):
        try:
            return builder()
        except ConfigError:
            raise
        except ValueError as exc:
            line = entries.get(key, ("", 0))[1]
            raise ConfigError(f"line {line}: {key}: {exc}") from exc

    state = wrap(
        "intensity_1",
        lambda: InitialState(
            intensities=(
                _to_float(entries, "intensity_1", minimum=0.0),
                _to_float(entries, "intensity_2", minimum=0.0),
                _to_float(entries, "intensity_3", minimum=0.0),
            ),
            phases=(
                _to_float(entries, "phase_1"),
                _to_float(entries, "phase_2"),
                _to_float(entries, "phase_3"),
            ),
        ),
    )
    rates = wrap(
        "gamma21",
        lambda: DecayRates(
            gamma21=_to_float(entries, "gamma21", minimum=0.0),
            gamma31=_to_float(entries, "gamma31", minimum=0.0),
            gamma32=_to_float(entries, "gamma32", minimum=0.0),
        ),
    )

    raw_mode, line = entries["sweep_mode"]
    if raw_mode.lower() not in ("probability", "time"):
        raise ConfigError(
            f"line {line}: sweep_mode must be 'probability' or 'time', got {raw_mode!r}"
        )
    sweep_mode = SweepMode(raw_mode.lower())

    if sweep_mode is SweepMode.TIME:
        if "sweep_times" not in entries:
            raise ConfigError("sweep_mode = time requires sweep_times")
        raw, line = entries["sweep_times"]
        try:
            samples = tuple(float(tok) for tok in raw.split(",") if tok.strip())
        except ValueError:
            raise ConfigError(f"line {line}: sweep_times must be comma-separated numbers")
    else:
        start = _to_float(entries, "sweep_start", minimum=0.0)
        stop = _to_float(entries, "sweep_stop", minimum=0.0)
        step = _to_float(entries, "sweep_step", strict_min=0.0)
        if stop < start:
            raise ConfigError("sweep_stop must be >= sweep_start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        samples = tuple(start + i * step for i in range(count))

    geometry = wrap(
        "mode_spacing",
        lambda: ModeGeometry(
            d=_to_float(entries, "mode_spacing", strict_min=0.0),
            sigma_g=_to_float(entries, "mode_width", strict_min=0.0),
            f=_to_float(entries, "focal_length", strict_min=0.0),
            k=_to_float(entries, "wavenumber", strict_min=0.0),
        ),
    )

    config = ScenarioConfig(
        decay_type=decay_type,
        state=state,
        rates=rates,
        sweep_mode=sweep_mode,
        samples=samples,
        geometry=geometry,
        det_rows=_to_int(entries, "det_rows", minimum=1),
        det_cols=_to_int(entries, "det_cols", minimum=1),
        det_pitch=_to_float(entries, "det_pitch", strict_min=0.0),
        axis_rotation=_to_float(entries, "axis_rotation"),
        mean_photons=_to_float(entries, "mean_photons", minimum=0.0),
        repetitions=_to_int(entries, "repetitions", minimum=1),
        noiseless=_to_bool(entries, "noiseless"),
        seed=_to_int(entries, "seed", minimum=0),
        out_dir=entries["out_dir"][0],
    )
    # surface sweep validation errors (ordering, range) with config context
    try:
        config.sweep_spec()
    except ValueError as exc:
        raise ConfigError(f"sweep samples invalid: {exc}") from exc
    return config


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)

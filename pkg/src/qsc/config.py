"""INI run configuration with strict key checking.

Sections mirror the modules: ``[system]`` holds :class:`SystemParams`
fields, ``[optimizer]`` the search grid, and ``[sweep]``, ``[monitor]``,
``[bounds]``, ``[mc]`` the per-command settings. Grids are written either
as ``start:stop:step`` (stop inclusive) or as a comma-separated list; an
empty value is an empty grid.
"""

from __future__ import annotations

import configparser
import dataclasses
import difflib
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

from .errors import ConfigError
from .link import SystemParams
from .monitor import VARIANCE_MODELS
from .optimize import Configuration, OptimizerGrid


def parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        if stop < start:
            return ()
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 12) for k in range(n))
    return tuple(float(x) for x in text.split(",") if x.strip())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _optional_float(text: str) -> float | None:
    return None if text.strip().lower() in ("", "none") else float(text)


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _choice(options: Sequence[str]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        text = text.strip()
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return parse


@dataclass(frozen=True)
class SweepSettings:
    configuration: str = Configuration.PASSIVE_ASE.value
    L_grid: tuple[float, ...] = tuple(float(x) for x in range(0, 61))


@dataclass(frozen=True)
class MonitorSettings:
    # L = 0 is excluded: with no loss Eve has no tap, the secure rate saturates
    # for any bright enough source, and the operating brightness is arbitrary.
    L_grid: tuple[float, ...] = tuple(float(x) for x in range(1, 61))
    target_delta_f: float = 1e-3
    snr_time_s: float = 0.1
    variance_model: str = "exact"


@dataclass(frozen=True)
class BoundsSettings:
    loss_db_grid: tuple[float, ...] = tuple(0.5 * k for k in range(25))
    configuration: str = Configuration.ACTIVE.value


@dataclass(frozen=True)
class McSettings:
    seed: int = 20240601
    homodyne_trials: int = 100_000
    coincidence_gates: int = 2_000_000
    opa_sets: int = 20
    shards: int = 16
    homodyne_config: str = "passive_ase"


@dataclass(frozen=True)
class AppConfig:
    system: SystemParams = field(default_factory=SystemParams)
    optimizer: OptimizerGrid = field(default_factory=OptimizerGrid)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    monitor: MonitorSettings = field(default_factory=MonitorSettings)
    bounds: BoundsSettings = field(default_factory=BoundsSettings)
    mc: McSettings = field(default_factory=McSettings)


_CONFIGS = tuple(c.value for c in Configuration)

# section -> key -> parser
SCHEMA: dict[str, dict[str, Callable[[str], Any]]] = {
    "system": {f.name: (_optional_float if f.name in ("kappa_I", "beta") else
                        _bool if f.name == "opa_pe_constraint" else float)
               for f in dataclasses.fields(SystemParams)},
    "optimizer": {"N_S_min": float, "N_S_max": float, "n_N_S": _int, "R_min": float, "n_R": _int,
                  "G_A_excess_min": float, "G_A_excess_max": float, "n_G_A": _int,
                  "refine": _bool, "golden_tol": float},
    "sweep": {"configuration": _choice(_CONFIGS), "L_grid": parse_grid},
    "monitor": {"L_grid": parse_grid, "target_delta_f": float, "snr_time_s": float,
                "variance_model": _choice(VARIANCE_MODELS)},
    "bounds": {"loss_db_grid": parse_grid, "configuration": _choice(_CONFIGS)},
    "mc": {"seed": _int, "homodyne_trials": _int, "coincidence_gates": _int, "opa_sets": _int,
           "shards": _int, "homodyne_config": str},
}


def _suggest(name: str, options) -> str:
    close = difflib.get_close_matches(name, list(options), n=1)
    return f" (did you mean {close[0]!r}?)" if close else ""


def _split_override(item: str) -> tuple[str, str, str]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, value = item.split("=", 1)
    key = key.strip()
    if "." in key:
        section, name = key.split(".", 1)
    else:
        owners = [s for s, keys in SCHEMA.items() if key in keys]
        if len(owners) != 1:
            all_keys = [k for keys in SCHEMA.values() for k in keys]
            hint = f"; qualify it as one of {', '.join(f'{s}.{key}' for s in owners)}" if owners \
                else _suggest(key, all_keys)
            raise ConfigError(f"override key {key!r} is {'ambiguous' if owners else 'unknown'}{hint}")
        section, name = owners[0], key
    return section, name, value


def _raw_sections(path: str | Path | None, preset: str | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case sensitive (N_S vs n_S)
    try:
        if preset is not None:
            ref = resources.files("qsc") / "presets" / f"{preset}.ini"
            if not ref.is_file():
                raise ConfigError(f"unknown preset {preset!r}")
            parser.read_string(ref.read_text(encoding="utf-8"), source=str(ref))
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return parser


def load_config(path: str | Path | None = None, overrides: Sequence[str] = (),
                preset: str | None = None) -> AppConfig:
    """Read a preset and/or INI file, apply ``section.key=value`` overrides, validate."""
    parser = _raw_sections(path, preset)
    values: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]{_suggest(section, SCHEMA)}")
        values[section] = dict(parser.items(section))
    for item in overrides:
        section, name, value = _split_override(item)
        if section not in SCHEMA:
            raise ConfigError(f"unknown section {section!r}{_suggest(section, SCHEMA)}")
        values.setdefault(section, {})[name] = value

    parsed: dict[str, dict[str, Any]] = {}
    for section, items in values.items():
        schema = SCHEMA[section]
        parsed[section] = {}
        for key, text in items.items():
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} in [{section}]{_suggest(key, schema)}")
            try:
                parsed[section][key] = schema[key](text)
            except ValueError as exc:
                raise ConfigError(f"invalid value for {section}.{key}: {exc}") from exc

    builders = {"system": SystemParams, "optimizer": OptimizerGrid, "sweep": SweepSettings,
                "monitor": MonitorSettings, "bounds": BoundsSettings, "mc": McSettings}
    built = {}
    for section, cls in builders.items():
        try:
            built[section] = cls(**parsed.get(section, {}))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid [{section}] settings: {exc}") from exc
    cfg = AppConfig(**built)
    _validate(cfg)
    return cfg


def _validate(cfg: AppConfig) -> None:
    for name, grid in (("sweep.L_grid", cfg.sweep.L_grid), ("monitor.L_grid", cfg.monitor.L_grid)):
        if any(x < 0 for x in grid):
            raise ConfigError(f"{name} has negative distances")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"{name} must be non-decreasing")
    if any(x < 0 for x in cfg.bounds.loss_db_grid):
        raise ConfigError("bounds.loss_db_grid has negative losses")
    if cfg.monitor.target_delta_f <= 0 or cfg.monitor.snr_time_s <= 0:
        raise ConfigError("monitor.target_delta_f and monitor.snr_time_s must be positive")
    mc = cfg.mc
    for name in ("homodyne_trials", "coincidence_gates", "opa_sets", "shards"):
        if getattr(mc, name) <= 0:
            raise ConfigError(f"mc.{name} must be a positive integer, got {getattr(mc, name)}")
    if not 0 <= mc.seed < 2 ** 64:
        raise ConfigError(f"mc.seed must be a 64-bit unsigned integer, got {mc.seed}")
    g = cfg.optimizer
    if g.n_N_S < 1 or g.n_R < 1 or g.n_G_A < 1 or g.N_S_min <= 0 or g.N_S_max < g.N_S_min:
        raise ConfigError("optimizer grid sizes must be positive and N_S_min <= N_S_max")
    if g.R_min <= 0 or g.R_min > cfg.system.R_max:
        raise ConfigError("optimizer.R_min must be positive and not exceed system.R_max")

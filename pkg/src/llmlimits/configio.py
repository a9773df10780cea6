"""JSON config loading: custom models, chips, power constants, and sweeps.

Schema (all sections optional):

    {
      "models": [{"name": ..., "num_layers": ..., ...}],
      "chips":  [{"name": ..., "mem_bw_tbs": ..., ...}],
      "power":  {"<chip name>": {"chip_w_per_mm2": ..., ...}},
      "sweeps": [{"models": [...], "chips": [...], "tps": [...], "contexts": [...]}]
    }

The default config path may be set via the LLMLIMITS_CONFIG environment
variable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from pydantic import ValidationError

from .errors import ConfigError
from .explorer import SweepSpec
from .machine import ChipConfig
from .models import ModelArch
from .perf import MappingFlags
from .power import PowerModel
from .service.schemas import ConfigFileSchema

ENV_CONFIG = "LLMLIMITS_CONFIG"


@dataclass
class LoadedConfig:
    models: dict[str, ModelArch] = field(default_factory=dict)
    chips: dict[str, ChipConfig] = field(default_factory=dict)
    power: dict[str, PowerModel] = field(default_factory=dict)
    sweeps: list[SweepSpec] = field(default_factory=list)


def default_config_path() -> Path | None:
    path = os.environ.get(ENV_CONFIG)
    return Path(path) if path else None


def parse_config(data: dict) -> LoadedConfig:
    """Validate a parsed JSON document and build domain objects."""
    try:
        schema = ConfigFileSchema.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"config field {loc!r}: {first['msg']}") from exc

    cfg = LoadedConfig()
    try:
        for m in schema.models:
            arch = m.to_domain()
            cfg.models[arch.name] = arch
        for c in schema.chips:
            chip = c.to_domain()
            cfg.chips[chip.name] = chip
        for name, p in schema.power.items():
            cfg.power[name] = PowerModel(**p.model_dump())
        for s in schema.sweeps:
            cfg.sweeps.append(SweepSpec(
                models=tuple(s.models),
                chips=tuple(s.chips),
                tps=tuple(s.tps),
                contexts=tuple(s.contexts),
                batches=("one" if s.batches is None
                         else s.batches if isinstance(s.batches, str)
                         else tuple(s.batches)),
                bw_tbs_values=tuple(s.bw_tbs_values) if s.bw_tbs_values else None,
                tp_sync_s_values=tuple(s.tp_sync_s_values) if s.tp_sync_s_values else None,
                batch_cap=s.batch_cap,
                flags=MappingFlags(attention_single_device=s.attention_single_device),
                mi_trials=s.mi_trials,
                mi_seed=s.mi_seed,
            ))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path: str | Path) -> LoadedConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be a JSON object")
    return parse_config(data)


def load_default_config() -> LoadedConfig:
    path = default_config_path()
    if path is None:
        return LoadedConfig()
    return load_config(path)

"""Chip descriptions and their composition into TP x PP systems.

Tensor parallelism aggregates bandwidth/compute within a layer and pays a
per-collective synchronization latency; pipeline parallelism stacks stages
for capacity and pays a per-stage handoff. Builtin chips cover HBM3/HBM4
parts, advanced 3D-stacked DRAM, an SRAM-only die, and a wafer-scale SRAM
assembly with collectives optimized on-wafer.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, floor

from .errors import ConstraintError, InfeasibleError, UnknownNameError
from .models import GIB, ModelArch, kv_bytes_per_token_per_layer, weights_bytes
from .workload import DeploymentPoint, capacity_bytes

MAX_TP = 128                 # collectives beyond this span are not modeled
TP_SYNC_LOW_S = 200e-9       # small all-reduce domains
TP_SYNC_HIGH_S = 1.5e-6      # 16 chips and above
TP_SYNC_RADIX_THRESHOLD = 16
PP_SYNC_S = 100e-9           # one producer-consumer hop per stage boundary
SYNC_OPS_PER_LAYER = 3       # context, head, and FFN tensor parallelism
DEFAULT_PP_CAP = 1024

MIB = 2**20


@dataclass(frozen=True)
class ChipConfig:
    """One accelerator's peak rates, memory, and sync behaviour.

    `mem_bw_tbs` is decimal TB/s; compute rates are PFLOPS/s; capacity is
    bytes. `tp_sync_override_s` replaces the radix-based sync latency (used
    by the wafer-scale part), and `max_tp_span` caps how many of these
    chips a tensor-parallel domain may span.
    """

    name: str
    mem_bw_tbs: float
    tensor_pflops: float
    scalar_pflops: float
    mem_capacity_bytes: float
    die_area_mm2: float = 800.0
    tp_sync_override_s: float | None = None
    max_tp_span: int | None = None

    def __post_init__(self):
        if self.mem_bw_tbs <= 0 or self.tensor_pflops <= 0 or self.scalar_pflops <= 0:
            raise ValueError("all rates must be positive")
        if self.mem_capacity_bytes <= 0:
            raise ValueError("capacity must be positive")

    @property
    def mem_bw_bytes_per_s(self) -> float:
        return self.mem_bw_tbs * 1e12


# Capacities are binary units (96GB -> 96 GiB); bandwidth stays decimal.
# The wafer-scale entry is one composite chip: 25 die-lets' worth of
# compute/bandwidth with on-wafer collectives, not TP-composable further.
_BUILTIN_CHIPS = {
    "xpu-hbm3": ChipConfig("xpu-hbm3", mem_bw_tbs=4.0, tensor_pflops=2.25,
                           scalar_pflops=0.2, mem_capacity_bytes=96 * GIB),
    "xpu-hbm4": ChipConfig("xpu-hbm4", mem_bw_tbs=18.0, tensor_pflops=2.25,
                           scalar_pflops=0.2, mem_capacity_bytes=192 * GIB),
    "xpu-3d-dram": ChipConfig("xpu-3d-dram", mem_bw_tbs=30.0, tensor_pflops=2.25,
                              scalar_pflops=0.2, mem_capacity_bytes=36 * GIB),
    "xpu-sram": ChipConfig("xpu-sram", mem_bw_tbs=117.0, tensor_pflops=1.13,
                           scalar_pflops=0.2, mem_capacity_bytes=512 * MIB),
    "xpu-cows": ChipConfig("xpu-cows", mem_bw_tbs=2250.0, tensor_pflops=28.13,
                           scalar_pflops=5.0, mem_capacity_bytes=11 * GIB,
                           die_area_mm2=25 * 800.0, tp_sync_override_s=800e-9,
                           max_tp_span=1),
}


def builtin_chip_names() -> list[str]:
    return sorted(_BUILTIN_CHIPS)


def builtin_chip(name: str) -> ChipConfig:
    key = name.lower()
    if key not in _BUILTIN_CHIPS:
        raise UnknownNameError("chip", name, builtin_chip_names())
    return _BUILTIN_CHIPS[key]


def chip_from_dict(spec: dict) -> ChipConfig:
    return ChipConfig(**spec)


def tp_sync_latency(tp: int, override: float | None = None) -> float:
    """Per-collective latency for a tensor-parallel domain of `tp` chips."""
    if tp < 1:
        raise ValueError("tp must be >= 1")
    if override is not None:
        return override
    return TP_SYNC_LOW_S if tp < TP_SYNC_RADIX_THRESHOLD else TP_SYNC_HIGH_S


@dataclass(frozen=True)
class SystemConfig:
    """A TP x PP composition of one chip type with aggregate rates."""

    chip: ChipConfig
    tp: int
    pp: int
    t_tp_sync_s: float
    t_pp_sync_s: float = PP_SYNC_S
    sync_ops_per_layer: int = SYNC_OPS_PER_LAYER

    @property
    def n_chips(self) -> int:
        return self.tp * self.pp

    @property
    def agg_bw_tbs(self) -> float:
        return self.tp * self.chip.mem_bw_tbs

    @property
    def agg_bw_bytes_per_s(self) -> float:
        return self.agg_bw_tbs * 1e12

    @property
    def agg_tensor_flops_per_s(self) -> float:
        return self.tp * self.chip.tensor_pflops * 1e15

    @property
    def agg_scalar_flops_per_s(self) -> float:
        return self.tp * self.chip.scalar_pflops * 1e15

    @property
    def agg_capacity_bytes(self) -> float:
        return self.tp * self.pp * self.chip.mem_capacity_bytes


def compose_system(
    chip: ChipConfig,
    tp: int,
    pp: int = 1,
    tp_sync_override_s: float | None = None,
    pp_sync_s: float = PP_SYNC_S,
    sync_ops_per_layer: int = SYNC_OPS_PER_LAYER,
) -> SystemConfig:
    """Aggregate `tp * pp` chips into a system, enforcing span limits."""
    if tp < 1 or pp < 1:
        raise ConstraintError("tp and pp must be >= 1")
    if tp > MAX_TP:
        raise ConstraintError(f"tp={tp} exceeds the {MAX_TP}-chip tensor-parallel limit")
    if chip.max_tp_span is not None and tp > chip.max_tp_span:
        raise ConstraintError(
            f"{chip.name} supports tensor parallelism only up to {chip.max_tp_span} unit(s)"
        )
    override = tp_sync_override_s if tp_sync_override_s is not None else chip.tp_sync_override_s
    return SystemConfig(
        chip=chip, tp=tp, pp=pp,
        t_tp_sync_s=tp_sync_latency(tp, override),
        t_pp_sync_s=pp_sync_s,
        sync_ops_per_layer=sync_ops_per_layer,
    )


def min_pp(
    chip: ChipConfig,
    tp: int,
    m: ModelArch,
    p: DeploymentPoint,
    pp_cap: int = DEFAULT_PP_CAP,
) -> int:
    """Fewest pipeline stages whose combined capacity holds weights + KV."""
    need = capacity_bytes(m, p)
    per_stage = tp * chip.mem_capacity_bytes
    pp = max(1, ceil(need / per_stage))
    if pp > pp_cap:
        raise InfeasibleError(
            f"{m.name} at batch={p.batch} context={p.context} needs {need / GIB:.0f} GiB, "
            f"beyond {pp_cap} stages of {tp}x {chip.name}"
        )
    return pp


def max_batch(
    chip: ChipConfig,
    tp: int,
    pp: int,
    m: ModelArch,
    context: int,
    batch_cap: int | None = None,
) -> int:
    """Largest batch whose weights + KV fit in `tp * pp` chips' memory."""
    total = tp * pp * chip.mem_capacity_bytes
    spare = total - weights_bytes(m)
    per_user = context * kv_bytes_per_token_per_layer(m) * m.num_layers
    if spare < per_user or spare < 0:
        raise InfeasibleError(
            f"{m.name} at context={context} does not fit a single user in "
            f"{tp * pp}x {chip.name} ({total / GIB:.0f} GiB)"
        )
    b = floor(spare / per_user) if per_user > 0 else (batch_cap or 1)
    if batch_cap is not None:
        b = min(b, batch_cap)
    return max(1, b)

"""System power model and the tokens-per-watt efficiency metric.

Chip power scales with die area at a fixed watts-per-mm2; servers add a
flat overhead per group of chips; memory charges dynamic energy per bit
actually moved plus optional static power per GB. Absolute memory-energy
constants are placeholders (vendor numbers vary widely), so efficiency is
meant to be compared across configs, not read as an absolute.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

from .errors import DomainError
from .machine import ChipConfig, SystemConfig
from .workload import Workload


@dataclass(frozen=True)
class PowerModel:
    chip_w_per_mm2: float = 1.0
    server_overhead_w: float = 300.0
    chips_per_server: int = 8
    mem_dynamic_pj_per_bit: float = 0.0
    mem_static_w_per_gb: float = 0.0
    interconnect_w: float = 0.0

    def __post_init__(self):
        for name in ("chip_w_per_mm2", "server_overhead_w", "chips_per_server",
                     "mem_dynamic_pj_per_bit", "mem_static_w_per_gb", "interconnect_w"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


# Placeholder per-technology dynamic-read energies; SRAM and wafer-scale
# memory energy is folded into die power.
_MEM_PJ_PER_BIT = {
    "xpu-hbm3": 4.0,
    "xpu-hbm4": 3.0,
    "xpu-3d-dram": 1.5,
    "xpu-sram": 0.0,
    "xpu-cows": 0.0,
}


def builtin_power_model(chip_name: str) -> PowerModel:
    """Default power constants for a builtin chip (0 pJ/bit for unknowns)."""
    return PowerModel(mem_dynamic_pj_per_bit=_MEM_PJ_PER_BIT.get(chip_name.lower(), 0.0))


def chip_power(chip: ChipConfig, pm: PowerModel) -> float:
    return chip.die_area_mm2 * pm.chip_w_per_mm2


def system_power(sys: SystemConfig, w: Workload, t_batch_s: float, pm: PowerModel) -> float:
    """Watts drawn while sustaining one decode step every `t_batch_s`."""
    n = sys.n_chips
    if n == 0:
        return 0.0
    chips = n * chip_power(sys.chip, pm)
    servers = ceil(n / pm.chips_per_server) * pm.server_overhead_w
    achieved_bytes_per_s = w.total_rd_bytes / t_batch_s if t_batch_s > 0 else 0.0
    mem_dynamic = achieved_bytes_per_s * 8 * pm.mem_dynamic_pj_per_bit * 1e-12
    mem_static = (sys.agg_capacity_bytes / 1e9) * pm.mem_static_w_per_gb
    return chips + servers + mem_dynamic + mem_static + pm.interconnect_w


def efficiency(stps: float, watts: float) -> float:
    """System tokens per second per watt."""
    if watts <= 0:
        raise DomainError("power must be positive to compute tokens/s/W")
    return stps / watts

"""The analytical decode-latency model.

One decode step costs the longer of streaming all bytes and running all
FLOPs, plus exposed latency that overlaps with neither: collective syncs
per layer, pipeline handoffs, MoE routing hops, and the skew of waiting
for the most loaded expert. Throughput follows directly: each user sees
one token per step; the system retires `pp * batch` tokens per step.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InfeasibleError
from .machine import SystemConfig
from .models import GIB, ModelArch
from .workload import DeploymentPoint, Workload, capacity_bytes, decode_workload

MOE_ROUTING_HOP_S = 800e-9   # per MoE layer, independent of system scale


@dataclass(frozen=True)
class MappingFlags:
    """Mapping variations. `attention_single_device` pins all KV traffic to
    one chip's bandwidth (processing-in-memory style tensor mappings)."""

    attention_single_device: bool = False


@dataclass(frozen=True)
class LatencyBreakdown:
    """Seconds per token, itemized."""

    t_compute: float
    t_mem: float
    t_exposed_sync: float
    t_exposed_pp: float
    t_exposed_moe_balance: float
    t_exposed_moe_routing: float
    t_exposed_other: float

    @property
    def t_exposed(self) -> float:
        return (self.t_exposed_sync + self.t_exposed_pp + self.t_exposed_moe_balance
                + self.t_exposed_moe_routing + self.t_exposed_other)

    @property
    def t_batch(self) -> float:
        return max(self.t_compute, self.t_mem) + self.t_exposed


@dataclass(frozen=True)
class ThroughputReport:
    """Throughput and attribution for one evaluated deployment point."""

    utps: float
    stps: float
    batch: int
    pp: int
    bottleneck: str                  # "memory" or "compute"
    tensor_utilization: float
    mem_bw_utilization: float


def compute_latency(w: Workload, sys: SystemConfig) -> float:
    """Time to run the step's FLOPs at aggregate peak rates."""
    return (w.tensor_flops / sys.agg_tensor_flops_per_s
            + w.scalar_flops / sys.agg_scalar_flops_per_s)


def memory_latency(w: Workload, sys: SystemConfig, flags: MappingFlags = MappingFlags()) -> float:
    """Time to stream the step's bytes from backing memory."""
    if flags.attention_single_device:
        kv = w.kv_rd_bytes + w.kv_wr_bytes
        return (w.weights_bytes / sys.agg_bw_bytes_per_s
                + kv / sys.chip.mem_bw_bytes_per_s)
    return w.total_rd_bytes / sys.agg_bw_bytes_per_s


def exposed_latency(
    m: ModelArch,
    sys: SystemConfig,
    w: Workload,
    other_s: float = 0.0,
) -> tuple[float, float, float, float, float]:
    """Itemized exposed terms: (sync, pipeline, moe balance, moe routing, other)."""
    sync = sys.t_tp_sync_s * sys.sync_ops_per_layer * m.num_layers
    pipeline = sys.t_pp_sync_s * sys.pp
    if m.moe is not None:
        balance = (w.moe_max_routed_flops - w.moe_avg_routed_flops) / sys.agg_tensor_flops_per_s
        routing = MOE_ROUTING_HOP_S * m.moe.num_moe_layers
    else:
        balance = 0.0
        routing = 0.0
    return sync, pipeline, balance, routing, other_s


def evaluate(
    m: ModelArch,
    p: DeploymentPoint,
    sys: SystemConfig,
    flags: MappingFlags = MappingFlags(),
    mi: float = 1.0,
    other_exposed_s: float = 0.0,
    check_capacity: bool = True,
) -> tuple[LatencyBreakdown, ThroughputReport]:
    """Evaluate one deployment point on one system."""
    if check_capacity:
        need = capacity_bytes(m, p)
        if need > sys.agg_capacity_bytes:
            raise InfeasibleError(
                f"{m.name} batch={p.batch} context={p.context} needs {need / GIB:.0f} GiB "
                f"but {sys.n_chips}x {sys.chip.name} holds {sys.agg_capacity_bytes / GIB:.0f} GiB"
            )

    w = decode_workload(m, p, mi)
    t_c = compute_latency(w, sys)
    t_m = memory_latency(w, sys, flags)
    sync, pipeline, balance, routing, other = exposed_latency(m, sys, w, other_exposed_s)

    breakdown = LatencyBreakdown(
        t_compute=t_c,
        t_mem=t_m,
        t_exposed_sync=sync,
        t_exposed_pp=pipeline,
        t_exposed_moe_balance=balance,
        t_exposed_moe_routing=routing,
        t_exposed_other=other,
    )
    t_batch = breakdown.t_batch
    utps = 1.0 / t_batch
    report = ThroughputReport(
        utps=utps,
        stps=sys.pp * p.batch * utps,
        batch=p.batch,
        pp=sys.pp,
        bottleneck="memory" if t_m >= t_c else "compute",
        tensor_utilization=(w.useful_tensor_flops / sys.agg_tensor_flops_per_s) / t_batch,
        mem_bw_utilization=(w.total_rd_bytes / sys.agg_bw_bytes_per_s) / t_batch,
    )
    return breakdown, report

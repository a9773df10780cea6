"""Analytical performance-limit model for transformer LLM decoding.

Given a model architecture and a hardware/system configuration, computes
per-token latency decomposition, user/system throughput, memory capacity
needs, arithmetic intensity, and power efficiency, and sweeps the design
space across parallelism, context, batch, bandwidth, and synchronization.
"""

from .errors import (
    ConfigError,
    ConstraintError,
    DomainError,
    InfeasibleError,
    LlmLimitsError,
    UnknownNameError,
    WrongArchitectureError,
)
from .explorer import (
    SweepResult,
    SweepRow,
    SweepSpec,
    efficiency_curve,
    evaluate_point,
    imbalance_for,
    max_stps,
    max_utps,
    run_sweep,
)
from .machine import (
    ChipConfig,
    SystemConfig,
    builtin_chip,
    builtin_chip_names,
    compose_system,
    max_batch,
    min_pp,
    tp_sync_latency,
)
from .models import (
    GIB,
    LatentAttention,
    ModelArch,
    MoeLayout,
    ScalarConsts,
    builtin_model,
    builtin_model_names,
    kv_bytes_per_token_per_layer,
    weights_bytes,
)
from .moe import MoeImbalance, estimate_imbalance
from .perf import (
    LatencyBreakdown,
    MappingFlags,
    ThroughputReport,
    compute_latency,
    evaluate,
    exposed_latency,
    memory_latency,
)
from .power import PowerModel, builtin_power_model, chip_power, efficiency, system_power
from .workload import (
    DeploymentPoint,
    Workload,
    arithmetic_intensity,
    attention_ami_asymptote,
    capacity_bytes,
    capacity_gib,
    decode_workload,
    deepseek_workload,
    llama_workload,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

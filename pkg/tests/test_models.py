import pytest

from llmlimits import (
    GIB,
    UnknownNameError,
    builtin_model,
    builtin_model_names,
    kv_bytes_per_token_per_layer,
    weights_bytes,
)
from llmlimits.models import LatentAttention, ModelArch, MoeLayout, model_from_dict


def test_builtin_names():
    assert builtin_model_names() == ["deepseekv3", "llama3-405b", "llama3-70b"]


@pytest.mark.parametrize("name,field,expected", [
    ("llama3-70b", "ffn_dim", 28672),
    ("llama3-70b", "num_layers", 80),
    ("llama3-70b", "heads", 64),
    ("llama3-405b", "num_layers", 126),
    ("llama3-405b", "embed_dim", 16384),
    ("deepseekv3", "embed_dim", 7168),
    ("deepseekv3", "heads", 128),
])
def test_builtin_hyperparameters(name, field, expected):
    assert getattr(builtin_model(name), field) == expected


def test_deepseek_moe_and_mla_blocks():
    m = builtin_model("deepseekv3")
    assert m.moe.routed_experts == 256
    assert m.moe.active_experts == 8
    assert m.moe.expert_dim == 2048
    assert m.moe.num_dense_layers == 3
    assert m.moe.num_moe_layers == 58
    assert m.mla.q_latent == 1536
    assert m.mla.kv_latent == 512
    assert m.mla.rope_dim == 64


def test_elem_bytes_default_one():
    for name in builtin_model_names():
        assert builtin_model(name).elem_bytes == 1


def test_unknown_model_lists_valid_names():
    with pytest.raises(UnknownNameError) as exc:
        builtin_model("llama2-7b")
    msg = str(exc.value)
    for name in builtin_model_names():
        assert name in msg


@pytest.mark.parametrize("name,gib", [
    ("llama3-70b", 65),
    ("llama3-405b", 377),
    ("deepseekv3", 625),
])
def test_weights_bytes_matches_capacity_oracle(name, gib):
    # oracle: divide by 2^30 and compare to the known weights-only footprint
    assert round(weights_bytes(builtin_model(name)) / GIB) == gib


def test_weights_bytes_headline_counts():
    assert weights_bytes(builtin_model("llama3-70b")) == 70e9
    assert weights_bytes(builtin_model("llama3-405b")) == 405e9


@pytest.mark.parametrize("name,expected", [
    ("llama3-70b", 2048),     # 8 kv-heads * 128 dims * K and V
    ("llama3-405b", 2048),
    ("deepseekv3", 576),      # 512 latent + 64 positional
])
def test_kv_bytes_per_token_per_layer(name, expected):
    assert kv_bytes_per_token_per_layer(builtin_model(name)) == expected


def test_latent_cache_smaller_than_grouped_query():
    ds = kv_bytes_per_token_per_layer(builtin_model("deepseekv3"))
    for name in ("llama3-70b", "llama3-405b"):
        assert ds < kv_bytes_per_token_per_layer(builtin_model(name))


def test_per_user_kv_footprint_llama405_64k():
    m = builtin_model("llama3-405b")
    kv = 65536 * kv_bytes_per_token_per_layer(m) * m.num_layers
    assert kv / GIB == pytest.approx(15.75, abs=0.1)


def test_gqa_head_grouping_validated():
    with pytest.raises(ValueError):
        ModelArch(name="bad", num_layers=2, embed_dim=64, heads=6, kv_heads=4,
                  head_dim=8, ffn_dim=128, nominal_params=1e6)


def test_moe_layer_split_validated():
    with pytest.raises(ValueError):
        ModelArch(
            name="bad", num_layers=10, embed_dim=64, heads=4, kv_heads=4,
            head_dim=16, ffn_dim=128, nominal_params=1e6,
            mla=LatentAttention(8, 8, 4),
            moe=MoeLayout(expert_dim=32, shared_experts=1, routed_experts=8,
                          active_experts=2, num_dense_layers=3, num_moe_layers=8),
        )


def test_model_from_dict_roundtrip():
    spec = {
        "name": "tiny", "num_layers": 4, "embed_dim": 64, "heads": 8,
        "kv_heads": 2, "head_dim": 8, "ffn_dim": 256, "nominal_params": 1e6,
    }
    m = model_from_dict(spec)
    assert m.kv_heads == 2
    assert m.mla is None and m.moe is None

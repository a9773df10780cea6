import pytest

from llmlimits import (
    DeploymentPoint,
    PowerModel,
    builtin_chip,
    builtin_model,
    builtin_power_model,
    chip_power,
    compose_system,
    decode_workload,
    efficiency,
    evaluate,
    system_power,
)
from llmlimits.errors import DomainError
from llmlimits.machine import SystemConfig

HBM3 = builtin_chip("xpu-hbm3")
L70 = builtin_model("llama3-70b")


@pytest.mark.parametrize("area,watts", [(800, 800), (0, 0), (400, 400)])
def test_chip_power_scales_with_area(area, watts):
    from dataclasses import replace

    chip = replace(HBM3, die_area_mm2=area) if area else HBM3
    pm = PowerModel()
    if area == 0:
        chip = replace(HBM3, die_area_mm2=0.0)
    assert chip_power(chip, pm) == watts


def _memoryless():
    return PowerModel(mem_dynamic_pj_per_bit=0.0, mem_static_w_per_gb=0.0)


def test_system_power_eight_chips():
    sys = compose_system(HBM3, 8, 1)
    w = decode_workload(L70, DeploymentPoint(1, 4096))
    assert system_power(sys, w, t_batch_s=1e-3, pm=_memoryless()) == 8 * 800 + 300


def test_system_power_one_chip_one_server():
    sys = compose_system(HBM3, 1, 1)
    w = decode_workload(L70, DeploymentPoint(1, 1024))
    assert system_power(sys, w, 1e-3, _memoryless()) == 1100


def test_system_power_zero_chips():
    sys = SystemConfig(chip=HBM3, tp=0, pp=1, t_tp_sync_s=200e-9)
    w = decode_workload(L70, DeploymentPoint(1, 1024))
    assert system_power(sys, w, 1e-3, _memoryless()) == 0.0


def test_dynamic_memory_power_tracks_traffic():
    sys = compose_system(HBM3, 8, 1)
    w = decode_workload(L70, DeploymentPoint(1, 4096))
    pm = PowerModel(mem_dynamic_pj_per_bit=4.0)
    base = system_power(sys, w, 1e-3, _memoryless())
    total = system_power(sys, w, 1e-3, pm)
    expected_dyn = (w.total_rd_bytes / 1e-3) * 8 * 4.0 * 1e-12
    assert total - base == pytest.approx(expected_dyn, rel=1e-12)
    # slower steps move fewer bytes/s: less dynamic power
    assert system_power(sys, w, 2e-3, pm) < total


def test_builtin_power_model_defaults():
    assert builtin_power_model("xpu-hbm3").mem_dynamic_pj_per_bit == 4.0
    assert builtin_power_model("xpu-sram").mem_dynamic_pj_per_bit == 0.0


def test_efficiency():
    assert efficiency(1000, 1000) == 1.0
    assert efficiency(2000, 1000) == 2.0
    with pytest.raises(DomainError):
        efficiency(10, 0)


def test_efficiency_ratios_invariant_under_power_scaling():
    """Relative STPS/W ordering across configs survives scaling every constant."""
    sys_a = compose_system(HBM3, 8)
    sys_b = compose_system(HBM3, 32)
    w_a = decode_workload(L70, DeploymentPoint(1, 4096))

    def eff(sys, scale):
        pm = PowerModel(chip_w_per_mm2=1.0 * scale, server_overhead_w=300.0 * scale,
                        mem_dynamic_pj_per_bit=4.0 * scale)
        bd, rep = evaluate(L70, DeploymentPoint(1, 4096), sys)
        return efficiency(rep.stps, system_power(sys, w_a, bd.t_batch, pm))

    assert (eff(sys_a, 1.0) > eff(sys_b, 1.0)) == (eff(sys_a, 7.5) > eff(sys_b, 7.5))

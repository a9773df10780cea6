"""Builtin report tables over the builtin models and chips.

t6: capacity (GiB, exact integers) and arithmetic intensity per
    model x batch x context.
t3: best single-user tokens/s per system and context.
t4: capacity-limited system tokens/s with the paired user rate.
t2: the condensed 4K/128K view combining t3 and t4.

PIM-style rows (attention pinned to one device, and a pipeline-only
mapping) render as dashes unless chip definitions for them are supplied.
"""

from __future__ import annotations

import math

from .explorer import evaluate_point, imbalance_for
from .machine import ChipConfig, builtin_chip
from .models import builtin_model
from .perf import MappingFlags
from .render import RenderTarget, fmt_count, render_table
from .workload import DeploymentPoint, arithmetic_intensity, capacity_gib

TABLE_MODELS = ("llama3-70b", "llama3-405b", "deepseekv3")
TABLE_CONTEXTS = (4096, 8192, 16384, 32768, 65536, 131072)
T6_CONTEXTS = (1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072)
T6_BATCHES = (1, 32)
TABLE_TPS = (8, 32, 128)
PIM_ROWS = ("cent-tp", "cent-pp")


def _ctx_label(t: int) -> str:
    return f"{t // 1024}K"


def round_gib(x: float) -> int:
    """Half-up integer rounding for capacity cells."""
    return int(math.floor(x + 0.5))


def t6_rows(mi_trials: int | None = None, mi_seed: int = 0) -> tuple[list[str], list[list]]:
    headers = ["model", "batch", "context", "capacity_gib", "ami"]
    rows: list[list] = []
    for name in TABLE_MODELS:
        m = builtin_model(name)
        for b in T6_BATCHES:
            kwargs = {} if mi_trials is None else {"trials": mi_trials, "seed": mi_seed}
            mi = imbalance_for(m, b, **kwargs)
            for t in T6_CONTEXTS:
                p = DeploymentPoint(b, t)
                rows.append([name, b, _ctx_label(t),
                             round_gib(capacity_gib(m, p)),
                             round(arithmetic_intensity(m, p, mi), 2)])
    return headers, rows


def _cell(model: str, chip: str | ChipConfig, tp: int, context: int, batch,
          k_notation: bool, paired: bool, **kwargs) -> str:
    resolved = chip if isinstance(chip, ChipConfig) else builtin_chip(chip)
    row = evaluate_point(builtin_model(model), resolved, tp, context, batch=batch, **kwargs)
    if not row.ok:
        return "- (-)" if paired else "-"
    if paired:
        return (f"{fmt_count(row.report.stps, k_notation)} "
                f"({fmt_count(row.report.utps, k_notation)})")
    return fmt_count(row.report.utps, k_notation)


def _pim_cell(chip: ChipConfig | None, mapping: str, model: str, tp_ctx, paired: bool,
              k_notation: bool) -> str:
    if chip is None:
        return "- (-)" if paired else "-"
    context, = tp_ctx
    flags = MappingFlags(attention_single_device=(mapping == "cent-tp"))
    tp = 1 if mapping == "cent-pp" else (chip.max_tp_span or 128)
    row = evaluate_point(builtin_model(model), chip, tp, context,
                         batch=("max" if paired else 1), batch_cap=None, flags=flags)
    if not row.ok:
        return "- (-)" if paired else "-"
    if paired:
        return (f"{fmt_count(row.report.stps, k_notation)} "
                f"({fmt_count(row.report.utps, k_notation)})")
    return fmt_count(row.report.utps, k_notation)


def _throughput_rows(paired: bool, k_notation: bool,
                     pim_chip: ChipConfig | None = None) -> tuple[list[str], list[list]]:
    headers = ["model", "system"] + [_ctx_label(t) for t in TABLE_CONTEXTS]
    rows: list[list] = []
    for model in TABLE_MODELS:
        for tp in TABLE_TPS:
            row = [model, f"xPU-HBM3-TP{tp}"]
            for t in TABLE_CONTEXTS:
                row.append(_cell(model, "xpu-hbm3", tp, t,
                                 "max" if paired else 1, k_notation, paired,
                                 batch_cap=None))
            rows.append(row)
        for mapping in PIM_ROWS:
            row = [model, mapping.upper()]
            for t in TABLE_CONTEXTS:
                row.append(_pim_cell(pim_chip, mapping, model, (t,), paired, k_notation))
            rows.append(row)
    return headers, rows


def t3_rows(k_notation: bool = True, pim_chip: ChipConfig | None = None):
    return _throughput_rows(paired=False, k_notation=k_notation, pim_chip=pim_chip)


def t4_rows(k_notation: bool = True, pim_chip: ChipConfig | None = None):
    return _throughput_rows(paired=True, k_notation=k_notation, pim_chip=pim_chip)


def t2_rows(k_notation: bool = True) -> tuple[list[str], list[list]]:
    headers = ["model", "system", "utps_4K", "utps_128K", "max_stps_4K", "max_stps_128K"]
    rows: list[list] = []
    for model in TABLE_MODELS:
        for tp in TABLE_TPS:
            rows.append([
                model, f"xPU-HBM3-TP{tp}",
                _cell(model, "xpu-hbm3", tp, 4096, 1, k_notation, False),
                _cell(model, "xpu-hbm3", tp, 131072, 1, k_notation, False),
                _cell(model, "xpu-hbm3", tp, 4096, "max", k_notation, True, batch_cap=None),
                _cell(model, "xpu-hbm3", tp, 131072, "max", k_notation, True, batch_cap=None),
            ])
    return headers, rows


def render_builtin_table(which: str, target: RenderTarget,
                         pim_chip: ChipConfig | None = None,
                         mi_trials: int | None = None) -> str:
    which = which.lower()
    if which == "t6":
        headers, rows = t6_rows(mi_trials=mi_trials)
    elif which == "t3":
        headers, rows = t3_rows(k_notation=target.k_notation, pim_chip=pim_chip)
    elif which == "t4":
        headers, rows = t4_rows(k_notation=target.k_notation, pim_chip=pim_chip)
    elif which == "t2":
        headers, rows = t2_rows(k_notation=target.k_notation)
    else:
        raise ValueError(f"unknown table {which!r}; choose from t2, t3, t4, t6")
    return render_table(headers, rows, target)

"""Design-space sweeps over models, chips, parallelism, context, batch,
bandwidth, and synchronization latency.

Every grid point is evaluated independently and deterministically; points
that cannot fit are carried in the result with their infeasibility reason
rather than aborting the sweep. Imbalance factors are Monte Carlo
estimates cached per token count, so a sweep pays for each batch size
once.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

from .errors import ConstraintError, InfeasibleError, LlmLimitsError
from .machine import ChipConfig, builtin_chip, compose_system, max_batch, min_pp
from .models import ModelArch, builtin_model
from .moe import estimate_imbalance, estimate_imbalance_binomial
from .perf import LatencyBreakdown, MappingFlags, ThroughputReport, evaluate
from .power import PowerModel, builtin_power_model, efficiency, system_power
from .workload import DeploymentPoint, capacity_gib, decode_workload

DEFAULT_BATCH_CAP = 64
DEFAULT_TP_CHOICES = (1, 2, 4, 8, 16, 32, 64, 128)
# Sampling effort for imbalance factors used inside sweeps/tables; the
# standalone estimator defaults to full effort instead.
SWEEP_MI_TRIALS = 10_000
SWEEP_MI_SEED = 0
# Above this token count the exact subset sampler's cost/memory blows up;
# per-expert binomial sampling is indistinguishable there.
_MI_EXACT_TOKEN_LIMIT = 512


@lru_cache(maxsize=256)
def _cached_mi(routed: int, active: int, tokens: int, trials: int, seed: int) -> float:
    if tokens <= _MI_EXACT_TOKEN_LIMIT:
        return estimate_imbalance(routed, active, tokens, trials, seed).mi
    return estimate_imbalance_binomial(routed, active, tokens, trials, seed).mi


def imbalance_for(m: ModelArch, batch: int,
                  trials: int = SWEEP_MI_TRIALS, seed: int = SWEEP_MI_SEED) -> float:
    """Imbalance factor for this model at this batch size (1.0 if dense)."""
    if m.moe is None:
        return 1.0
    tokens = batch * m.out_tokens
    return _cached_mi(m.moe.routed_experts, m.moe.active_experts, tokens, trials, seed)


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian grid to evaluate.

    `batches` is "one", "max" (capacity-limited, honoring `batch_cap`), or
    an explicit tuple of batch sizes. `bw_tbs_values` / `tp_sync_s_values`
    override the chip's bandwidth / sync latency axis-style; None keeps the
    chip defaults as a single point.
    """

    models: tuple[str, ...]
    chips: tuple[str, ...]
    tps: tuple[int, ...]
    contexts: tuple[int, ...]
    batches: str | tuple[int, ...] = "one"
    bw_tbs_values: tuple[float, ...] | None = None
    tp_sync_s_values: tuple[float, ...] | None = None
    batch_cap: int | None = DEFAULT_BATCH_CAP
    flags: MappingFlags = field(default_factory=MappingFlags)
    other_exposed_s: float = 0.0
    mi_trials: int = SWEEP_MI_TRIALS
    mi_seed: int = SWEEP_MI_SEED

    def __post_init__(self):
        if not (self.models and self.chips and self.tps and self.contexts):
            raise ConstraintError("sweep axes must be non-empty")
        if isinstance(self.batches, str) and self.batches not in ("one", "max"):
            raise ConstraintError(f"batches must be 'one', 'max', or explicit sizes, got {self.batches!r}")


@dataclass(frozen=True)
class SweepRow:
    """One evaluated (or infeasible) grid point."""

    model: str
    chip: str
    tp: int
    pp: int | None
    batch: int | None
    context: int
    bw_tbs: float
    tp_sync_s: float
    breakdown: LatencyBreakdown | None = None
    report: ThroughputReport | None = None
    capacity_gib: float | None = None
    power_w: float | None = None
    stps_per_w: float | None = None
    infeasible: str | None = None

    @property
    def ok(self) -> bool:
        return self.infeasible is None


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]

    def feasible(self) -> list[SweepRow]:
        return [r for r in self.rows if r.ok]


def _chip_variant(chip: ChipConfig, bw_tbs: float | None) -> ChipConfig:
    if bw_tbs is None:
        return chip
    return replace(chip, mem_bw_tbs=bw_tbs)


def evaluate_point(
    m: ModelArch,
    chip: ChipConfig,
    tp: int,
    context: int,
    batch: int | str = 1,
    pp: int | None = None,
    tp_sync_s: float | None = None,
    flags: MappingFlags = MappingFlags(),
    batch_cap: int | None = None,
    power_model: PowerModel | None = None,
    other_exposed_s: float = 0.0,
    mi_trials: int = SWEEP_MI_TRIALS,
    mi_seed: int = SWEEP_MI_SEED,
) -> SweepRow:
    """Evaluate one point, auto-sizing pp (and batch when asked for "max")."""
    pm = power_model if power_model is not None else builtin_power_model(chip.name)
    try:
        if batch == "max":
            probe = pp if pp is not None else min_pp(chip, tp, m, DeploymentPoint(1, context))
            b = max_batch(chip, tp, probe, m, context, batch_cap)
            # growing the batch may itself demand more stages
            while pp is None:
                need = min_pp(chip, tp, m, DeploymentPoint(b, context))
                if need <= probe:
                    break
                probe = need
                b = max_batch(chip, tp, probe, m, context, batch_cap)
        else:
            b = int(batch)
            probe = pp if pp is not None else min_pp(chip, tp, m, DeploymentPoint(b, context))
        point = DeploymentPoint(b, context)
        sys = compose_system(chip, tp, probe, tp_sync_override_s=tp_sync_s)
        mi = imbalance_for(m, b, mi_trials, mi_seed)
        breakdown, report = evaluate(m, point, sys, flags, mi, other_exposed_s)
        w = decode_workload(m, point, mi)
        watts = system_power(sys, w, breakdown.t_batch, pm)
        return SweepRow(
            model=m.name, chip=chip.name, tp=tp, pp=probe, batch=b, context=context,
            bw_tbs=chip.mem_bw_tbs,
            tp_sync_s=sys.t_tp_sync_s,
            breakdown=breakdown, report=report,
            capacity_gib=capacity_gib(m, point),
            power_w=watts,
            stps_per_w=efficiency(report.stps, watts),
        )
    except (InfeasibleError, ConstraintError) as exc:
        return SweepRow(
            model=m.name, chip=chip.name, tp=tp, pp=pp, batch=None, context=context,
            bw_tbs=chip.mem_bw_tbs,
            tp_sync_s=tp_sync_s if tp_sync_s is not None else float("nan"),
            infeasible=str(exc),
        )


def _resolve_model(name: str, extra: dict[str, ModelArch] | None) -> ModelArch:
    if extra and name in extra:
        return extra[name]
    return builtin_model(name)


def _resolve_chip(name: str, extra: dict[str, ChipConfig] | None) -> ChipConfig:
    if extra and name in extra:
        return extra[name]
    return builtin_chip(name)


def run_sweep(
    spec: SweepSpec,
    extra_models: dict[str, ModelArch] | None = None,
    extra_chips: dict[str, ChipConfig] | None = None,
    power_models: dict[str, PowerModel] | None = None,
) -> SweepResult:
    """Evaluate the full cartesian grid in deterministic row order."""
    rows: list[SweepRow] = []
    bw_axis: tuple[float | None, ...] = spec.bw_tbs_values or (None,)
    sync_axis: tuple[float | None, ...] = spec.tp_sync_s_values or (None,)
    batch_axis: tuple[int | str, ...]
    if spec.batches == "one":
        batch_axis = (1,)
    elif spec.batches == "max":
        batch_axis = ("max",)
    else:
        batch_axis = tuple(spec.batches)

    for model_name in spec.models:
        m = _resolve_model(model_name, extra_models)
        for chip_name in spec.chips:
            base_chip = _resolve_chip(chip_name, extra_chips)
            pm = (power_models or {}).get(chip_name)
            for tp in spec.tps:
                for context in spec.contexts:
                    for b in batch_axis:
                        for bw in bw_axis:
                            for sync in sync_axis:
                                rows.append(evaluate_point(
                                    m, _chip_variant(base_chip, bw), tp, context, b,
                                    tp_sync_s=sync, flags=spec.flags,
                                    batch_cap=spec.batch_cap, power_model=pm,
                                    other_exposed_s=spec.other_exposed_s,
                                    mi_trials=spec.mi_trials, mi_seed=spec.mi_seed,
                                ))
    return SweepResult(spec=spec, rows=tuple(rows))


def max_utps(
    model: str | ModelArch,
    chip: str | ChipConfig,
    context: int,
    tp_choices: tuple[int, ...] = DEFAULT_TP_CHOICES,
    **kwargs,
) -> SweepRow:
    """Best single-user throughput over the tensor-parallel axis."""
    m = model if isinstance(model, ModelArch) else builtin_model(model)
    c = chip if isinstance(chip, ChipConfig) else builtin_chip(chip)
    if c.max_tp_span is not None:
        tp_choices = tuple(t for t in tp_choices if t <= c.max_tp_span) or (1,)
    best: SweepRow | None = None
    last: SweepRow | None = None
    for tp in tp_choices:
        row = evaluate_point(m, c, tp, context, batch=1, **kwargs)
        last = row
        if row.ok and (best is None or row.report.utps > best.report.utps):
            best = row
    if best is None:
        raise InfeasibleError(
            f"{m.name} at context={context} fits no tensor-parallel span on {c.name}: "
            f"{last.infeasible if last else 'no tp choices'}"
        )
    return best


def max_stps(
    model: str | ModelArch,
    chip: str | ChipConfig,
    tp: int,
    context: int,
    batch_cap: int | None = None,
    **kwargs,
) -> SweepRow:
    """Capacity-limited batch scaling: the batch cap is off by default here."""
    m = model if isinstance(model, ModelArch) else builtin_model(model)
    c = chip if isinstance(chip, ChipConfig) else builtin_chip(chip)
    row = evaluate_point(m, c, tp, context, batch="max", batch_cap=batch_cap, **kwargs)
    if not row.ok:
        raise InfeasibleError(row.infeasible)
    return row


@dataclass(frozen=True)
class EfficiencyPoint:
    context: int
    batch: int
    utps: float
    stps: float
    power_w: float
    stps_per_w: float
    normalized: float


def efficiency_curve(
    model: str | ModelArch,
    chip: str | ChipConfig,
    contexts: tuple[int, ...],
    tp: int,
    batch_cap: int | None = DEFAULT_BATCH_CAP,
    reference_context: int | None = None,
    **kwargs,
) -> list[EfficiencyPoint]:
    """Tokens-per-watt across batch sizes per context, normalized to the
    best tokens-per-watt at the reference context (default: the smallest)."""
    m = model if isinstance(model, ModelArch) else builtin_model(model)
    c = chip if isinstance(chip, ChipConfig) else builtin_chip(chip)
    ref_ctx = reference_context if reference_context is not None else min(contexts)

    raw: list[EfficiencyPoint] = []
    for context in contexts:
        try:
            cap_row = evaluate_point(m, c, tp, context, batch="max",
                                     batch_cap=batch_cap, **kwargs)
        except LlmLimitsError:
            continue
        if not cap_row.ok:
            continue
        b_max = cap_row.batch
        batches = sorted({1, 2, 4, 8, 16, 32, 64, b_max})
        for b in batches:
            if b > b_max:
                continue
            row = evaluate_point(m, c, tp, context, batch=b, **kwargs)
            if not row.ok:
                continue
            raw.append(EfficiencyPoint(
                context=context, batch=b,
                utps=row.report.utps, stps=row.report.stps,
                power_w=row.power_w, stps_per_w=row.stps_per_w,
                normalized=0.0,
            ))
    ref = max((pt.stps_per_w for pt in raw if pt.context == ref_ctx), default=None)
    if ref is None:
        raise InfeasibleError(f"reference context {ref_ctx} produced no feasible points")
    return [replace(pt, normalized=pt.stps_per_w / ref) for pt in raw]

"""FastAPI service wrapping the analytical model.

Endpoints mirror the CLI: point evaluation, capacity/intensity grids,
imbalance sampling, sweeps, and the builtin report tables. Domain errors
map to 400 (bad input), infeasible deployments to 422 with the violated
constraint in the body.
"""

from __future__ import annotations

from dataclasses import replace

from fastapi import FastAPI, HTTPException, Query

from .. import tables
from ..errors import ConfigError, ConstraintError, DomainError, InfeasibleError, UnknownNameError
from ..explorer import SweepSpec, evaluate_point, imbalance_for, run_sweep
from ..machine import builtin_chip, builtin_chip_names
from ..models import builtin_model, builtin_model_names
from ..moe import estimate_imbalance
from ..perf import MappingFlags
from ..power import PowerModel
from ..workload import DeploymentPoint, arithmetic_intensity, capacity_gib
from .schemas import (
    CapacityCell,
    CapacityRequest,
    CapacityResponse,
    ChipSchema,
    ConfigFileSchema,
    EvaluateRequest,
    EvaluateResponse,
    ImbalanceRequest,
    ImbalanceResponse,
    LatencyBreakdownSchema,
    ModelSchema,
    SweepRequest,
    SweepResponse,
    SweepRowSchema,
    TableResponse,
    ThroughputSchema,
    ValidateResponse,
)


def _registry(config: ConfigFileSchema | None):
    models = {m.name: m.to_domain() for m in config.models} if config else {}
    chips = {c.name: c.to_domain() for c in config.chips} if config else {}
    power = ({name: PowerModel(**p.model_dump()) for name, p in config.power.items()}
             if config else {})
    return models, chips, power


def _resolve(name: str, extras: dict, builtin, kind: str):
    if name in extras:
        return extras[name]
    try:
        return builtin(name)
    except UnknownNameError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(title="llmlimits", version="0.1.0",
                  description="Analytical performance limits of LLM decoding")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/models")
    def list_models() -> list[ModelSchema]:
        return [ModelSchema.from_domain(builtin_model(n)) for n in builtin_model_names()]

    @app.get("/chips")
    def list_chips() -> list[ChipSchema]:
        return [ChipSchema.from_domain(builtin_chip(n)) for n in builtin_chip_names()]

    @app.post("/throughput", response_model=EvaluateResponse)
    def throughput(req: EvaluateRequest):
        models, chips, power = _registry(req.config)
        m = _resolve(req.model, models, builtin_model, "model")
        chip = _resolve(req.chip, chips, builtin_chip, "chip")
        if req.bw_tbs is not None:
            chip = replace(chip, mem_bw_tbs=req.bw_tbs)
        row = evaluate_point(
            m, chip, req.tp, req.context, batch=req.batch, pp=req.pp,
            tp_sync_s=req.tp_sync_s,
            flags=MappingFlags(attention_single_device=req.attention_single_device),
            batch_cap=req.batch_cap, other_exposed_s=req.other_exposed_s,
            power_model=power.get(req.chip),
            mi_trials=req.mi_trials, mi_seed=req.mi_seed,
        )
        if not row.ok:
            raise HTTPException(status_code=422, detail=row.infeasible)
        b = row.breakdown
        return EvaluateResponse(
            model=row.model, chip=row.chip, tp=row.tp, pp=row.pp,
            batch=row.batch, context=row.context,
            breakdown=LatencyBreakdownSchema(
                t_compute=b.t_compute, t_mem=b.t_mem,
                t_exposed_sync=b.t_exposed_sync, t_exposed_pp=b.t_exposed_pp,
                t_exposed_moe_balance=b.t_exposed_moe_balance,
                t_exposed_moe_routing=b.t_exposed_moe_routing,
                t_exposed_other=b.t_exposed_other,
                t_exposed=b.t_exposed, t_batch=b.t_batch,
            ),
            throughput=ThroughputSchema(
                utps=row.report.utps, stps=row.report.stps,
                batch=row.report.batch, pp=row.report.pp,
                bottleneck=row.report.bottleneck,
                tensor_utilization=row.report.tensor_utilization,
                mem_bw_utilization=row.report.mem_bw_utilization,
            ),
            capacity_gib=row.capacity_gib, power_w=row.power_w,
            stps_per_w=row.stps_per_w,
        )

    @app.post("/capacity", response_model=CapacityResponse)
    def capacity(req: CapacityRequest):
        models, _, _ = _registry(req.config)
        m = _resolve(req.model, models, builtin_model, "model")
        cells = []
        for b in req.batches:
            mi = imbalance_for(m, b, req.mi_trials, req.mi_seed)
            for t in req.contexts:
                p = DeploymentPoint(b, t)
                exact = capacity_gib(m, p)
                cells.append(CapacityCell(
                    model=m.name, batch=b, context=t,
                    capacity_gib=tables.round_gib(exact),
                    capacity_gib_exact=exact,
                    ami=arithmetic_intensity(m, p, mi),
                ))
        return CapacityResponse(cells=cells)

    @app.post("/imbalance", response_model=ImbalanceResponse)
    def imbalance(req: ImbalanceRequest):
        try:
            est = estimate_imbalance(req.routed_experts, req.active_experts,
                                     req.tokens, req.trials, req.seed)
        except DomainError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return ImbalanceResponse(mi=est.mi, trials=est.trials, seed=est.seed,
                                 tokens=est.tokens)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest):
        models, chips, power = _registry(req.config)
        s = req.spec
        try:
            spec = SweepSpec(
                models=tuple(s.models), chips=tuple(s.chips),
                tps=tuple(s.tps), contexts=tuple(s.contexts),
                batches=(s.batches if isinstance(s.batches, str)
                         else tuple(s.batches) if s.batches else "one"),
                bw_tbs_values=tuple(s.bw_tbs_values) if s.bw_tbs_values else None,
                tp_sync_s_values=tuple(s.tp_sync_s_values) if s.tp_sync_s_values else None,
                batch_cap=s.batch_cap,
                flags=MappingFlags(attention_single_device=s.attention_single_device),
                mi_trials=s.mi_trials, mi_seed=s.mi_seed,
            )
            result = run_sweep(spec, extra_models=models, extra_chips=chips,
                               power_models=power)
        except (ConstraintError, UnknownNameError, DomainError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        rows = []
        for r in result.rows:
            rows.append(SweepRowSchema(
                model=r.model, chip=r.chip, tp=r.tp, pp=r.pp, batch=r.batch,
                context=r.context, bw_tbs=r.bw_tbs,
                tp_sync_s=None if r.tp_sync_s != r.tp_sync_s else r.tp_sync_s,
                utps=r.report.utps if r.ok else None,
                stps=r.report.stps if r.ok else None,
                t_batch_s=r.breakdown.t_batch if r.ok else None,
                bottleneck=r.report.bottleneck if r.ok else None,
                capacity_gib=r.capacity_gib, power_w=r.power_w,
                stps_per_w=r.stps_per_w, infeasible=r.infeasible,
            ))
        return SweepResponse(rows=rows)

    def _build_table(which: str, mi_trials: int,
                     config: ConfigFileSchema | None) -> TableResponse:
        # a chip definition named "cent" fills the otherwise-dashed PIM rows
        _, chips, _ = _registry(config)
        pim_chip = chips.get("cent")
        try:
            if which.lower() == "t6":
                headers, rows = tables.t6_rows(mi_trials=mi_trials)
            elif which.lower() == "t3":
                headers, rows = tables.t3_rows(pim_chip=pim_chip)
            elif which.lower() == "t4":
                headers, rows = tables.t4_rows(pim_chip=pim_chip)
            elif which.lower() == "t2":
                headers, rows = tables.t2_rows()
            else:
                raise HTTPException(status_code=400,
                                    detail=f"unknown table {which!r}; choose t2, t3, t4, or t6")
        except InfeasibleError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return TableResponse(which=which.lower(), headers=headers, rows=rows)

    @app.get("/tables/{which}", response_model=TableResponse)
    def table(which: str, mi_trials: int = Query(default=10_000, ge=1)):
        return _build_table(which, mi_trials, None)

    @app.post("/tables/{which}", response_model=TableResponse)
    def table_with_config(which: str, config: ConfigFileSchema | None = None,
                          mi_trials: int = Query(default=10_000, ge=1)):
        return _build_table(which, mi_trials, config)

    @app.post("/validate-config", response_model=ValidateResponse)
    def validate_config(config: ConfigFileSchema):
        from ..configio import parse_config

        try:
            loaded = parse_config(config.model_dump())
        except ConfigError as exc:
            return ValidateResponse(valid=False, models=[], chips=[], sweeps=0,
                                    error=str(exc))
        return ValidateResponse(
            valid=True,
            models=sorted(loaded.models),
            chips=sorted(loaded.chips),
            sweeps=len(loaded.sweeps),
        )

    return app


app = create_app()

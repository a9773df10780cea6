"""Command-line front end.

A thin client over the HTTP service: by default it mounts the FastAPI app
in-process (no server needed); pass --server-url to talk to a remote
deployment instead. Subcommands: capacity, throughput, tables, sweep,
validate.

Exit codes: 0 success, 2 config/usage error, 3 only-infeasible results,
1 internal error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from .configio import ENV_CONFIG, default_config_path, load_config
from .errors import ConfigError, LlmLimitsError
from .render import RenderTarget, render_table
from .service.app import app as service_app


class _InProcessTransport(httpx.BaseTransport):
    """Synchronous bridge onto the ASGI app, so the CLI stays a plain HTTP
    client whether it talks in-process or to a remote server."""

    def __init__(self, app):
        self._app = app

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def run():
            transport = httpx.ASGITransport(app=self._app)
            try:
                response = await transport.handle_async_request(request)
                body = await response.aread()
                return response.status_code, response.headers, body
            finally:
                await transport.aclose()

        status, headers, body = asyncio.run(run())
        return httpx.Response(status_code=status, headers=headers, content=body,
                              request=request)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def parse_context(text: str) -> int:
    """Accept raw token counts or K-suffixed shorthand (4K = 4096)."""
    t = text.strip().upper()
    if t.endswith("K"):
        return int(float(t[:-1]) * 1024)
    return int(t)


def _client(args) -> httpx.Client:
    if getattr(args, "server_url", None):
        return httpx.Client(base_url=args.server_url, timeout=300.0)
    return httpx.Client(transport=_InProcessTransport(service_app),
                        base_url="http://service", timeout=300.0)


def _config_payload(args) -> dict | None:
    path = getattr(args, "config", None) or default_config_path()
    if not path:
        return None
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    data = json.loads(p.read_text())
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be a JSON object")
    return data


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _target(args) -> RenderTarget:
    return RenderTarget(format=args.format, precision=args.precision,
                        k_notation=getattr(args, "k_notation", False))


def cmd_capacity(args) -> int:
    payload = {
        "model": args.model,
        "batches": [int(b) for b in args.batch.split(",")],
        "contexts": [parse_context(c) for c in args.context.split(",")],
        "mi_trials": args.trials,
        "mi_seed": args.seed,
        "config": _config_payload(args),
    }
    with _client(args) as client:
        resp = client.post("/capacity", json=payload)
    if resp.status_code != 200:
        print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
        return EXIT_CONFIG
    cells = resp.json()["cells"]
    headers = ["model", "batch", "context", "capacity_gib", "ami"]
    rows = [[c["model"], c["batch"], f"{c['context'] // 1024}K",
             c["capacity_gib"], round(c["ami"], 2)] for c in cells]
    _emit(render_table(headers, rows, _target(args)), args.out)
    return EXIT_OK


def cmd_throughput(args) -> int:
    payload = {
        "model": args.model,
        "chip": args.chip,
        "tp": args.tp,
        "pp": args.pp,
        "batch": "max" if args.batch == "max" else int(args.batch),
        "context": parse_context(args.context),
        "tp_sync_s": args.sync_ns * 1e-9 if args.sync_ns is not None else None,
        "bw_tbs": args.bw_tbs,
        "attention_single_device": args.attention_single_device,
        "mi_trials": args.trials,
        "mi_seed": args.seed,
        "config": _config_payload(args),
    }
    with _client(args) as client:
        resp = client.post("/throughput", json=payload)
    if resp.status_code == 422:
        print(f"infeasible: {resp.json()['detail']}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if resp.status_code != 200:
        print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
        return EXIT_CONFIG
    data = resp.json()
    b, t = data["breakdown"], data["throughput"]
    headers = ["metric", "value"]
    rows = [
        ["model", data["model"]],
        ["system", f"{data['chip']} tp={data['tp']} pp={data['pp']}"],
        ["batch", data["batch"]],
        ["context", data["context"]],
        ["t_compute_s", b["t_compute"]],
        ["t_mem_s", b["t_mem"]],
        ["t_exposed_sync_s", b["t_exposed_sync"]],
        ["t_exposed_pp_s", b["t_exposed_pp"]],
        ["t_exposed_moe_balance_s", b["t_exposed_moe_balance"]],
        ["t_exposed_moe_routing_s", b["t_exposed_moe_routing"]],
        ["t_exposed_other_s", b["t_exposed_other"]],
        ["t_batch_s", b["t_batch"]],
        ["utps", t["utps"]],
        ["stps", t["stps"]],
        ["bottleneck", t["bottleneck"]],
        ["tensor_utilization", t["tensor_utilization"]],
        ["mem_bw_utilization", t["mem_bw_utilization"]],
        ["capacity_gib", data["capacity_gib"]],
        ["power_w", data["power_w"]],
        ["stps_per_w", data["stps_per_w"]],
    ]
    _emit(render_table(headers, rows, _target(args)), args.out)
    return EXIT_OK


def cmd_tables(args) -> int:
    with _client(args) as client:
        resp = client.get(f"/tables/{args.which}", params={"mi_trials": args.trials})
    if resp.status_code != 200:
        print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
        return EXIT_CONFIG
    data = resp.json()
    target = _target(args)
    _emit(render_table(data["headers"], data["rows"], target), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec_doc = json.loads(Path(args.spec).read_text())
    payload = {"spec": spec_doc, "config": _config_payload(args)}
    with _client(args) as client:
        resp = client.post("/sweep", json=payload)
    if resp.status_code != 200:
        print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
        return EXIT_CONFIG
    rows = resp.json()["rows"]
    headers = ["model", "chip", "tp", "pp", "batch", "context", "bw_tbs", "tp_sync_s",
               "utps", "stps", "t_batch_s", "bottleneck", "capacity_gib",
               "power_w", "stps_per_w", "infeasible"]
    body = [[r[h] for h in headers] for r in rows]
    if args.normalize and rows:
        ref = next((r["utps"] for r in rows if r["utps"] is not None), None)
        if ref:
            idx = headers.index("utps")
            for r, row in zip(rows, body):
                row[idx] = r["utps"] / ref if r["utps"] is not None else None
    _emit(render_table(headers, body, _target(args)), args.out)
    if rows and all(r["infeasible"] for r in rows):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        path = args.config or default_config_path()
        if not path:
            print(f"error: no config given (use --config or ${ENV_CONFIG})", file=sys.stderr)
            return EXIT_CONFIG
        cfg = load_config(path)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"ok: {len(cfg.models)} model(s), {len(cfg.chips)} chip(s), "
          f"{len(cfg.power)} power override(s), {len(cfg.sweeps)} sweep(s)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llmlimits",
        description="Analytical performance limits of LLM auto-regressive decoding",
    )
    parser.add_argument("--server-url", default=None,
                        help="talk to a running service instead of in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_model=True):
        if with_model:
            p.add_argument("--model", required=True)
        p.add_argument("--format", default="markdown", choices=["markdown", "csv", "json"])
        p.add_argument("--out", default=None, help="write to file instead of stdout")
        p.add_argument("--precision", type=int, default=3)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=10_000,
                       help="imbalance sampling trials")
        p.add_argument("--config", default=None,
                       help=f"JSON config path (default: ${ENV_CONFIG})")

    p_cap = sub.add_parser("capacity", help="capacity and arithmetic-intensity grid")
    common(p_cap)
    p_cap.add_argument("--batch", default="1,32", help="comma-separated batch sizes")
    p_cap.add_argument("--context", default="1K,2K,4K,8K,16K,32K,64K,128K",
                       help="comma-separated contexts (K suffix = x1024)")
    p_cap.set_defaults(func=cmd_capacity)

    p_thr = sub.add_parser("throughput", help="latency breakdown for one deployment")
    common(p_thr)
    p_thr.add_argument("--chip", default="xpu-hbm3")
    p_thr.add_argument("--tp", type=int, default=8)
    p_thr.add_argument("--pp", type=int, default=None)
    p_thr.add_argument("--batch", default="1", help="batch size or 'max'")
    p_thr.add_argument("--context", default="4K")
    p_thr.add_argument("--sync-ns", type=float, default=None,
                       help="override collective sync latency (ns)")
    p_thr.add_argument("--bw-tbs", type=float, default=None,
                       help="override per-chip memory bandwidth (TB/s)")
    p_thr.add_argument("--attention-single-device", action="store_true")
    p_thr.set_defaults(func=cmd_throughput)

    p_tab = sub.add_parser("tables", help="regenerate a builtin report table")
    common(p_tab, with_model=False)
    p_tab.add_argument("--which", required=True, choices=["t2", "t3", "t4", "t6"])
    p_tab.add_argument("--k-notation", action="store_true", default=True)
    p_tab.set_defaults(func=cmd_tables)

    p_swp = sub.add_parser("sweep", help="run a sweep spec file")
    common(p_swp, with_model=False)
    p_swp.add_argument("--spec", required=True, help="sweep spec JSON file")
    p_swp.add_argument("--normalize", action="store_true",
                       help="normalize utps to the first feasible row")
    p_swp.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("--config", default=None)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LlmLimitsError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line client for the solver service.

Commands run in-process by default; pass --server to send the same request
to a running service instead. Output files land in --out, the BLENDSOLVE_OUT
environment variable, or ./out, in that order.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .blend import DivergedError
from .config import ConfigError
from .service import ops
from .service.schemas import (
    BenchRequest,
    BenchResponse,
    EstimateRequest,
    EstimateResponse,
    RunRequest,
    RunResponse,
    SweepRequest,
    SweepResponse,
)

EXIT_OK = 0
EXIT_FAILED_CRITERIA = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("BLENDSOLVE_OUT") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _read_config(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as err:
        raise SystemExit(_fail(f"cannot read config file {path}: {err.strerror}", EXIT_USAGE))


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _post(server: str, endpoint: str, payload, response_model):
    import httpx

    reply = httpx.post(f"{server.rstrip('/')}{endpoint}", json=payload.model_dump(),
                       timeout=None)
    if reply.status_code != 200:
        try:
            detail = reply.json().get("detail", {})
        except ValueError:
            detail = {}
        kind = detail.get("error", "invalid")
        message = detail.get("message", reply.text)
        if kind == "config":
            line = detail.get("line") or 0
            raise ConfigError(message, line)
        if kind == "diverged":
            err = DivergedError(detail.get("step") or 0)
            raise err
        raise ValueError(message)
    return response_model.model_validate(reply.json())


def _dispatch(args, endpoint: str, payload, response_model, local_fn):
    if args.server:
        return _post(args.server, endpoint, payload, response_model)
    return local_fn(payload)


def _write_files(out_dir: Path, files: dict[str, str]) -> None:
    for name, content in files.items():
        (out_dir / name).write_text(content)
        print(f"wrote {out_dir / name}")


def cmd_run(args) -> int:
    req = RunRequest(config_text=_read_config(args.config), threads=args.threads)
    resp = _dispatch(args, "/run", req, RunResponse, ops.execute_run)
    _write_files(_out_dir(args), resp.files)
    s = resp.summary
    print(f"steps = {s.steps}, final time = {s.final_time:g}")
    print(f"mass drift: W {s.mass_w_drift:.3e}, V {s.mass_v_drift:.3e}")
    if s.stability_warning:
        print("warning: CFL limit exceeded during the run")
    if s.e1_w is not None:
        print(f"E1_W = {s.e1_w:.6g}")
        print(f"E1_V = {s.e1_v:.6g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    req = SweepRequest(config_text=_read_config(args.config), threads=args.threads)
    resp = _dispatch(args, "/sweep", req, SweepResponse, ops.execute_sweep)
    _write_files(_out_dir(args), resp.files)
    print(f"swept {resp.n_points} couples; E1_ref = {resp.e1_ref:.6g}")
    print(f"argmin E1_W = {resp.min_e1_w:.6g} at "
          f"(lambda, mu) = ({resp.argmin_lambda:g}, {resp.argmin_mu:g})")
    return EXIT_OK


def cmd_estimate(args) -> int:
    req = EstimateRequest(config_text=_read_config(args.config), threads=args.threads)
    resp = _dispatch(args, "/estimate", req, EstimateResponse, ops.execute_estimate)
    _write_files(_out_dir(args), resp.files)
    print(f"estimated (lambda_R, mu_R) = ({resp.lambda_r:g}, {resp.mu_r:g})")
    print(f"indicator_W = {resp.indicator_w:.6g}, indicator_V = {resp.indicator_v:.6g}")
    return EXIT_OK


def cmd_bench(args) -> int:
    req = BenchRequest(test_id=args.test, threads=args.threads)
    resp = _dispatch(args, "/bench", req, BenchResponse, ops.execute_bench)
    _write_files(_out_dir(args), resp.files)
    for line in resp.lines:
        print(line)
    if resp.all_passed:
        print("all criteria passed")
        return EXIT_OK
    failed = [r.test_id for r in resp.reports if not r.passed]
    print(f"FAILED: {', '.join(failed)}")
    return EXIT_FAILED_CRITERIA


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("blendsolve.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blendsolve",
                                     description="Blended-scheme solver and benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="INI run configuration")
        p.add_argument("--out", default=None, help="output directory (default $BLENDSOLVE_OUT or ./out)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps/estimates")
        p.add_argument("--server", default=None, help="base URL of a running service")

    p_run = sub.add_parser("run", help="one simulation; writes series/fields CSVs")
    common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="coupling-parameter lattice sweep")
    common(p_sweep)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_est = sub.add_parser("estimate", help="coarse-grid coupling estimation")
    common(p_est)
    p_est.set_defaults(fn=cmd_estimate)

    p_bench = sub.add_parser("bench", help="benchmark reports against published values")
    p_bench.add_argument("test", help="test id (1, 2, 3, 4, example1, ...) or 'all'")
    common(p_bench, needs_config=False)
    p_bench.set_defaults(fn=cmd_bench)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as err:
        return _fail(f"config error (line {err.line}): {err.message}", EXIT_USAGE)
    except DivergedError as err:
        return _fail(str(err), EXIT_DIVERGED)
    except ValueError as err:
        return _fail(str(err), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())

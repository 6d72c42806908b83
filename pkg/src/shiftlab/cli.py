"""Thin command-line client for the service handlers.

Every subcommand builds a request model, obtains a response either by
calling the handler in process (default) or by POSTing to a running server
(``--server``), then writes the returned artifacts under ``--out``. No
computation happens here.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ShiftLabError
from .experiments import ExperimentConfig
from .service import handlers
from .service import schemas as sc

_HANDLERS = {
    "/generate": (handlers.handle_generate, sc.GenerateRequest, sc.GenerateResponse),
    "/risk-sweep": (handlers.handle_sweep, sc.SweepRequest, sc.SweepResponse),
    "/mc-check": (handlers.handle_mc_check, sc.McCheckRequest, sc.McCheckResponse),
    "/train": (handlers.handle_train, sc.TrainRequest, sc.TrainResponse),
    "/experiment": (handlers.handle_experiment, sc.ExperimentRequest, sc.ExperimentResponse),
    "/grid-select": (
        handlers.handle_grid_select,
        sc.GridSelectRequest,
        sc.GridSelectResponse,
    ),
    "/demo-fig3": (handlers.handle_fig3, sc.Fig3Request, sc.Fig3Response),
}


def _dispatch(server: str | None, path: str, request):
    handler, _, response_model = _HANDLERS[path]
    if server is None:
        return handler(request)
    import httpx

    resp = httpx.post(server.rstrip("/") + path, json=request.model_dump(), timeout=600.0)
    resp.raise_for_status()
    return response_model(**resp.json())


def _fetch_defaults(server: str | None) -> sc.DefaultsResponse:
    if server is None:
        return handlers.handle_defaults()
    import httpx

    resp = httpx.get(server.rstrip("/") + "/defaults", timeout=60.0)
    resp.raise_for_status()
    return sc.DefaultsResponse(**resp.json())


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text, newline="\n")
    return path


def _write_json(out_dir: Path, name: str, payload: dict) -> Path:
    return _write(out_dir, name, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _load_config(args) -> ExperimentConfig:
    if args.config:
        return ExperimentConfig.from_ini(Path(args.config).read_text())
    return ExperimentConfig()


def _spec_model(cfg: ExperimentConfig) -> sc.DomainSpecModel:
    return sc.DomainSpecModel.from_spec(cfg.spec)


def _mixing_model(cfg: ExperimentConfig) -> sc.MixingModel:
    return sc.MixingModel(kind=cfg.mixing_kind, seed=cfg.mixing_seed)


def cmd_generate(args) -> int:
    cfg = _load_config(args)
    req = sc.GenerateRequest(
        spec=_spec_model(cfg),
        mixing=_mixing_model(cfg),
        n=args.n,
        seed=args.seed if args.seed is not None else cfg.master_seed,
        include_latents=not args.no_latents,
    )
    resp = _dispatch(args.server, "/generate", req)
    out = Path(args.out)
    csv_path = _write(out, "dataset.csv", resp.csv)
    _write(out, "spec.ini", resp.spec_config)
    print(f"wrote {resp.n} samples of dimension {resp.dim} to {csv_path}")
    return 0


def cmd_risk_sweep(args) -> int:
    cfg = _load_config(args)
    req = sc.SweepRequest(
        spec=_spec_model(cfg),
        mixing=_mixing_model(cfg),
        w_d=list(cfg.w_d_grid),
        w_s=list(cfg.w_s_grid),
        gammas=list(cfg.gammas),
        mc_samples=args.mc_samples if args.mc_samples is not None else 0,
        seed=args.seed if args.seed is not None else cfg.master_seed,
    )
    resp = _dispatch(args.server, "/risk-sweep", req)
    path = _write(Path(args.out), "sweep.csv", resp.csv)
    print(f"wrote {len(resp.rows)} sweep rows to {path}")
    return 0


def cmd_mc_check(args) -> int:
    req = sc.McCheckRequest(
        points=args.points, samples=args.samples, seed=args.seed if args.seed is not None else 0
    )
    resp = _dispatch(args.server, "/mc-check", req)
    path = _write(Path(args.out), "mc_check.csv", resp.csv)
    print(
        f"{resp.n_within_4_sigma}/{resp.points} points within 4 sigma "
        f"({'ok' if resp.ok else 'FAILED'}); rows at {path}"
    )
    return 0 if resp.ok else 1


def cmd_train(args) -> int:
    cfg = _load_config(args)
    template = cfg.train_grid[0]
    req = sc.TrainRequest(
        spec=_spec_model(cfg),
        mixing=_mixing_model(cfg),
        n=cfg.n_train,
        seed=args.seed if args.seed is not None else cfg.master_seed,
        pretrain=args.pretrain,
        schedule=args.schedule if args.schedule != "lp_ft_swad" else "lp_ft",
        train=sc.TrainConfigModel(
            lr_lp=template.lr_lp,
            lr_ft=template.lr_ft,
            lp_iters=template.lp_iters,
            ft_iters=template.ft_iters,
            val_fraction=template.val_fraction,
            minibatch=template.minibatch,
        ),
        swad=(
            sc.SwadConfigModel(
                r=cfg.swad.r, eval_interval=cfg.swad.eval_interval, n_s=cfg.swad.n_s
            )
            if args.schedule == "lp_ft_swad"
            else None
        ),
        eval_gammas=list(cfg.gammas),
    )
    resp = _dispatch(args.server, "/train", req)
    out = Path(args.out)
    _write(out, "trace.csv", resp.trace_csv)
    _write(out, "model.ckpt", resp.checkpoint)
    _write_json(
        out,
        "metrics.json",
        {
            "train_risk": resp.train_risk,
            "test_risks": resp.test_risks,
            "val_risk": resp.val_risk,
            "feature_distortion": resp.feature_distortion,
            "effective_rule": resp.effective_rule.model_dump(),
            "swad_report": resp.swad_report,
        },
    )
    print(f"train risk {resp.train_risk:.6f}; artifacts in {out}")
    return 0


def cmd_experiment(args) -> int:
    cfg = _load_config(args)
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.jobs is not None:
        cfg.jobs = args.jobs
    req = sc.ExperimentRequest(config_ini=cfg.to_ini())
    resp = _dispatch(args.server, "/experiment", req)
    out = Path(args.out)
    _write(out, "results.csv", resp.results_csv)
    _write_json(out, "run.json", resp.run_meta)
    _write_json(out, "timing.json", resp.timing)
    print(f"{resp.run_meta['total_rows']} result rows in {out / 'results.csv'}")
    return 0


def cmd_grid_select(args) -> int:
    req = sc.GridSelectRequest(
        results_csv=Path(args.results).read_text(), criterion=args.criterion
    )
    resp = _dispatch(args.server, "/grid-select", req)
    print(f"best config id: {resp.config_id} (criterion {resp.criterion})")
    return 0


def cmd_demo_fig3(args) -> int:
    req = sc.Fig3Request(
        n=args.n, gamma=args.gamma, seed=args.seed if args.seed is not None else 2024
    )
    resp = _dispatch(args.server, "/demo-fig3", req)
    out = Path(args.out)
    _write(out, "fig3_train_points.csv", resp.train_points_csv)
    _write(out, "fig3_test_points.csv", resp.test_points_csv)
    _write(out, "fig3_lines.csv", resp.lines_csv)
    _write_json(out, "fig3_meta.json", resp.meta)
    print(f"two-feature demo artifacts in {out}")
    return 0


def cmd_defaults(args) -> int:
    resp = _fetch_defaults(args.server)
    if args.out != ".":
        path = _write(Path(args.out), "defaults.ini", resp.config_ini)
        print(f"wrote defaults to {path}")
    else:
        print(resp.config_ini, end="")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("shiftlab.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftlab", description="Silent-feature shift risk laboratory client."
    )
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; omit to run in process")
    parser.add_argument("--out", default=".", help="output directory for artifacts")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--jobs", type=int, default=None, help="worker threads for grids")
    # The same flags are accepted after the subcommand; SUPPRESS defaults keep
    # the per-subcommand copies from clobbering values given up front.
    common = argparse.ArgumentParser(add_help=False)
    for flag, kwargs in (
        ("--server", {}),
        ("--out", {}),
        ("--seed", {"type": int}),
        ("--jobs", {"type": int}),
    ):
        common.add_argument(flag, default=argparse.SUPPRESS, **kwargs)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="sample a labeled dataset to CSV")
    p.add_argument("--config", default=None, help="experiment INI with the domain section")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--no-latents", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("risk-sweep", parents=[common], help="closed-form risks over the suppression grid")
    p.add_argument("--config", default=None)
    p.add_argument("--mc-samples", type=int, default=None, help="add Monte-Carlo rows")
    p.set_defaults(func=cmd_risk_sweep)

    p = sub.add_parser("mc-check", parents=[common], help="random-grid Monte-Carlo vs closed-form check")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.set_defaults(func=cmd_mc_check)

    p = sub.add_parser("train", parents=[common], help="train one model and emit trace/checkpoint/metrics")
    p.add_argument("--config", default=None)
    p.add_argument("--schedule", default="lp_ft",
                   choices=["erm", "lp_only", "lp_ft", "lp_ft_swad"])
    p.add_argument("--pretrain", default="oracle_silent",
                   choices=["oracle_silent", "oracle_dominant", "noisy_oracle"])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("experiment", parents=[common], help="full multi-arm, multi-seed training experiment")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("grid-select", parents=[common], help="pick the best config id from results.csv")
    p.add_argument("results", help="path to a training results CSV")
    p.add_argument("--criterion", default="train_val", choices=["train_val", "test_val"])
    p.set_defaults(func=cmd_grid_select)

    p = sub.add_parser("demo-fig3", parents=[common], help="emit the 2-d texture/shape demo data")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--gamma", type=float, default=4.0)
    p.set_defaults(func=cmd_demo_fig3)

    p = sub.add_parser("defaults", parents=[common], help="print or write the default experiment INI")
    p.set_defaults(func=cmd_defaults)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ShiftLabError as exc:
        print(
            json.dumps({"errors": [{"type": type(exc).__name__, "detail": str(exc)}]}),
            file=sys.stderr,
        )
        return 2
    except FileNotFoundError as exc:
        print(json.dumps({"errors": [{"type": "FileNotFoundError", "detail": str(exc)}]}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

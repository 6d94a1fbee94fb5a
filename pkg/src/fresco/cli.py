"""Command-line entry point: gen, train, run, sweep, audit."""
from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
from pathlib import Path

from . import risk as risk_mod
from .audit import run_audit
from .config import SCALES, ConfigError, dump_config, load_config
from .engine import POLICIES, run_episode
from .metrics import CSV_HEADER, MetricsRow, metrics_csv, summary_csv
from .model import generate_scenario, world_hash, world_snapshot

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_AUDIT = 3


def _parse_seeds(text: str) -> list[int]:
    """'0:8' -> range, '1,2,5' -> list, '7' -> [7]."""
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi)))
    return [int(p) for p in text.split(",") if p.strip()]


def _out_dir(args, manifest: dict) -> Path:
    base = Path(os.environ.get("FRESCO_OUT", args.out))
    digest = hashlib.sha256(
        json.dumps(manifest, sort_keys=True).encode()).hexdigest()[:16]
    out = base / digest
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return out


def _manifest(cfg, **extra) -> dict:
    m = {"config": dump_config(cfg)}
    m.update(extra)
    return m


def _write_trace(path: Path, trace) -> None:
    with open(path, "w") as fh:
        for ev in trace:
            fh.write(json.dumps(ev.to_dict(), sort_keys=True, separators=(",", ":")) + "\n")


def cmd_gen(args) -> int:
    cfg = load_config(args.config).with_scale(args.scale) if args.scale else load_config(args.config)
    out = _out_dir(args, _manifest(cfg, command="gen", seed=args.seed))
    world = generate_scenario(cfg, args.seed)
    snap = world_snapshot(world)
    (out / f"scenario_seed{args.seed}.json").write_text(snap + "\n")
    print(f"wrote {out}/scenario_seed{args.seed}.json ({len(world.missions)} missions, "
          f"hash {world_hash(world)[:12]})")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    if args.scale:
        cfg = cfg.with_scale(args.scale)
    seeds = _parse_seeds(args.seeds)
    if not seeds:
        raise ConfigError("empty seed list")
    out = _out_dir(args, _manifest(cfg, command="train", seeds=seeds))
    x, y = risk_mod.generate_labels(cfg, seeds)
    if x.shape[0] == 0:
        raise RuntimeError("label generation produced no samples")
    params, trace = risk_mod.lstm_train(
        (x, y), epochs=cfg.lstm_epochs, lr=cfg.lstm_lr, batch=cfg.lstm_batch,
        hidden=cfg.lstm_hidden, init_scale=cfg.lstm_init_scale, seed=seeds[0])
    params_dir = out / "params"
    params_dir.mkdir(exist_ok=True)
    risk_mod.save_params(params, params_dir / "predictor.txt")
    loss_lines = ["epoch,loss"] + [f"{i},{v:.6g}" for i, v in enumerate(trace)]
    (params_dir / "loss.csv").write_text("\n".join(loss_lines) + "\n")
    pos = float((y > 0.5).sum())
    print(f"trained on {x.shape[0]} samples ({pos:.0f} positive); "
          f"final loss {trace[-1]:.4g}; params at {params_dir / 'predictor.txt'}")
    return EXIT_OK


def _run_one(cfg, policy: str, scale: str, seed: int, params_path: str | None):
    params = risk_mod.load_params(params_path) if params_path else None
    result = run_episode(cfg.with_scale(scale), seed, policy, params)
    from .metrics import compute_metrics
    return result, compute_metrics(result, policy, scale, seed)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.policy == "fresco" and not args.params:
        raise ConfigError("policy 'fresco' requires --params")
    out = _out_dir(args, _manifest(
        cfg, command="run", policy=args.policy, scale=args.scale, seed=args.seed,
        params=_file_hash(args.params)))
    result, row = _run_one(cfg, args.policy, args.scale, args.seed, args.params)
    traces = out / "traces"
    traces.mkdir(exist_ok=True)
    _write_trace(traces / f"{args.policy}_{args.scale}_{args.seed}.jsonl", result.trace)
    metrics_path = out / "metrics.csv"
    if not metrics_path.exists():
        metrics_path.write_text(CSV_HEADER + "\n")
    with open(metrics_path, "a") as fh:
        fh.write(row.to_csv() + "\n")
    print(row.to_csv())
    return EXIT_OK


def _file_hash(path: str | None) -> str | None:
    if not path:
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _sweep_worker(task):
    config_text, policy, scale, seed, params_path = task
    import tempfile
    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(config_text)
        cfg_path = fh.name
    try:
        cfg = load_config(cfg_path)
        result, row = _run_one(cfg, policy, scale, seed, params_path)
        return policy, scale, seed, row, [ev.to_dict() for ev in result.trace]
    finally:
        os.unlink(cfg_path)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    policies = [p for p in args.policies.split(",") if p]
    scales = [s for s in args.scales.split(",") if s]
    for p in policies:
        if p not in POLICIES:
            raise ConfigError(f"unknown policy {p!r}")
    for s in scales:
        if s not in SCALES:
            raise ConfigError(f"unknown scale {s!r}")
    seeds = _parse_seeds(args.seeds)
    if "fresco" in policies and not args.params:
        raise ConfigError("sweeping the fresco policy requires --params")
    out = _out_dir(args, _manifest(
        cfg, command="sweep", policies=policies, scales=scales, seeds=seeds,
        params=_file_hash(args.params)))
    runs_dir = out / "runs"
    runs_dir.mkdir(exist_ok=True)
    traces_dir = out / "traces"
    traces_dir.mkdir(exist_ok=True)

    config_text = dump_config(cfg)
    tasks = []
    for policy in policies:
        for scale in scales:
            for seed in seeds:
                row_path = runs_dir / f"{policy}_{scale}_{seed}.csv"
                if args.resume and row_path.exists():
                    continue
                tasks.append((config_text, policy, scale, seed, args.params))

    failures = 0
    def handle(outcome):
        nonlocal failures
        policy, scale, seed, row, trace_dicts = outcome
        (runs_dir / f"{policy}_{scale}_{seed}.csv").write_text(row.to_csv() + "\n")
        with open(traces_dir / f"{policy}_{scale}_{seed}.jsonl", "w") as fh:
            for d in trace_dicts:
                fh.write(json.dumps(d, sort_keys=True, separators=(",", ":")) + "\n")

    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [pool.submit(_sweep_worker, t) for t in tasks]
            for fut in concurrent.futures.as_completed(futures):
                try:
                    handle(fut.result())
                except Exception as exc:  # run-level failure: log and continue
                    failures += 1
                    print(f"run failed: {exc}", file=sys.stderr)
    else:
        for t in tasks:
            try:
                handle(_sweep_worker(t))
            except Exception as exc:
                failures += 1
                print(f"run failed: {exc}", file=sys.stderr)

    rows = []
    for path in sorted(runs_dir.glob("*.csv")):
        policy, scale, seed = path.stem.rsplit("_", 2)
        cells = path.read_text().strip().split(",")
        rows.append(MetricsRow(
            policy=cells[0], scale=cells[1], seed=int(cells[2]),
            scr=float(cells[3]), aid_s=float(cells[4]), tcr=float(cells[5]),
            trr=float(cells[6]), acstr=float(cells[7]), fr=float(cells[8]),
            adt_ms=float(cells[9]), peo_kj=float(cells[10]), asw=float(cells[11])))
    (out / "metrics.csv").write_text(metrics_csv(rows))
    (out / "summary.csv").write_text(summary_csv(rows))
    print(f"{len(rows)} rows -> {out / 'metrics.csv'}")
    if rows:
        from .report import render_all
        for fig_path in render_all(out / "summary.csv", out, fmt=args.figure_format):
            print(f"figure -> {fig_path}")
    if failures:
        print(f"{failures} runs failed", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_report(args) -> int:
    from .report import render_all

    summary = Path(args.summary)
    if summary.is_dir():
        summary = summary / "summary.csv"
    if not summary.exists():
        raise ConfigError(f"no summary file at {summary}")
    out_dir = Path(args.out_dir) if args.out_dir else summary.parent
    for fig_path in render_all(summary, out_dir, fmt=args.format):
        print(f"figure -> {fig_path}")
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg = load_config(args.config)
    pairs, cands = (int(v) for v in args.sizes.split("x"))
    report = run_audit(args.instances, seed=args.seed, cfg=cfg,
                       max_pairs=pairs, max_cands=cands)
    print(f"instances           : {report.instances}")
    print(f"blocking pairs      : {report.blocking_pairs}")
    print(f"IR violations       : {report.ir_violations}")
    print(f"termination breaches: {report.termination_violations}")
    print(f"welfare > optimum   : {report.welfare_violations}")
    print(f"mean welfare ratio  : {report.mean_ratio:.4f} "
          f"(over {len(report.ratios)} instances with positive optimum)")
    return EXIT_OK if report.ok else EXIT_AUDIT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fresco",
        description="Forecasting-driven successor-UAV reservation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--out", default="out", help="output directory root")

    p = sub.add_parser("gen", help="generate and snapshot a scenario")
    common(p)
    p.add_argument("--scale", default=None, choices=sorted(SCALES))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="generate labels and train the risk predictor")
    common(p)
    p.add_argument("--scale", default=None, choices=sorted(SCALES))
    p.add_argument("--seeds", default="0:8", help="shadow-run seeds, e.g. 0:8 or 1,2,3")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", help="run one episode")
    common(p)
    p.add_argument("--policy", required=True, choices=POLICIES)
    p.add_argument("--scale", default="S1", choices=sorted(SCALES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--params", default=None, help="trained predictor params file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run the policy x scale x seed matrix")
    common(p)
    p.add_argument("--policies", default=",".join(POLICIES))
    p.add_argument("--scales", default="S1,S2,S3,S4")
    p.add_argument("--seeds", default="0:50")
    p.add_argument("--params", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--figure-format", default="png", choices=("png", "svg"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="render summary figures from a sweep")
    p.add_argument("summary", help="summary.csv or a sweep output directory")
    p.add_argument("--out-dir", default=None, help="defaults to the summary's directory")
    p.add_argument("--format", default="png", choices=("png", "svg"))
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("audit", help="stability / optimality audit on random instances")
    common(p)
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", default="5x4", help="max pairs x max candidates")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

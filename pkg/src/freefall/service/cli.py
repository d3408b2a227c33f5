"""Command line interface.

Subcommands: run (headless episode), serve (live session), replay (from a
log), calibrate (aero drag trim), imitate (imitation exercise), export
(log -> CSV), bench (kernel backend benchmark). Global flags pick the config
and scenario files, the seed and the sample rate; FREEFALL_BIND and
FREEFALL_DATA_DIR provide environment overrides.
"""

from __future__ import annotations

import json
import os
import pathlib
import sys
import time

import click
import numpy as np
import yaml

from .. import dynamics as dyn
from ..biomech import build_body
from ..config import load_config
from ..kernels import backend_name, get_backend
from ..session import (EpisodeLog, LogCorruptError, Scenario, compute_metrics,
                       export_csv, load_scenario, replay, run_episode,
                       sustained_oscillation)


def _data_dir(override=None) -> pathlib.Path:
    path = pathlib.Path(override or os.environ.get("FREEFALL_DATA_DIR", "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="YAML config merged over the packaged defaults.")
@click.option("--scenario", "scenario_path", type=click.Path(exists=True), default=None,
              help="YAML scenario merged over the packaged default.")
@click.option("--seed", type=int, default=None, help="Episode seed override.")
@click.option("--rate", type=float, default=None, help="Simulation rate override, Hz.")
@click.pass_context
def main(ctx, config_path, scenario_path, seed, rate):
    """Free-fall skydiving simulator with a training control stack."""
    ctx.ensure_object(dict)
    cfg = load_config(config_path)
    if rate is not None:
        raw = dict(cfg.raw)
        raw["controllers"] = dict(raw["controllers"], sample_rate_hz=rate)
        cfg = type(cfg)(raw=raw)
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    ctx.obj["config"] = cfg
    ctx.obj["scenario_path"] = scenario_path
    ctx.obj["overrides"] = overrides


def _scenario(ctx, extra: dict | None = None) -> Scenario:
    overrides = dict(ctx.obj["overrides"])
    if extra:
        overrides.update(extra)
    return load_scenario(ctx.obj["scenario_path"], overrides)


@main.command()
@click.option("--trainee", "trainee_kind", default=None,
              help="Trainee kind override (ideal, frozen, pure_delay, ...).")
@click.option("--delay", type=float, default=None, help="pure_delay seconds shorthand.")
@click.option("--out", "out_dir", default=None, help="Output directory (FREEFALL_DATA_DIR).")
@click.pass_context
def run(ctx, trainee_kind, delay, out_dir):
    """Run one headless episode; writes log.jsonl and metrics.json."""
    extra = {}
    if delay is not None:
        extra["trainee"] = {"kind": "pure_delay", "t_delay_s": delay}
    elif trainee_kind is not None:
        extra["trainee"] = {"kind": trainee_kind}
    scenario = _scenario(ctx, extra)
    t0 = time.time()
    log = run_episode(scenario, ctx.obj["config"])
    wall = time.time() - t0
    metrics = compute_metrics(log)
    out = _data_dir(out_dir)
    log_path = out / f"{scenario.name}.log.jsonl"
    metrics_path = out / f"{scenario.name}.metrics.json"
    log.save(log_path)
    payload = metrics.as_dict()
    payload["sustained_yaw_oscillation"] = sustained_oscillation(log)
    payload["wall_time_s"] = wall
    payload["backend"] = backend_name()
    metrics_path.write_text(json.dumps(payload, indent=2) + "\n")
    click.echo(f"outcome={log.outcome} ticks={len(log)} wall={wall:.1f}s")
    click.echo(f"log: {log_path}")
    click.echo(f"metrics: {metrics_path}")


@main.command()
@click.option("--bind", default=None, help="host:port (FREEFALL_BIND, default 127.0.0.1:8700).")
@click.option("--no-realtime", is_flag=True, help="Run as fast as possible (testing).")
@click.pass_context
def serve(ctx, bind, no_realtime):
    """Host a live session over the wire protocol."""
    from .server import DEFAULT_BIND, serve_blocking

    bind = bind or os.environ.get("FREEFALL_BIND", DEFAULT_BIND)
    scenario = _scenario(ctx)
    click.echo(f"serving {scenario.name} on ws://{bind} (external_input={scenario.external_input})")
    log, metrics, on_time = serve_blocking(scenario, ctx.obj["config"], bind=bind,
                                           realtime=not no_realtime)
    click.echo(f"outcome={log.outcome} on_time_ratio={on_time:.4f}")
    if metrics is not None:
        click.echo(json.dumps(metrics.as_dict(), indent=2))


@main.command("replay")
@click.argument("log_path", type=click.Path(exists=True))
@click.option("--speed", type=float, default=1.0, help="Replay speed factor.")
@click.option("--follow-wall-clock/--no-follow-wall-clock", default=False)
@click.pass_context
def replay_cmd(ctx, log_path, speed, follow_wall_clock):
    """Replay a recorded episode log to stdout (one line per second of sim)."""
    try:
        log = EpisodeLog.load(log_path)
    except LogCorruptError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    pace = time.sleep if follow_wall_clock else None
    count = 0
    for rec in replay(log, speed_factor=speed, pace=pace):
        if count % 240 == 0:
            click.echo(f"t={rec['time']:8.3f} pos=({rec['px']:+8.2f},{rec['py']:+8.2f}) "
                       f"u=({np.degrees(rec['u_arms']):+6.2f},{np.degrees(rec['u_legs']):+6.2f}) deg")
        count += 1
    click.echo(f"replayed {count} ticks, outcome={log.outcome}")


@main.command()
@click.option("--target-speed", type=float, default=dyn.TERMINAL_SPEED_TARGET,
              help="Terminal speed target, m/s.")
@click.option("--out", "patch_path", default=None, help="Where to write the config patch YAML.")
@click.pass_context
def calibrate(ctx, target_speed, patch_path):
    """Scale c_drag_max so neutral-posture terminal speed hits the target."""
    cfg = ctx.obj["config"]
    body = build_body(cfg.anthropometrics())
    neutral = cfg.neutral_posture()
    coeffs, info = dyn.calibrate(body, neutral, cfg.aero_coefficients(),
                                 target_speed=target_speed,
                                 air_density=cfg.air_density())
    _, verify_speed = dyn.settle(body, neutral, coeffs, duration=15.0,
                                 air_density=cfg.air_density())
    error = abs(verify_speed - target_speed) / target_speed
    click.echo(f"c_drag_max: {cfg.aero_coefficients().c_drag_max:.4f} -> {coeffs.c_drag_max:.4f}")
    click.echo(f"terminal speed: {verify_speed:.2f} m/s (target {target_speed}, error {100*error:.2f}%)")
    patch = {"aero": {"c_drag_max": float(coeffs.c_drag_max)}}
    path = pathlib.Path(patch_path or _data_dir() / "calibration-patch.yaml")
    path.write_text(yaml.safe_dump(patch))
    click.echo(f"patch: {path}")
    if error > 0.02:
        sys.exit(1)


@main.command()
@click.option("--out", "out_dir", default=None)
@click.pass_context
def imitate(ctx, out_dir):
    """Run the imitation exercise (slow sine on the turning pattern)."""
    scenario = _scenario(ctx, {"kind": "imitation", "name": "imitation"})
    log = run_episode(scenario, ctx.obj["config"])
    out = _data_dir(out_dir)
    log_path = out / "imitation.log.jsonl"
    log.save(log_path)
    click.echo(f"outcome={log.outcome} ticks={len(log)}")
    click.echo(f"log: {log_path}")


@main.command()
@click.argument("log_path", type=click.Path(exists=True))
@click.option("--csv", "csv_path", required=True, help="CSV output path.")
@click.pass_context
def export(ctx, log_path, csv_path):
    """Export a recorded log to CSV for plotting."""
    try:
        log = EpisodeLog.load(log_path)
    except LogCorruptError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    export_csv(log, csv_path)
    click.echo(f"wrote {csv_path} ({len(log)} rows)")


@main.command()
@click.option("--ticks", type=int, default=2000, help="Dynamics ticks per backend.")
@click.pass_context
def bench(ctx, ticks):
    """Benchmark the compiled kernels against the pure-python fallback."""
    from ..benchmark import run_benchmark

    results = run_benchmark(ctx.obj["config"], ticks=ticks)
    for name, seconds in results.items():
        click.echo(f"{name:8s} {1e6 * seconds / ticks:9.1f} us/tick "
                   f"({ticks / seconds:8.0f} ticks/s)")
    if "native" in results and "python" in results:
        click.echo(f"speedup  {results['python'] / results['native']:9.1f}x")


if __name__ == "__main__":
    main()

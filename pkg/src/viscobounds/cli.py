"""Command-line front end: ``viscobounds {bounds,domain,kernel,invert,correlate}``.

Every command reads a TOML run configuration (schema in ``config.py``) and
writes plain-text results whose first lines are ``#`` provenance comments.
Exit codes: 0 success, 2 configuration error, 3 infeasible, 4 numerical failure.
"""
from __future__ import annotations

import csv
import functools
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import RunConfig, fmt, load_config
from .errors import (ConfigurationError, DegenerateContrastError, DomainError, InfeasibleError,
                     ModelMismatchError, NumericalFailure)
from .geometry import (correlate_support, domain_union_over_orientations, kernel_support,
                       laminate_reference_curve, symmetric_direction_fan)
from .optimizer import (BoundQuery, InconsistentDataError, Scalar12, invert_volume_fraction,
                        sweep_bounds)
from .phases import Side
from .spectral import StepLoading
from .sumrules import Symmetry

EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICAL = 2, 3, 4


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigurationError, DomainError, ModelMismatchError, DegenerateContrastError) as e:
            click.echo(f"configuration error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except InfeasibleError as e:
            click.echo(f"infeasible: {e}", err=True)
            sys.exit(EXIT_INFEASIBLE)
        except NumericalFailure as e:
            click.echo(f"numerical failure: {e}", err=True)
            sys.exit(EXIT_NUMERICAL)
    return wrapper


def _common(fn):
    fn = click.option("--grid-scale", type=float, default=1.0, show_default=True,
                      help="Multiply every discretisation default.")(fn)
    fn = click.option("--threads", type=int, default=1, show_default=True, help="Worker threads.")(fn)
    fn = click.option("--out", "out", type=click.Path(path_type=Path), default=None,
                      help="Output path (defaults to [output].path in the config).")(fn)
    fn = click.option("--config", "config_path", type=click.Path(path_type=Path), required=True,
                      help="TOML run configuration.")(fn)
    return _guard(fn)


def _load(config_path: Path, grid_scale: float) -> RunConfig:
    cfg = load_config(config_path)
    if grid_scale != 1.0:
        from dataclasses import replace
        cfg = replace(cfg, grid=cfg.grid.scaled(grid_scale))
    return cfg


def _out_path(cfg: RunConfig, out, default: str) -> Path:
    if out is not None:
        return Path(out)
    path = cfg.section("output").get("path")
    return cfg.resolve(path) if path else Path(default)


def _norm(cfg: RunConfig, loading: StepLoading | None = None) -> float:
    ld = loading or cfg.loading
    return cfg.pair.response_scale * float(np.linalg.norm(ld.vector))


def _header(cfg: RunConfig, command: str, grid_scale: float, extra=()) -> list[str]:
    side = cfg.pair.side
    what = "stress / (G2 * |strain step|)" if side is Side.STRESS else "strain / (|stress step| / (2 G2))"
    lines = [f"# viscobounds {__version__}", f"# command {command}", f"# config_sha256 {cfg.digest}",
             f"# grid_scale {fmt(grid_scale)}", f"# info {cfg.info.label()}",
             f"# normalization {what}; scale {fmt(_norm(cfg))}"]
    return lines + [f"# {e}" for e in extra]


def _write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _csv(header_lines, columns, rows, footer=()) -> str:
    buf = io.StringIO()
    for h in header_lines:
        buf.write(h + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in r])
    for f in footer:
        buf.write(f + "\n")
    return buf.getvalue()


def _map(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))  # ordered by input
    return [fn(x) for x in items]


@click.group()
@click.version_option(__version__, prog_name="viscobounds")
def main():
    """Bounds on the transient response of two-phase viscoelastic composites."""


@main.command()
@_common
def bounds(config_path, out, threads, grid_scale):
    """Lower and upper bounds on a time grid (CSV)."""
    cfg = _load(config_path, grid_scale)
    times = cfg.times.values()
    query = BoundQuery(cfg.pair, cfg.info, cfg.loading, tuple(times), None, cfg.target, cfg.grid.search)
    series = sweep_bounds(query, threads=max(1, threads))
    norm = _norm(cfg)
    nl = max((r.lower_config.size for r in series.records), default=0)
    nu = max((r.upper_config.size for r in series.records), default=0)
    cols = ["t", "lower", "upper"] + [f"lower_pole_{i}" for i in range(nl)] + \
        [f"upper_pole_{i}" for i in range(nu)] + ["gap"]
    rows = []
    for r in series.records:
        lp = list(r.lower_config.poles) + [math.nan] * (nl - r.lower_config.size)
        up = list(r.upper_config.poles) + [math.nan] * (nu - r.upper_config.size)
        rows.append([r.t, r.lower / norm, r.upper / norm] + [float(p) for p in lp + up] +
                    [(r.upper - r.lower) / norm])
    target = "scalar12" if isinstance(cfg.target, Scalar12) else f"directional alpha={fmt(cfg.target.alpha)}"
    text = _csv(_header(cfg, "bounds", grid_scale, [f"target {target}"]), cols, rows)
    _write_atomic(_out_path(cfg, out, "bounds.csv"), text)


@main.command()
@_common
def domain(config_path, out, threads, grid_scale):
    """Per-orientation response hulls, one file per time frame."""
    cfg = _load(config_path, grid_scale)
    if cfg.info.symmetry is not Symmetry.REFLECTIVE:
        raise ConfigurationError("domain construction needs reflective symmetry")
    times = cfg.times.values()
    thetas = cfg.grid.thetas()
    sec = cfg.section("domain")
    lam_thetas = np.asarray(sec.get("laminate_thetas", list(np.pi * np.arange(8) / 8)), float).reshape(-1)
    f1_grid = np.linspace(0.0, 1.0, int(sec.get("laminate_points", 51)))

    def frame(t):
        dom = domain_union_over_orientations(t, thetas, cfg.pair, cfg.info, cfg.loading, cfg.grid.alpha_grid,
                                             cfg.grid.search, cfg.grid.mask_resolution)
        lam = [(th, laminate_reference_curve(t, th, cfg.pair, cfg.loading, f1_grid)) for th in lam_thetas]
        return dom, lam

    frames = _map(frame, list(times), threads)
    outdir = _out_path(cfg, out, "domain")
    outdir.mkdir(parents=True, exist_ok=True)
    summary = []
    for k, (t, (dom, lam)) in enumerate(zip(times, frames)):
        head = _header(cfg, "domain", grid_scale, [f"t {fmt(t)}", f"frame {k}"])
        rows = [[float(h.theta), i, float(v[0]), float(v[1])]
                for h in dom.hulls for i, v in enumerate(h.polygon.vertices)]
        _write_atomic(outdir / f"frame_{k:04d}.csv", _csv(head, ["theta", "vertex_index", "x", "y"], rows))
        lrows = [[float(th), float(f), float(p[0]), float(p[1])] for th, pts in lam for f, p in zip(f1_grid, pts)]
        _write_atomic(outdir / f"laminate_{k:04d}.csv", _csv(head, ["theta", "f1", "x", "y"], lrows))
        summary.append([k, float(t), len(dom.hulls), dom.area])
    _write_atomic(outdir / "frames.csv", _csv(_header(cfg, "domain", grid_scale),
                                              ["frame", "t", "n_theta", "mask_area"], summary))


@main.command()
@_common
def kernel(config_path, out, threads, grid_scale):
    """Support values of the homogenised kernel over a fan of directions."""
    cfg = _load(config_path, grid_scale)
    n = int(cfg.section("kernel").get("directions", 32))
    fan = symmetric_direction_fan(n)
    times = cfg.times.values()
    disc = cfg.grid.discretization
    scale = cfg.pair.response_scale
    pairs = [(i, (i + 1) % n) for i in range(n)]

    def at(t):
        vals = [kernel_support(V, t, cfg.pair, cfg.info, disc) / scale for V in fan]
        bad = sum(kernel_support(fan[i] + fan[j], t, cfg.pair, cfg.info, disc) / scale < vals[i] + vals[j] - 1e-9
                  for i, j in pairs)
        return vals, bad

    results = _map(at, list(times), threads)
    rows, bad_total = [], 0
    for t, (vals, bad) in zip(times, results):
        bad_total += bad
        for k, (V, v) in enumerate(zip(fan, vals)):
            rows.append([float(t), k, float(V[0, 0]), float(V[1, 1]), float(V[0, 1]), float(v)])
    footer = [f"# superadditivity_checked {len(pairs) * len(times)}", f"# superadditivity_violations {bad_total}",
              f"# superadditivity_ok {int(bad_total == 0)}"]
    text = _csv(_header(cfg, "kernel", grid_scale, [f"directions {n}"]),
                ["t", "v_index", "v11", "v22", "v12", "support"], rows, footer)
    _write_atomic(_out_path(cfg, out, "kernel.csv"), text)


def _read_measurements(path: Path):
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigurationError(f"cannot read measurements: {e}") from None
    meas = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            meas.append((float(parts[0]), float(parts[1])))
        except (ValueError, IndexError):
            if meas or parts[0].lower() != "t":
                raise ConfigurationError(f"bad measurement row {line!r}") from None
    if not meas:
        raise ConfigurationError("measurement file has no rows")
    return meas


@main.command()
@_common
def invert(config_path, out, threads, grid_scale):
    """Volume-fraction interval consistent with measured responses (JSON)."""
    cfg = _load(config_path, grid_scale)
    sec = cfg.section("invert")
    if "measurements" not in sec:
        raise ConfigurationError("[invert] needs a measurements file")
    if not cfg.loading.is_scalar:
        raise ConfigurationError("inversion uses a load along the first axis")
    meas = _read_measurements(cfg.resolve(sec["measurements"]))
    report = {"version": __version__, "config_sha256": cfg.digest,
              "measurements": [[t, v] for t, v in meas], "warning": None}
    try:
        est = invert_volume_fraction(meas, cfg.pair, cfg.info, cfg.loading.amplitude[0],
                                     n_scan=int(sec.get("n_scan", 99)), settings=cfg.grid.search)
        report["intervals"] = [list(iv) for iv in est.intervals]
        report["interval"] = None if est.empty else list(est.interval)
        report["width"] = est.width
        report["status"] = "empty" if est.empty else "ok"
        if est.empty:
            report["warning"] = "no volume fraction reproduces every measurement"
    except InconsistentDataError as e:
        report.update(intervals=[], interval=None, width=0.0, status="inconsistent", warning=str(e))
    if report["warning"]:
        click.echo(f"warning: {report['warning']}", err=True)
    _write_atomic(_out_path(cfg, out, "invert.json"), json.dumps(report, indent=2, sort_keys=True) + "\n")


@main.command()
@_common
def correlate(config_path, out, threads, grid_scale):
    """Joint support of responses at several times for one shared microstructure."""
    cfg = _load(config_path, grid_scale)
    tuples = cfg.section("correlate").get("tuples", [])
    if not tuples:
        raise ConfigurationError("[correlate] needs at least one tuple")
    jobs = []
    for k, tp in enumerate(tuples):
        times = [float(x) for x in tp.get("times", [])]
        dirs = [np.asarray(d, float) for d in tp.get("directions", [])]
        if not times or len(times) != len(dirs):
            raise ConfigurationError(f"tuple {k}: times and directions must have equal nonzero length")
        if any(d.shape != (2,) for d in dirs):
            raise ConfigurationError(f"tuple {k}: directions must be 2-vectors")
        loads = tp.get("loadings")
        if loads is None:
            loads = [cfg.loading] * len(times)
        else:
            if len(loads) != len(times):
                raise ConfigurationError(f"tuple {k}: loadings length differs from times")
            loads = [StepLoading(tuple(float(a) for a in ld), cfg.pair.side) for ld in loads]
        jobs.append((times, dirs, loads))
    disc = cfg.grid.discretization
    scale = cfg.pair.response_scale

    def run(job):
        times, dirs, loads = job
        joint = correlate_support(dirs, times, loads, cfg.pair, cfg.info, disc) / scale
        marg = sum(correlate_support([d], [t], [ld], cfg.pair, cfg.info, disc) / scale
                   for d, t, ld in zip(dirs, times, loads))
        return joint, marg

    res = _map(run, jobs, threads)
    rows = [[k, len(j[0]), joint, marg, joint - marg, int(joint > marg + 1e-9)]
            for k, (j, (joint, marg)) in enumerate(zip(jobs, res))]
    text = _csv(_header(cfg, "correlate", grid_scale), ["tuple_id", "n", "support", "marginal_sum",
                                                          "excess", "tighter_than_box"], rows)
    _write_atomic(_out_path(cfg, out, "correlate.csv"), text)


if __name__ == "__main__":  # pragma: no cover
    main()

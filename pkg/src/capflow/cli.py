"""Command-line interface: ``capflow run | sweep | verify``.

Exit codes: 0 success, 2 configuration error, 3 flow abort, 4 verification
failure.  Any other I/O failure exits with 1.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .flow.config import FlowConfig
from .flow.driver import RunResult, run
from .flow.rhs import fill_ghosts
from .geometry import RadialGraph
from .grid import ConfigurationError, build_grid

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_ABORT, EXIT_VERIFY = 0, 1, 2, 3, 4
SNAPSHOT_FIELDS = ("beta", "u", "rho", "kappa_beta", "kappa_tan")


@dataclass
class RunManifest:
    config: dict[str, Any]
    version: str
    started: str
    finished: str
    reason: str
    final: dict[str, float]
    files: list[str] = field(default_factory=list)
    regime_threshold: float = math.nan
    in_gradient_regime: bool = False
    steps: int = 0
    sample_every: int = 0

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")


def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def parse_config(path: str | None = None, overrides: dict[str, Any] | None = None) -> FlowConfig:
    """Read a JSON config file (optional), apply flag overrides and validate."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigurationError(f"config: cannot read {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config: malformed JSON at line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config: top level must be a JSON object")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return FlowConfig.from_dict(data)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_series(result: RunResult, path: Path) -> None:
    fields = type(result.records[0]).CSV_FIELDS
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for rec in result.records:
            row = rec.as_dict()
            writer.writerow([_fmt(row[name]) for name in fields])


def snapshot_indices(count: int, available: int) -> list[int]:
    if count <= 0:
        return []
    if count == 1:
        return [available - 1]
    return sorted(set(np.linspace(0, available - 1, count).round().astype(int).tolist()))


def snapshot_graph(result: RunResult, index: int) -> RadialGraph:
    cfg = result.config
    sample = result.samples[index]
    g = RadialGraph.from_nodes(build_grid(cfg.n, cfg.M), cfg.theta, sample.u, sample.t)
    return fill_ghosts(g, cfg.boundary_slope)


def write_snapshot(result: RunResult, index: int, path: Path) -> None:
    g = snapshot_graph(result, index)
    f = g.profile().fields()
    columns = (g.grid.beta, g.u, g.rho, f.kappa_beta, f.kappa_tan)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SNAPSHOT_FIELDS)
        for row in zip(*columns):
            writer.writerow([_fmt(x) for x in row])


def write_plots(result: RunResult, out: Path, snapshots: Sequence[int]) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .caps import cap_matching_volume

    cfg = result.config
    grid = build_grid(cfg.n, cfg.M)
    meta = {"Date": None}
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    for i in snapshots or [0, len(result.samples) - 1]:
        s = result.samples[i]
        ax.plot(grid.beta, np.exp(s.u), lw=1, label=f"t = {s.t:.3g}")
    try:
        cap = cap_matching_volume(result.records[0].volume, cfg.theta, cfg.n)
        ax.plot(grid.beta, cap.psi(grid.beta), "k--", lw=1.2, label=f"volume-matched cap, R = {cap.R:.4g}")
    except (ConfigurationError, ValueError):
        pass
    ax.set_xlabel("beta")
    ax.set_ylabel("rho")
    ax.legend(fontsize=7)
    fig.tight_layout()
    paths.append(out / "profiles.svg")
    fig.savefig(paths[-1], metadata=meta)
    plt.close(fig)

    t = [r.t for r in result.records]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    ax1.plot(t, [r.energy for r in result.records])
    ax1.set_ylabel("energy")
    ax2.plot(t, [r.volume for r in result.records])
    ax2.set_ylabel("volume")
    ax2.set_xlabel("t")
    fig.tight_layout()
    paths.append(out / "energy_volume.svg")
    fig.savefig(paths[-1], metadata=meta)
    plt.close(fig)
    return paths


def run_and_emit(config: FlowConfig, out: Path, plots: bool = False, snapshots: int = 0) -> RunManifest:
    """Run the flow and write the series, manifest, and optional plots and snapshots."""
    started = datetime.now(timezone.utc).isoformat()
    result = run(config)
    finished = datetime.now(timezone.utc).isoformat()
    out.mkdir(parents=True, exist_ok=True)
    files = [out / "series.csv"]
    write_series(result, files[0])
    picks = snapshot_indices(snapshots, len(result.samples))
    if picks:
        (out / "snapshots").mkdir(exist_ok=True)
        for k, i in enumerate(picks):
            path = out / "snapshots" / f"snapshot_{k:03d}.csv"
            write_snapshot(result, i, path)
            files.append(path)
    if plots:
        files += write_plots(result, out, picks)
    manifest = RunManifest(
        config=config.to_dict(), version=__version__, started=started, finished=finished,
        reason=result.reason, final=result.final.as_dict(),
        files=[str(p.relative_to(out)) for p in files] + ["manifest.json"],
        regime_threshold=config.regime_threshold, in_gradient_regime=config.in_gradient_regime,
        steps=result.state.step_count, sample_every=result.sample_every,
    )
    manifest.write(out / "manifest.json")
    return manifest


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {"n": args.n, "theta": args.theta, "M": args.M, "t_final": args.t_final, "cfl": args.cfl}


def _report(manifest: RunManifest, out: Path) -> int:
    cfg = manifest.config
    print(f"theta={cfg['theta']:.6g} n={cfg['n']} M={cfg['M']}: {manifest.reason} "
          f"(t={manifest.final['t']:.6g}, regime threshold {manifest.regime_threshold:.5f}, "
          f"inside={manifest.in_gradient_regime}) -> {out}")
    return EXIT_ABORT if manifest.reason.startswith("aborted") else EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = parse_config(args.config, _overrides(args))
    out = Path(args.out)
    return _report(run_and_emit(config, out, args.plots, args.snapshots), out)


def _sweep_one(payload):
    config_dict, out, plots, snapshots = payload
    manifest = run_and_emit(FlowConfig.from_dict(config_dict), Path(out), plots, snapshots)
    return manifest, out


def cmd_sweep(args: argparse.Namespace) -> int:
    base = parse_config(args.config, _overrides(args))
    thetas = [float(x) for x in args.thetas.split(",")] if args.thetas else [math.pi / 3, math.pi / 2, 2 * math.pi / 3]
    jobs = []
    for k, theta in enumerate(thetas):
        cfg = FlowConfig.from_dict({**base.to_dict(), "theta": theta})
        jobs.append((cfg.to_dict(), str(Path(args.out) / f"theta_{k:02d}"), args.plots, args.snapshots))
    status = EXIT_OK
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        for manifest, out in pool.map(_sweep_one, jobs):
            status = max(status, _report(manifest, Path(out)))
    return status


def cmd_verify(args: argparse.Namespace) -> int:
    from .verify import format_table, run_verification

    cfg = parse_config(args.config, {"n": args.n, "M": args.M})
    checks = run_verification(cfg.n, cfg.M, broken_sign=args.broken_sign)
    print(format_table(checks))
    failed = [c.name for c in checks if c.passed is False]
    if failed:
        print("failing invariants: " + "; ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capflow", description="Capillary curvature flow in the unit ball.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, run_flags=True):
        p.add_argument("--config", metavar="PATH", help="JSON configuration file")
        p.add_argument("--n", type=int, help="hypersurface dimension")
        p.add_argument("--M", type=int, help="grid intervals on [0, pi/2]")
        if run_flags:
            p.add_argument("--theta", type=float, help="contact angle in radians")
            p.add_argument("--t-final", dest="t_final", type=float)
            p.add_argument("--cfl", type=float)
            p.add_argument("--out", metavar="DIR", default="capflow-out")
            p.add_argument("--plots", type=parse_bool, default=False, metavar="BOOL")
            p.add_argument("--snapshots", type=int, default=0, metavar="N")

    p_run = sub.add_parser("run", help="run one flow and write its outputs")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run several contact angles concurrently")
    common(p_sweep)
    p_sweep.add_argument("--thetas", help="comma-separated angles in radians (default pi/3,pi/2,2pi/3)")
    p_sweep.add_argument("--workers", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the invariant suite and print a table")
    common(p_verify, run_flags=False)
    p_verify.add_argument("--broken-sign", action="store_true",
                          help="negative control: reverse <nu,a> in the Minkowski identity")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

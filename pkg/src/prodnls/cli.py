"""Command line harness: ``prodnls <subcommand> [--config PATH] [--jobs N] [--seed U64] [--outdir PATH]``.

Every run writes into a private temporary directory that is moved onto
``--outdir`` only when the experiment finished, so a failed run leaves no
partial artifacts.  CSVs are comma-separated with a header row, ``repr``
floats and LF line endings.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import shutil
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .checkpoint import save_checkpoint
from .config import EXPERIMENTS, ConfigError, SimConfig, initial_data, load_config, parse_config
from .evolution import (EvolutionError, NotConverged, ball_spec, contraction_factor, evolve, free_propagate,
                        free_series, picard_iterate)
from .exponents import Infeasible, NonlinearityContext, fmt, scan_witnesses, solve_system
from .fields import NormSpec, energy, h1_norm, mass, mixed_norm, sobolev_norm, write_norm_csv
from .fractional import leibniz_ratio, random_trig_poly
from .grid import TorusSpectrum, recurrence_horizon
from .scattering import HorizonExceeded, dispersive_decay_fit, extract_wave_data, strichartz_ratios

log = logging.getLogger("prodnls")

EXIT_OK, EXIT_CONFIG, EXIT_RUN = 0, 2, 3


# -- output helpers -------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, Fraction):
        return fmt(v)
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
            count += 1
    return count


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def write_manifest(path, cfg: SimConfig, wall: float, extra: Optional[dict] = None) -> None:
    lines = [
        f"version={version_string()}",
        f"experiment={cfg.experiment}",
        f"seed={cfg.seed}",
        f"wall_time={wall:.3f}",
        f"timestamp={time.strftime('%Y-%m-%dT%H:%M:%S%z')}",
    ]
    for key, v in (extra or {}).items():
        lines.append(f"{key}={v}")
    for note in cfg.notes:
        lines.append(f"note={note}")
    lines.append("# config")
    lines.append(cfg.to_text().rstrip("\n"))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- experiments ------------------------------------------------------------------

def _eps(cfg: SimConfig) -> float:
    return cfg.epsilons[0]


def _horizon(cfg: SimConfig, grid) -> float:
    return math.inf if cfg.band is None else recurrence_horizon(grid, cfg.band)


def _sample_rows(u, cfg: SimConfig):
    lam, mu = cfg.lam, float(cfg.mu)
    for j in range(len(u)):
        f = u[j]
        yield (float(u.times[j]), mass(f), energy(f, lam, mu), sobolev_norm(f, 0.0, cfg.sigma), h1_norm(f))


SAMPLE_HEADER = ("t", "mass", "energy", "h0sigma", "h1")


def _write_samples(u, cfg: SimConfig, out: Path) -> int:
    n = write_csv(out / "samples.csv", SAMPLE_HEADER, _sample_rows(u, cfg))
    spec = NormSpec("sobolev", sigma=cfg.sigma)
    write_norm_csv(out / "norms.csv",
                   [(float(u.times[j]), spec.name, sobolev_norm(u[j], 0.0, cfg.sigma)) for j in range(len(u))]
                   + [(float(u.times[j]), "H^1", h1_norm(u[j])) for j in range(len(u))])
    if cfg.checkpoint_every:
        ck = out / "checkpoints"
        ck.mkdir()
        for j in range(0, len(u), cfg.checkpoint_every):
            save_checkpoint(u[j], ck / f"sample_{j:06d}.pnls")
    save_checkpoint(u[len(u) - 1], out / "final.pnls")
    return n


def run_exponents(cfg: SimConfig, out: Path, scan: bool = False, bound: int = 60) -> dict:
    ctx = NonlinearityContext(cfg.n, cfg.k, cfg.mu, lam=cfg.lam, sigma=cfg.sigma)
    header = ("q", "r", "qt", "rt", "l", "p")
    if scan:
        rows = [w.row() for w in scan_witnesses(ctx, bound)]
        if not rows:
            raise Infeasible(f"no witness with denominators <= {bound} for n={cfg.n}, mu={fmt(cfg.mu)}")
    else:
        rows = [solve_system(ctx, bound).row()]
    write_csv(out / "exponents.csv", header, rows)
    return {"witnesses": len(rows)}


def run_evolve(cfg: SimConfig, out: Path) -> dict:
    grid = cfg.grid
    u = evolve(initial_data(grid, _eps(cfg)), cfg.evolution())
    rows = _write_samples(u, cfg, out)
    m = [mass(u[j]) for j in range(len(u))]
    return {"samples": rows, "mass_drift": repr(max(abs(x - m[0]) for x in m) / m[0] if m[0] else 0.0)}


def run_picard(cfg: SimConfig, out: Path) -> dict:
    grid = cfg.grid
    ec = cfg.evolution()
    rep = picard_iterate(initial_data(grid, _eps(cfg)), ec, tol=cfg.tol, max_iter=cfg.maxiter)
    write_csv(out / "picard.csv", ("iteration", "distance"), enumerate(rep.distances, start=1))
    _write_samples(rep.series, cfg, out)
    return {"iterations": rep.iterations, "converged": rep.converged, "metric": rep.metric.name}


def run_scatter(cfg: SimConfig, out: Path) -> dict:
    grid = cfg.grid
    hor = _horizon(cfg, grid)
    if cfg.T > hor:
        raise HorizonExceeded(f"T={cfg.T:g} beyond the recurrence horizon {hor:g}")
    u = evolve(initial_data(grid, _eps(cfg)), cfg.evolution())
    rep = extract_wave_data(u, NormSpec("sobolev", sigma=cfg.sigma), horizon=hor, ctx=cfg.ctx)
    write_csv(out / "scatter.csv", ("window", "norm", "value"), rep.rows())
    (out / "summary.txt").write_text(rep.summary() + "\n", encoding="utf-8")
    print(rep.summary())
    inc = rep.cauchy(NormSpec("sobolev", sigma=cfg.sigma).name)
    return {"horizon": hor, "final_increment": repr(inc[-1]),
            "monotone": all(b < a for a, b in zip(inc, inc[1:]))}


def run_decay(cfg: SimConfig, out: Path) -> dict:
    grid = cfg.grid
    hor = _horizon(cfg, grid)
    times = np.geomspace(cfg.T / 16, cfg.T, 16)
    f = initial_data(grid, _eps(cfg))
    slope, resid = dispersive_decay_fit(f, times, hor)
    rows = []
    for t in times:
        u = free_propagate(f, float(t)).physical()
        prof = np.sqrt(np.sum(np.abs(u) ** 2, axis=grid.y_axes) * grid.torus.cell_volume)
        rows.append((float(t), float(prof.max())))
    write_csv(out / "decay.csv", ("t", "linf_l2"), rows)
    write_csv(out / "decay_fit.csv", ("slope", "residual", "expected"), [(slope, resid, -cfg.n / 2)])
    print(f"decay slope {slope:.4f} (expected {-cfg.n / 2:g}), rms residual {resid:.2e}, horizon {hor:g}")
    return {"slope": repr(slope)}


def run_fracineq(cfg: SimConfig, out: Path) -> dict:
    torus = TorusSpectrum(cfg.k, cfg.radii, cfg.Ny)
    rows = []
    for i in range(cfg.frac_count):
        seed = (cfg.seed + i) % 2 ** 64
        f = random_trig_poly(torus, np.random.default_rng(seed), degree=cfg.frac_degree)
        for sigma in cfg.frac_sigmas:
            rows.append((seed, cfg.frac_mu, sigma, cfg.Ny, leibniz_ratio(f, cfg.frac_mu, sigma)))
    write_csv(out / "fracineq.csv", ("seed", "mu", "sigma", "Ny", "ratio"), rows)
    best = {s: max(r[4] for r in rows if r[2] == s) for s in cfg.frac_sigmas}
    for s, v in best.items():
        print(f"sigma={s:g}: max ratio {v:.6f} over {cfg.frac_count} functions")
    return {f"max_ratio_sigma_{s:g}": repr(v) for s, v in best.items()}


def _sweep_child(args) -> tuple[list, tuple]:
    """One ε of a sweep; runs in a worker process and owns ``run_dir``."""
    text, eps, run_dir, seed = args
    cfg = parse_config(text)
    cfg.epsilons = (eps,)
    run_dir = Path(run_dir)
    run_dir.mkdir()
    t0 = time.perf_counter()
    grid = cfg.grid
    ec = cfg.evolution()
    f = initial_data(grid, eps)
    u = evolve(f, ec)
    rows = list(_sample_rows(u, cfg))
    write_csv(run_dir / "samples.csv", SAMPLE_HEADER, rows)
    hor = _horizon(cfg, grid)
    spec = NormSpec("sobolev", sigma=cfg.sigma)
    rep = extract_wave_data(u, spec, horizon=hor, ctx=cfg.ctx)
    write_csv(run_dir / "scatter.csv", ("window", "norm", "value"), rep.rows())
    radius = 0.5 * mixed_norm(free_series(f, ec.sample_times()), ball_spec(cfg.ctx))
    stats = contraction_factor(f, ec, radius, trials=cfg.trials, seed=seed) if radius > 0 else None
    ratios = strichartz_ratios(u, cfg.ctx)
    summary = (eps, stats.max if stats else 0.0, stats.mean if stats else 0.0,
               ratios[next(iter(ratios))], max(ratios.values()), rep.cauchy(spec.name)[-1])
    write_manifest(run_dir / "manifest.txt", replace(cfg, seed=seed), time.perf_counter() - t0)
    return rows, summary


SWEEP_HEADER = ("run", "eps", "contraction_max", "contraction_mean", "strichartz_contraction_pair",
                "strichartz_max", "final_increment")


def run_sweep(cfg: SimConfig, out: Path, jobs: int = 1) -> dict:
    text = cfg.to_text()
    # one independent child seed per run, derived from the master seed
    seeds = [int(s.generate_state(1, dtype=np.uint64)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(len(cfg.epsilons))]
    tasks = [(text, eps, str(out / f"run_{i:03d}"), seeds[i]) for i, eps in enumerate(cfg.epsilons)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_child, tasks))
    else:
        results = [_sweep_child(t) for t in tasks]
    # barrier passed: aggregate in run order
    agg = [(i, eps) + tuple(row) for i, ((rows, _), eps) in enumerate(zip(results, cfg.epsilons)) for row in rows]
    write_csv(out / "aggregate.csv", ("run", "eps") + SAMPLE_HEADER, agg)
    write_csv(out / "sweep_summary.csv", SWEEP_HEADER, [(i,) + s for i, (_, s) in enumerate(results)])
    for i, (_, s) in enumerate(results):
        print(f"run {i:03d} eps={s[0]:g}: contraction max {s[1]:.3e}, strichartz {s[3]:.4f}, "
              f"final increment {s[5]:.3e}")
    return {"runs": len(results)}


def run_experiment(cfg: SimConfig, outdir: Optional[Path] = None, jobs: int = 1, scan: bool = False,
                   denominator_bound: int = 60) -> int:
    """Run ``cfg.experiment`` and move its artifacts onto ``outdir`` atomically.

    Returns the exit status; nothing is left behind on failure.
    """
    outdir = Path(outdir or cfg.outdir).resolve()
    outdir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{outdir.name}.", dir=outdir.parent))
    t0 = time.perf_counter()
    try:
        for note in cfg.notes:
            log.warning(note)
        if cfg.experiment == "exponents":
            extra = run_exponents(cfg, tmp, scan, denominator_bound)
        elif cfg.experiment == "sweep":
            extra = run_sweep(cfg, tmp, jobs)
        else:
            extra = {
                "evolve": run_evolve, "picard": run_picard, "scatter": run_scatter,
                "decay": run_decay, "fracineq": run_fracineq,
            }[cfg.experiment](cfg, tmp)
        write_manifest(tmp / "manifest.txt", cfg, time.perf_counter() - t0, extra)
    except (Infeasible, EvolutionError, NotConverged, HorizonExceeded, ValueError) as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        msg = f"{cfg.experiment} failed: {exc}"
        if isinstance(exc, NotConverged):
            msg += "\n  distances: " + ", ".join(f"{d:.3e}" for d in exc.distances)
        log.error(msg)
        return EXIT_RUN
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if outdir.exists():
        old = outdir.with_name(f".{outdir.name}.old")
        shutil.rmtree(old, ignore_errors=True)
        os.replace(outdir, old)
        os.replace(tmp, outdir)
        shutil.rmtree(old, ignore_errors=True)
    else:
        os.replace(tmp, outdir)
    log.info("artifacts in %s", outdir)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="key=value config file")
    common.add_argument("--jobs", type=_positive, default=argparse.SUPPRESS, help="parallel sweep workers")
    common.add_argument("--seed", type=_u64, default=argparse.SUPPRESS, help="master seed (u64)")
    common.add_argument("--outdir", type=Path, default=argparse.SUPPRESS, help="artifact directory")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="prodnls", parents=[common],
                                description="NLS on R^n x T^k: exponents, dynamics, scattering, fractional checks")
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, parents=[common])
        if name == "exponents":
            sp.add_argument("--n", type=int, default=None)
            sp.add_argument("--mu", type=str, default=None, help='rational string, e.g. "7/2"')
            sp.add_argument("--denominator-bound", type=_positive, default=60)
            sp.add_argument("--scan", action="store_true", help="dump every lattice witness")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    opts = vars(args)
    logging.basicConfig(level=logging.INFO if opts.get("verbose") else logging.WARNING,
                        format="%(levelname)s %(message)s")
    overrides = {"experiment": args.command}
    if "seed" in opts:
        overrides["seed"] = str(opts["seed"])
    if "outdir" in opts:
        overrides["outdir"] = str(opts["outdir"])
    if args.command == "exponents":
        if args.n is not None:
            overrides["n"] = str(args.n)
        if args.mu is not None:
            overrides["mu"] = args.mu
    try:
        cfg = load_config(opts["config"], overrides) if "config" in opts else parse_config("", overrides)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "exponents" and "outdir" not in opts:
        # no output directory requested: print the CSV
        ctx = NonlinearityContext(cfg.n, cfg.k, cfg.mu)
        try:
            rows = ([w.row() for w in scan_witnesses(ctx, args.denominator_bound)] if args.scan
                    else [solve_system(ctx, args.denominator_bound).row()])
        except Infeasible as exc:
            print(f"exponents failed: {exc}", file=sys.stderr)
            return EXIT_RUN
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(("q", "r", "qt", "rt", "l", "p"))
        w.writerows(rows)
        return EXIT_OK
    return run_experiment(cfg, jobs=opts.get("jobs", 1),
                          scan=getattr(args, "scan", False),
                          denominator_bound=getattr(args, "denominator_bound", 60))


if __name__ == "__main__":
    sys.exit(main())

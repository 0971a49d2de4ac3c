"""Experiment runner: dataset generation, posterior benchmarks, reports.

Configuration is a single JSON file; see configs/ for examples.  Subcommands:

    mrflab generate  --config cfg.json            write .mrfdat datasets + true-theta sidecars
    mrflab fit-mle   --config cfg.json            CD MLE per dataset, written as CSV
    mrflab exact-z   --config cfg.json            exact log Z of each replicate's true theta
    mrflab posterior --config cfg.json [--jobs N] run every (dataset x method) chain, write report.csv
    mrflab report    --config cfg.json            aggregate report.csv into summaries + SVG charts

Exit codes: 0 success, 1 configuration error, 2 runtime error.

Chains for different methods on the same dataset share the MH seed, so their
proposal streams are identical; every cell derives its own strategy stream.
Row order and float formatting are canonical, so a rerun with the same config
and seed reproduces report.csv byte for byte (timing fields are measured
wall-clock and only repeat when record_timing is false).
"""

import argparse
import concurrent.futures
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .baselines import fit_laplace
from .exact import RECURSION_MAX_WINDOW, log_partition
from .mh import (AuxVarStrategy, ExactLikelihoodStrategy, ExchangeStrategy,
                 IsGeometricStrategy, LaplaceStrategy, MhConfig,
                 MleInducedStrategy, PersistentChainStrategy,
                 PseudoLikelihoodStrategy, dump_chain_csv, posterior_summary,
                 run_chain)
from .mle import CdConfig, fit_mle
from .mle_likelihood import build_likelihood_model
from .model import build_grid, load_dataset, sample_dataset, save_dataset, \
    sufficient_stats

logger = logging.getLogger(__name__)

VALID_METHODS = ("exact", "mle-L", "pseudo-L", "laplace-L",
                 "is-geometric", "auxvar", "exch", "persist-mc")
REPORT_COLUMNS = ("method", "replicate", "n", "rho", "param_index", "true_theta",
                  "post_mean", "post_sd", "ref_post_mean", "runtime_ms",
                  "acceptance_rate")
MLE_NEEDED_BY = ("mle-L", "laplace-L", "auxvar")


class ConfigError(ValueError):
    pass


@dataclass
class GridCfg:
    rows: int
    cols: int


@dataclass
class ThetaGenCfg:
    low: float = 0.5
    high: float = 0.8
    seed: int = 0


@dataclass
class ParticlesCfg:
    count: int = 1000
    advance_sweeps: int = 1000
    k: int = 1


@dataclass
class ExperimentConfig:
    grid: GridCfg
    theta_gen: ThetaGenCfg
    n_values: list
    methods: list
    copula_rho: list = field(default_factory=lambda: [0.0])
    mh: MhConfig = field(default_factory=MhConfig)
    particles: ParticlesCfg = field(default_factory=ParticlesCfg)
    replicates: int = 1
    out_dir: str = "runs/out"
    record_timing: bool = True
    dump_chains: bool = False
    theta0_init: str = "midpoint"  # or "mle": start every chain at the CD MLE
    mle: CdConfig = field(default_factory=CdConfig)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        cfg = ExperimentConfig(
            grid=GridCfg(**raw["grid"]),
            theta_gen=ThetaGenCfg(**raw.get("theta_gen", {})),
            n_values=list(raw["n_values"]),
            methods=list(raw["methods"]),
            copula_rho=[float(r) for r in raw.get("copula_rho", [0.0])],
            mh=MhConfig(**raw.get("mh", {})),
            particles=ParticlesCfg(**raw.get("particles", {})),
            replicates=int(raw.get("replicates", 1)),
            out_dir=str(raw.get("out_dir", "runs/out")),
            record_timing=bool(raw.get("record_timing", True)),
            dump_chains=bool(raw.get("dump_chains", False)),
            theta0_init=str(raw.get("theta0_init", "midpoint")),
            mle=CdConfig(**raw.get("mle", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config structure: {exc}") from exc
    if cfg.theta0_init not in ("midpoint", "mle"):
        raise ConfigError("theta0_init must be 'midpoint' or 'mle'")
    if cfg.grid.rows < 1 or cfg.grid.cols < 1 or cfg.grid.rows * cfg.grid.cols < 2:
        raise ConfigError("grid dimensions must describe at least two nodes")
    if not cfg.n_values or any(n < 1 for n in cfg.n_values):
        raise ConfigError("n_values must be positive integers")
    unknown = [m for m in cfg.methods if m not in VALID_METHODS]
    if unknown:
        raise ConfigError(f"unknown methods {unknown}; valid: {list(VALID_METHODS)}")
    if cfg.replicates < 1:
        raise ConfigError("replicates must be positive")
    if not 0.0 <= cfg.theta_gen.low < cfg.theta_gen.high <= 1.0:
        raise ConfigError("theta_gen must satisfy 0 <= low < high <= 1")
    return cfg


# ---------------------------------------------------------------------------
# deterministic seeding
# ---------------------------------------------------------------------------

def _derive_seed(*entropy) -> int:
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])


def _true_theta(cfg: ExperimentConfig, replicate: int) -> np.ndarray:
    grid = build_grid(cfg.grid.rows, cfg.grid.cols)
    rng = np.random.default_rng(_derive_seed(cfg.theta_gen.seed, replicate, 1))
    low, high = cfg.theta_gen.low, cfg.theta_gen.high
    return low + (high - low) * rng.random(grid.p)


def _dataset_stem(replicate: int, n: int) -> str:
    return f"rep{replicate:03d}_n{n:05d}"


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def cmd_generate(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = build_grid(cfg.grid.rows, cfg.grid.cols)
    for r in range(cfg.replicates):
        theta = _true_theta(cfg, r)
        sidecar = {"rows": cfg.grid.rows, "cols": cfg.grid.cols, "replicate": r,
                   "theta": [float(t) for t in theta]}
        with open(out / f"rep{r:03d}.theta.json", "w", newline="\n") as fh:
            json.dump(sidecar, fh, indent=1)
            fh.write("\n")
        for n in cfg.n_values:
            rng = np.random.default_rng(_derive_seed(cfg.theta_gen.seed, r, 2, n))
            data = sample_dataset(theta, grid, n, rng)
            save_dataset(out / f"{_dataset_stem(r, n)}.mrfdat", data, grid)
    logger.info("wrote %d datasets to %s", cfg.replicates * len(cfg.n_values), out)
    return 0


# ---------------------------------------------------------------------------
# fit-mle
# ---------------------------------------------------------------------------

def _fit_dataset_mle(cfg: ExperimentConfig, grid, data, replicate: int, n: int):
    cd = CdConfig(k=cfg.mle.k, step_size=cfg.mle.step_size,
                  max_iters=cfg.mle.max_iters, num_particles=cfg.mle.num_particles,
                  persistent=cfg.mle.persistent, grad_tol=cfg.mle.grad_tol,
                  seed=_derive_seed(cfg.mle.seed, replicate, 3, n))
    return fit_mle(data, grid, cd)


def cmd_fit_mle(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    grid = build_grid(cfg.grid.rows, cfg.grid.cols)
    for r in range(cfg.replicates):
        for n in cfg.n_values:
            stem = _dataset_stem(r, n)
            data, rows, cols = load_dataset(out / f"{stem}.mrfdat")
            if (rows, cols) != (cfg.grid.rows, cfg.grid.cols):
                raise RuntimeError(f"{stem}: grid mismatch with config")
            result = _fit_dataset_mle(cfg, grid, data, r, n)
            with open(out / f"{stem}.mle.csv", "w", newline="\n") as fh:
                fh.write("param_index,theta_hat\n")
                for j, t in enumerate(result.theta_hat):
                    fh.write(f"{j},{t:.12g}\n")
    return 0


# ---------------------------------------------------------------------------
# exact-z
# ---------------------------------------------------------------------------

def cmd_exact_z(cfg: ExperimentConfig, stream=None) -> int:
    stream = stream or sys.stdout
    grid = build_grid(cfg.grid.rows, cfg.grid.cols)
    if min(cfg.grid.rows, cfg.grid.cols) > RECURSION_MAX_WINDOW:
        raise RuntimeError("grid too large for the exact recursion")
    for r in range(cfg.replicates):
        theta = _true_theta(cfg, r)
        print(f"{r} {log_partition(theta, grid).log_z:.12g}", file=stream)
    return 0


# ---------------------------------------------------------------------------
# posterior benchmark
# ---------------------------------------------------------------------------

def _method_cells(cfg: ExperimentConfig):
    """Expand methods into (method, rho) cells; rho applies to mle-L only."""
    cells = []
    for m in cfg.methods:
        if m == "mle-L":
            cells.extend((m, float(r)) for r in cfg.copula_rho)
        else:
            cells.append((m, None))
    return cells


def _build_strategy(method, rho, stats, grid, data, theta_hat, cfg, cell_seed):
    rng = np.random.default_rng(cell_seed)
    pc = cfg.particles
    if method == "exact":
        if min(grid.rows, grid.cols) > RECURSION_MAX_WINDOW:
            return None  # incompatible: recursion guard
        return ExactLikelihoodStrategy(stats, grid)
    if method == "mle-L":
        model = build_likelihood_model(data, theta_hat, grid, rho=rho)
        return MleInducedStrategy(model)
    if method == "pseudo-L":
        return PseudoLikelihoodStrategy(data, grid)
    if method == "laplace-L":
        lm = fit_laplace(theta_hat, grid, rng=rng, stats=stats)
        return LaplaceStrategy(lm, stats)
    if method == "is-geometric":
        return IsGeometricStrategy(stats, grid, pc.count, pc.advance_sweeps, rng)
    if method == "auxvar":
        return AuxVarStrategy(stats, grid, theta_hat, pc.count, pc.advance_sweeps, rng)
    if method == "exch":
        return ExchangeStrategy(stats, grid, pc.count, pc.advance_sweeps, rng)
    if method == "persist-mc":
        return PersistentChainStrategy(stats, grid, pc.count, pc.k,
                                       pc.advance_sweeps, rng)
    raise ConfigError(f"unknown method {method}")


def _run_cell(task):
    """One (dataset, method, rho) chain; returns result rows and setup timing."""
    (cfg_dict, replicate, n, method, rho, dataset_path, theta_true, theta_hat) = task
    cfg = _config_from_dict(cfg_dict)
    grid = build_grid(cfg.grid.rows, cfg.grid.cols)
    data, _, _ = load_dataset(dataset_path)
    stats = sufficient_stats(data, grid)
    theta_hat = None if theta_hat is None else np.asarray(theta_hat)
    cell_seed = _derive_seed(cfg.mh.seed, replicate, 4, n,
                             VALID_METHODS.index(method),
                             0 if rho is None else int(round(rho * 1e6)))

    t0 = time.perf_counter()
    strategy = _build_strategy(method, rho, stats, grid, data, theta_hat, cfg,
                               cell_seed)
    setup_ms = (time.perf_counter() - t0) * 1e3
    if strategy is None:
        return {"method": method, "replicate": replicate, "n": n, "rho": rho,
                "skipped": True, "setup_ms": setup_ms}

    chain_cfg = MhConfig(steps=cfg.mh.steps, sigma_q2=cfg.mh.sigma_q2,
                         prior_low=cfg.mh.prior_low, prior_high=cfg.mh.prior_high,
                         burn_in_fraction=cfg.mh.burn_in_fraction,
                         thin=cfg.mh.thin,
                         seed=_derive_seed(cfg.mh.seed, replicate, 5, n))
    if cfg.theta0_init == "mle" and theta_hat is not None:
        theta0 = theta_hat.copy()
    else:
        theta0 = np.full(grid.p, 0.5 * (cfg.mh.prior_low + cfg.mh.prior_high))
    ps = run_chain(chain_cfg, strategy, theta0)
    mean, sd = posterior_summary(ps)
    if cfg.dump_chains:
        chains_dir = Path(cfg.out_dir) / "chains"
        chains_dir.mkdir(parents=True, exist_ok=True)
        label = method if rho is None else f"{method}_rho{rho:g}"
        dump_chain_csv(ps, chains_dir / f"{_dataset_stem(replicate, n)}_{label}.csv")
    return {"method": method, "replicate": replicate, "n": n, "rho": rho,
            "skipped": False, "setup_ms": setup_ms,
            "true_theta": list(map(float, theta_true)),
            "post_mean": list(map(float, mean)), "post_sd": list(map(float, sd)),
            "runtime_ms": ps.runtime_ms, "acceptance_rate": ps.acceptance_rate}


def _config_from_dict(d) -> ExperimentConfig:
    return ExperimentConfig(
        grid=GridCfg(**d["grid"]), theta_gen=ThetaGenCfg(**d["theta_gen"]),
        n_values=d["n_values"], methods=d["methods"], copula_rho=d["copula_rho"],
        mh=MhConfig(**d["mh"]), particles=ParticlesCfg(**d["particles"]),
        replicates=d["replicates"], out_dir=d["out_dir"],
        record_timing=d["record_timing"], dump_chains=d["dump_chains"],
        theta0_init=d["theta0_init"], mle=CdConfig(**d["mle"]))


def _fmt(x) -> str:
    return "" if x is None else f"{x:.12g}"


def cmd_posterior(cfg: ExperimentConfig, jobs: int = 1) -> int:
    out = Path(cfg.out_dir)
    grid = build_grid(cfg.grid.rows, cfg.grid.cols)
    cells = _method_cells(cfg)
    needs_mle = any(m in MLE_NEEDED_BY for m, _ in cells) \
        or cfg.theta0_init == "mle"

    tasks = []
    cfg_dict = asdict(cfg)
    for r in range(cfg.replicates):
        with open(out / f"rep{r:03d}.theta.json") as fh:
            theta_true = json.load(fh)["theta"]
        for n in cfg.n_values:
            path = out / f"{_dataset_stem(r, n)}.mrfdat"
            if not path.exists():
                raise RuntimeError(f"missing dataset {path}; run `mrflab generate` first")
            theta_hat = None
            if needs_mle:
                data, _, _ = load_dataset(path)
                theta_hat = _fit_dataset_mle(cfg, grid, data, r, n).theta_hat.tolist()
            for method, rho in cells:
                tasks.append((cfg_dict, r, n, method, rho, str(path),
                              theta_true, theta_hat))

    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]

    # exact-strategy means keyed by (replicate, n) for the reference column
    exact_means = {(res["replicate"], res["n"]): res["post_mean"]
                   for res in results if res["method"] == "exact" and not res["skipped"]}

    method_order = {m: i for i, m in enumerate(VALID_METHODS)}
    results.sort(key=lambda res: (res["n"], res["replicate"],
                                  method_order[res["method"]],
                                  -1.0 if res["rho"] is None else res["rho"]))
    report_path = out / "report.csv"
    with open(report_path, "w", newline="\n") as fh:
        fh.write(",".join(REPORT_COLUMNS) + "\n")
        for res in results:
            base = [res["method"], str(res["replicate"]), str(res["n"]),
                    _fmt(res["rho"])]
            if res["skipped"]:
                fh.write(",".join(base + ["-1", "", "", "", "", "", ""]) + "\n")
                continue
            ref = exact_means.get((res["replicate"], res["n"]))
            runtime = res["runtime_ms"] if cfg.record_timing else 0.0
            for j in range(grid.p):
                fh.write(",".join(base + [
                    str(j), _fmt(res["true_theta"][j]), _fmt(res["post_mean"][j]),
                    _fmt(res["post_sd"][j]),
                    _fmt(None if ref is None else ref[j]),
                    _fmt(runtime), _fmt(res["acceptance_rate"])]) + "\n")

    with open(out / "timings_setup.csv", "w", newline="\n") as fh:
        fh.write("method,replicate,n,rho,setup_ms\n")
        for res in results:
            setup = res["setup_ms"] if cfg.record_timing else 0.0
            fh.write(f"{res['method']},{res['replicate']},{res['n']},"
                     f"{_fmt(res['rho'])},{_fmt(setup)}\n")
    logger.info("report written to %s", report_path)
    return 0


# ---------------------------------------------------------------------------
# report aggregation
# ---------------------------------------------------------------------------

def _method_label(row) -> str:
    if row["method"] == "mle-L":
        return f"mle-L(rho={float(row['rho']):g})"
    return row["method"]


def cmd_report(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    path = out / "report.csv"
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(REPORT_COLUMNS):
            raise RuntimeError(f"{path}: unexpected columns {reader.fieldnames}")
        rows = [row for row in reader]
    data_rows = [r for r in rows if r["param_index"] != "-1"]

    exact_sd = {}
    for r in data_rows:
        if r["method"] == "exact":
            key = (r["replicate"], r["n"], r["param_index"])
            exact_sd[key] = float(r["post_sd"])

    mean_err = {}   # (label, n) -> list of |post_mean - ref|
    sd_err = {}     # (label, n) -> list of |post_sd - exact sd|
    runtimes = {}   # (label, n) -> list of runtime_ms
    for r in data_rows:
        label, n = _method_label(r), int(r["n"])
        ref = float(r["ref_post_mean"]) if r["ref_post_mean"] else float(r["true_theta"])
        mean_err.setdefault((label, n), []).append(abs(float(r["post_mean"]) - ref))
        sd_ref = exact_sd.get((r["replicate"], r["n"], r["param_index"]))
        if sd_ref is not None:
            sd_err.setdefault((label, n), []).append(abs(float(r["post_sd"]) - sd_ref))
        if r["runtime_ms"]:
            runtimes.setdefault((label, n), []).append(float(r["runtime_ms"]))

    labels = sorted({k[0] for k in mean_err}, key=lambda s: s)
    n_values = sorted({k[1] for k in mean_err})

    def _write_summary(name, table):
        with open(out / name, "w", newline="\n") as fh:
            fh.write("method,n,value,count\n")
            for label in labels:
                for n in n_values:
                    vals = table.get((label, n))
                    if vals:
                        fh.write(f"{label},{n},{np.mean(vals):.12g},{len(vals)}\n")

    _write_summary("summary_mean_error.csv", mean_err)
    _write_summary("summary_sd_error.csv", sd_err)

    with open(out / "runtime_table.csv", "w", newline="\n") as fh:
        fh.write("method," + ",".join(f"n={n}" for n in n_values) + "\n")
        for label in labels:
            cells = []
            for n in n_values:
                vals = runtimes.get((label, n))
                cells.append(f"{np.mean(vals):.6g}" if vals else "")
            fh.write(label + "," + ",".join(cells) + "\n")

    def _series(table):
        return {label: [
            (np.mean(table[(label, n)]) if (label, n) in table else None)
            for n in n_values] for label in labels}

    _write_line_chart(out / "mean_error.svg", n_values, _series(mean_err),
                      "posterior-mean error vs exact reference", "n",
                      "mean |post_mean - ref|")
    _write_line_chart(out / "sd_error.svg", n_values, _series(sd_err),
                      "posterior-sd error vs exact reference", "n",
                      "mean |post_sd - ref_sd|")
    return 0


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _write_line_chart(path, x_values, series, title, xlabel, ylabel) -> None:
    """Minimal hand-rolled SVG line chart (one polyline per series)."""
    width, height = 640, 440
    ml, mr, mt, mb = 70, 180, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    ys = [v for vals in series.values() for v in vals if v is not None]
    if not ys:
        ys = [0.0, 1.0]
    y_lo, y_hi = min(ys), max(ys)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = min(x_values), max(x_values)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0

    def sx(x):
        return ml + pw * (x - x_lo) / (x_hi - x_lo)

    def sy(y):
        return mt + ph * (1.0 - (y - y_lo) / (y_hi - y_lo))

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{ml}" y="22" font-size="15" font-family="sans-serif">{title}</text>',
             f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
             f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
             f'<text x="{ml + pw / 2:.0f}" y="{height - 12}" font-size="12" '
             f'font-family="sans-serif" text-anchor="middle">{xlabel}</text>',
             f'<text x="16" y="{mt + ph / 2:.0f}" font-size="12" font-family="sans-serif" '
             f'transform="rotate(-90 16 {mt + ph / 2:.0f})" text-anchor="middle">{ylabel}</text>']
    for x in x_values:
        parts.append(f'<line x1="{sx(x):.1f}" y1="{mt + ph}" x2="{sx(x):.1f}" '
                     f'y2="{mt + ph + 4}" stroke="black"/>')
        parts.append(f'<text x="{sx(x):.1f}" y="{mt + ph + 18}" font-size="11" '
                     f'font-family="sans-serif" text-anchor="middle">{x:g}</text>')
    for i in range(5):
        y = y_lo + (y_hi - y_lo) * i / 4
        parts.append(f'<text x="{ml - 6}" y="{sy(y) + 4:.1f}" font-size="11" '
                     f'font-family="sans-serif" text-anchor="end">{y:.3g}</text>')
    for k, (label, vals) in enumerate(series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{sx(x):.1f},{sy(v):.1f}"
                       for x, v in zip(x_values, vals) if v is not None)
        if pts:
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                         f'stroke-width="2"/>')
        ly = mt + 16 * k
        parts.append(f'<rect x="{ml + pw + 12}" y="{ly}" width="10" height="10" '
                     f'fill="{color}"/>')
        parts.append(f'<text x="{ml + pw + 27}" y="{ly + 9}" font-size="11" '
                     f'font-family="sans-serif">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrflab",
                                     description="grid-MRF likelihood benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("generate", "fit-mle", "posterior", "exact-z", "report"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None, help="override out_dir")
        sp.add_argument("--seed", type=int, default=None,
                        help="override mh.seed and theta_gen.seed")
        sp.add_argument("--jobs", type=int, default=None,
                        help="parallel workers (fallback: MRFLAB_JOBS, then 1)")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg.out_dir = args.out
        if args.seed is not None:
            cfg.mh.seed = args.seed
            cfg.theta_gen.seed = args.seed
        jobs = args.jobs
        if jobs is None:
            jobs = int(os.environ.get("MRFLAB_JOBS", "1"))
        if jobs < 1:
            raise ConfigError("--jobs must be positive")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "fit-mle":
            return cmd_fit_mle(cfg)
        if args.command == "exact-z":
            return cmd_exact_z(cfg)
        if args.command == "posterior":
            return cmd_posterior(cfg, jobs=jobs)
        if args.command == "report":
            return cmd_report(cfg)
        raise RuntimeError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        logger.exception("command failed")
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

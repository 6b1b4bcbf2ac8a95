"""Command-line surface.

Subcommands: `bin` infers binnings from an events CSV, `synth` generates a
synthetic dataset with a planted binning, `sweep` runs reconstruction grids,
`metrics` evaluates and compares stored binning results. Exit codes:
0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoding import total_dl_exact
from .events import (
    Binning,
    CSV_HEADER,
    DiscretizedEvents,
    EventDataError,
    EventSet,
    build_snapshot,
    discretize,
    discretize_by_width,
    discretize_on_grid,
    induce_partition,
    read_events_csv,
)
from .metrics import ccami, gap_ratio_alpha, jsd_edges
from .optimize import (
    BinningResult,
    baseline_uniform_count,
    baseline_uniform_duration,
    solve_dp,
    solve_greedy,
)
from .synth import SynthParams, generate_synthetic

FORMAT_VERSION = 1
AUTO_T_CAP = 5000

DEFAULT_SWEEP_N = (200, 500, 1000)
DEFAULT_SWEEP_T = (50, 500)
DEFAULT_SWEEP_K = (2, 5, 10)
DEFAULT_SWEEP_GAMMA = (0.001, 0.01, 0.1, 1.0)


@dataclass(frozen=True)
class RunConfig:
    """Resolved options of one CLI invocation."""

    command: str
    input_path: str | None
    output_path: str
    T: int | str = "auto"
    delta_t: float | None = None
    method: str = "exact"
    K: int | None = None
    seed: int = 0
    baselines: bool = False


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; data problems exit 2 (handled in main)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _discretize_for_config(ev: EventSet, cfg: RunConfig) -> DiscretizedEvents:
    if cfg.delta_t is not None:
        return discretize_by_width(ev, cfg.delta_t)
    T = min(ev.N, AUTO_T_CAP) if cfg.T == "auto" else int(cfg.T)
    return discretize(ev, T)


def _result_entry(d: DiscretizedEvents, res: BinningResult) -> dict:
    canon = res.binning_canonical
    starts = canon.starts()
    boundaries = []
    clusters = []
    src_labels = d.base.source_labels
    dst_labels = d.base.dest_labels
    for k, w in enumerate(canon.widths):
        a = starts[k]
        boundaries.append(
            {
                "t_min": d.origin + a * d.delta_t,
                "t_max": d.origin + (a + w) * d.delta_t,
            }
        )
        snap = build_snapshot(d, canon, k)
        edges = [
            [src_labels[s], dst_labels[t], int(wt)]
            for (s, t), wt in sorted(snap.edges.items())
        ]
        clusters.append({"m_k": int(snap.m_k), "tau_k": int(w), "edges": edges})
    return {
        "method": res.method,
        "K": res.K,
        "tau": list(canon.widths),
        "boundaries": boundaries,
        "clusters": clusters,
        "dl": {
            "L0": res.dl.L0_naive,
            "L1": res.dl.L1,
            "L2": res.dl.L2,
            "L3": res.dl.L3,
            "total": res.dl.total,
            "decoupled": res.dl.decoupled_total,
        },
        "eta": res.eta,
        "runtime_seconds": res.runtime_seconds,
    }


def _write_series_csv(path: Path, d: DiscretizedEvents, results: list[BinningResult]) -> None:
    start_sets = {res.method: set(res.binning_canonical.starts()) for res in results}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["step", "t_min", "t_max", "events"]
            + [f"{res.method}_boundary" for res in results]
        )
        for t in range(d.T):
            writer.writerow(
                [
                    t,
                    d.origin + t * d.delta_t,
                    d.origin + (t + 1) * d.delta_t,
                    int(d.events_in_step[t]),
                ]
                + [int(t in start_sets[res.method]) for res in results]
            )


def cmd_bin(cfg: RunConfig) -> Path:
    """Run the selected optimizers (and optionally the naive baselines) on an
    events CSV; write a JSON result document plus a plot-series CSV."""
    ev = read_events_csv(cfg.input_path)
    d = _discretize_for_config(ev, cfg)
    results: list[BinningResult] = []
    if cfg.method in ("exact", "both"):
        results.append(solve_dp(d))
    if cfg.method in ("greedy", "both"):
        results.append(solve_greedy(d))
    if cfg.baselines:
        K = cfg.K if cfg.K is not None else results[0].K
        for fn in (baseline_uniform_duration, baseline_uniform_count):
            try:
                results.append(fn(d, K))
            except ValueError as exc:
                print(f"warning: skipping {fn.__name__} at K={K}: {exc}", file=sys.stderr)
    doc = {
        "format_version": FORMAT_VERSION,
        "N": ev.N,
        "S": ev.S,
        "D": ev.D,
        "T": d.T,
        "delta_t": d.delta_t,
        "origin": d.origin,
        "results": [_result_entry(d, res) for res in results],
    }
    out = Path(cfg.output_path)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    _write_series_csv(out.with_suffix(".series.csv"), d, results)
    return out


def cmd_synth(cfg: RunConfig, params: SynthParams) -> Path:
    """Generate a synthetic dataset; write the events CSV and a sidecar JSON
    with the planted binning."""
    res = generate_synthetic(params)
    ev = res.events
    out = Path(cfg.output_path)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for s, t, tm in zip(ev.sources.tolist(), ev.dests.tolist(), ev.times.tolist()):
            writer.writerow([ev.source_labels[s], ev.dest_labels[t], repr(tm)])
    planted = {
        "format_version": FORMAT_VERSION,
        "params": {
            "N": params.N,
            "T": params.T,
            "K": params.K,
            "S": params.S,
            "D": params.D,
            "gamma": params.gamma,
            "seed": params.seed,
        },
        "grid": {"origin": 0.0, "delta_t": 1.0, "T": params.T},
        "tau": list(res.binning.widths),
        "m": [int(x) for x in res.partition.sizes],
    }
    with open(out.with_suffix(".planted.json"), "w", encoding="utf-8") as fh:
        json.dump(planted, fh, indent=2)
        fh.write("\n")
    return out


def _sweep_task(task: tuple) -> list[tuple]:
    N, T, K, gamma, rep, S, D, seed, methods = task
    res = generate_synthetic(SynthParams(N=N, T=T, K=K, S=S, D=D, gamma=gamma, seed=seed))
    d = res.discretized
    rows = []
    for method in methods:
        solver = solve_dp if method == "exact_dp" else solve_greedy
        fit = solver(d)
        acc = ccami(fit.partition, res.partition, rng=np.random.default_rng([seed, 1]))
        rows.append((N, T, K, gamma, rep, method, fit.eta, acc, fit.runtime_seconds))
    return rows


def cmd_sweep(
    cfg: RunConfig,
    grid_n,
    grid_t,
    grid_k,
    grid_gamma,
    S: int,
    D: int,
    reps: int,
    jobs: int,
) -> Path:
    """Reconstruction sweep over a parameter grid; one CSV row per
    (grid point, rep, method). Replicates run in a process pool; rows are
    sorted before writing so the output is deterministic."""
    methods = {
        "exact": ("exact_dp",),
        "greedy": ("greedy",),
        "both": ("exact_dp", "greedy"),
    }[cfg.method]
    combos = [
        (N, T, K, gamma, rep)
        for N in grid_n
        for T in grid_t
        for K in grid_k
        for gamma in grid_gamma
        for rep in range(reps)
    ]
    seeds = np.random.default_rng(cfg.seed).integers(2**63, size=len(combos))
    tasks = [
        (N, T, K, gamma, rep, S, D, int(seed), methods)
        for (N, T, K, gamma, rep), seed in zip(combos, seeds)
    ]
    rows: list[tuple] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(_sweep_task, tasks):
                rows.extend(chunk)
    else:
        for task in tasks:
            rows.extend(_sweep_task(task))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4], r[5]))
    out = Path(cfg.output_path)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["N", "T", "K", "gamma", "rep", "method", "eta", "ccami", "runtime_seconds"]
        )
        writer.writerows(rows)
    return out


def _load_result_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise EventDataError(f"{path}: not a valid result file: {exc}") from None
    if doc.get("format_version") != FORMAT_VERSION:
        raise EventDataError(f"{path}: unsupported format_version")
    return doc


def cmd_metrics(cfg: RunConfig, result_paths: list[str], samples: int = 100) -> Path:
    """Evaluate stored binning results against their dataset: per-result eta
    (stored and re-derived), gap ratio and edge divergence, plus the CCAMI
    and description-length-gap matrices over all stored partitions."""
    docs = [(p, _load_result_file(p)) for p in result_paths]
    ref = docs[0][1]
    for p, doc in docs[1:]:
        for key in ("N", "S", "D", "T", "delta_t", "origin"):
            if doc[key] != ref[key]:
                raise EventDataError(
                    f"{p}: {key}={doc[key]} does not match {docs[0][0]} ({ref[key]})"
                )
    ev = read_events_csv(cfg.input_path)
    if ev.N != ref["N"] or ev.S != ref["S"] or ev.D != ref["D"]:
        raise EventDataError(
            f"{cfg.input_path}: dataset shape does not match the result files"
        )
    d = discretize_on_grid(ev, ref["T"], ref["origin"], ref["delta_t"])
    ref_dl = total_dl_exact(d, Binning((d.T,))).decoupled_total

    entries = []
    partitions = []
    decoupled = []
    for path, doc in docs:
        for res in doc["results"]:
            binning = Binning(tuple(res["tau"]))
            part = induce_partition(d, binning)
            snaps = [build_snapshot(d, binning, k) for k in range(binning.K)]
            entries.append(
                {
                    "file": str(path),
                    "method": res["method"],
                    "K": res["K"],
                    "eta": res["eta"],
                    "eta_recomputed": res["dl"]["decoupled"] / ref_dl,
                    "alpha": gap_ratio_alpha(ev, part),
                    "jsd_edges": jsd_edges(snaps),
                }
            )
            partitions.append(part)
            decoupled.append(res["dl"]["decoupled"])

    n = len(entries)
    cc = [[1.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            val = ccami(
                partitions[i],
                partitions[j],
                samples=samples,
                rng=np.random.default_rng([cfg.seed, i, j]),
            )
            cc[i][j] = cc[j][i] = val
    gaps = [[decoupled[i] - decoupled[j] for j in range(n)] for i in range(n)]

    out = Path(cfg.output_path)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "format_version": FORMAT_VERSION,
                "results": entries,
                "ccami_matrix": cc,
                "dl_gap_bits": gaps,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    return out


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperbin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_bin = sub.add_parser("bin", help="infer binnings from an events CSV")
    p_bin.add_argument("--input", required=True)
    p_bin.add_argument("--output", required=True)
    p_bin.add_argument("--T", default="auto", help='timestep count or "auto" (min(N, 5000))')
    p_bin.add_argument("--delta-t", type=float, default=None, help="timestep width (overrides --T)")
    p_bin.add_argument("--method", choices=["exact", "greedy", "both"], default="exact")
    p_bin.add_argument("--K", type=int, default=None, help="cluster count for the baselines")
    p_bin.add_argument("--seed", type=int, default=0)
    p_bin.add_argument("--baselines", action="store_true")

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--output", required=True)
    p_synth.add_argument("--N", type=int, required=True)
    p_synth.add_argument("--T", type=int, required=True)
    p_synth.add_argument("--K", type=int, required=True)
    p_synth.add_argument("--S", type=int, default=5)
    p_synth.add_argument("--D", type=int, default=5)
    p_synth.add_argument("--gamma", type=float, required=True)
    p_synth.add_argument("--seed", type=int, default=0)

    p_sweep = sub.add_parser("sweep", help="run a reconstruction sweep grid")
    p_sweep.add_argument("--output", required=True)
    p_sweep.add_argument("--N", type=_int_list, default=list(DEFAULT_SWEEP_N))
    p_sweep.add_argument("--T", type=_int_list, default=list(DEFAULT_SWEEP_T))
    p_sweep.add_argument("--K", type=_int_list, default=list(DEFAULT_SWEEP_K))
    p_sweep.add_argument("--gamma", type=_float_list, default=list(DEFAULT_SWEEP_GAMMA))
    p_sweep.add_argument("--S", type=int, default=5)
    p_sweep.add_argument("--D", type=int, default=5)
    p_sweep.add_argument("--reps", type=int, default=30)
    p_sweep.add_argument("--method", choices=["exact", "greedy", "both"], default="both")
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--jobs", type=int, default=min(8, os.cpu_count() or 1))

    p_metrics = sub.add_parser("metrics", help="evaluate stored binning results")
    p_metrics.add_argument("results", nargs="+", help="binning result JSON files")
    p_metrics.add_argument("--input", required=True, help="the events CSV the results refer to")
    p_metrics.add_argument("--output", required=True)
    p_metrics.add_argument("--samples", type=int, default=100)
    p_metrics.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bin":
            T = args.T if args.T == "auto" else int(args.T)
            cfg = RunConfig(
                command="bin",
                input_path=args.input,
                output_path=args.output,
                T=T,
                delta_t=args.delta_t,
                method=args.method,
                K=args.K,
                seed=args.seed,
                baselines=args.baselines,
            )
            cmd_bin(cfg)
        elif args.command == "synth":
            cfg = RunConfig(command="synth", input_path=None, output_path=args.output, seed=args.seed)
            cmd_synth(
                cfg,
                SynthParams(
                    N=args.N, T=args.T, K=args.K, S=args.S, D=args.D,
                    gamma=args.gamma, seed=args.seed,
                ),
            )
        elif args.command == "sweep":
            cfg = RunConfig(
                command="sweep", input_path=None, output_path=args.output,
                method=args.method, seed=args.seed,
            )
            cmd_sweep(
                cfg, args.N, args.T, args.K, args.gamma,
                S=args.S, D=args.D, reps=args.reps, jobs=args.jobs,
            )
        elif args.command == "metrics":
            cfg = RunConfig(
                command="metrics", input_path=args.input, output_path=args.output,
                seed=args.seed,
            )
            cmd_metrics(cfg, args.results, samples=args.samples)
    except (ValueError, OSError) as exc:
        print(f"hyperbin: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end: run configured tasks, validate setups.

Exit codes: 0 success, 1 model-level failure (admissibility, domain,
measurement errors), 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import _kernels
from .config import (
    build_curve,
    build_foliation,
    build_grid_cfg,
    build_signal,
    lattice_nodes,
    load_config,
)
from .errors import ConfigError, HysteresisError
from .foliation import validate_foliation
from .identify import identify_weight, recover_level_points, validate_transversal
from .io import format_cell, write_csv
from .plane import apply_grid, reduce_history, save_grid_csv
from .signal import k_signals
from .svgplot import line_plot, plane_plot
from .variation import minimality_probe, variation_report


def _matrix_csv(path, row_nodes, col_nodes, mat, corner: str) -> None:
    """Matrix with axis header row/column, first cell naming the axes."""
    header = [corner] + [format_cell(v) for v in col_nodes]
    rows = [[row_nodes[i]] + list(mat[i]) for i in range(len(row_nodes))]
    write_csv(path, header, rows)


def _out_path(out_dir: str, name: str) -> str:
    return os.path.join(out_dir, name)


def _task_drive(cfg, out_dir: str, plots: bool) -> int:
    f = build_foliation(cfg)
    u = build_signal(cfg)
    grid = build_grid_cfg(cfg, f)
    semantics = cfg.get("semantics", "threshold")
    out = apply_grid(grid, u, semantics=semantics)
    u.to_csv(_out_path(out_dir, "signal.csv"))
    write_csv(_out_path(out_dir, "trace.csv"), ["t", "H"],
              np.column_stack([out.t, out.H]))
    save_grid_csv(_out_path(out_dir, "grid_final.csv"), grid, out.final_state)
    write_csv(_out_path(out_dir, "events.csv"), ["time", "cell", "value"],
              out.event_table())
    if plots:
        line_plot(_out_path(out_dir, "trace.svg"),
                  [(out.t, out.H, "H(t)")],
                  "ensemble output", "t", "H")
        plane_plot(_out_path(out_dir, "input.svg"),
                   [(u.xy, "input path")], "input signal")
    print(f"cells: {grid.n_cells}  events: {out.n_events}  "
          f"H(start)={float(out.H[0])!r}  H(end)={float(out.H[-1])!r}")
    return 0


def _task_variation(cfg, out_dir: str, plots: bool, seed: int) -> int:
    from .foliation import ParamPair

    f = build_foliation(cfg)
    u = build_signal(cfg)
    relay = cfg["relay"]
    pair = ParamPair(float(relay["c0"]), float(relay["c1"]))
    xi = int(relay.get("initial", 0))
    var_cfg = cfg.get("variation", {})
    rep = variation_report(f, pair, u, xi=xi,
                           semantics=cfg.get("semantics", "exit"),
                           omega_grid_points=var_cfg.get("omega_grid", 1000))
    text = rep.to_text()
    if "probe" in var_cfg:
        probe = minimality_probe(f, pair, u, xi=xi, seed=seed,
                                 trials=var_cfg["probe"].get("trials", 64),
                                 max_flips=var_cfg["probe"].get("max_flips", 6))
        text += (f"\nprobe_minimal: {probe.is_minimal}"
                 f"\nprobe_candidates: {probe.n_candidates}"
                 f"\nprobe_best_variation: {probe.best_candidate_variation}")
    from .io import atomic_write_text

    atomic_write_text(_out_path(out_dir, "variation.txt"), text + "\n")
    write_csv(
        _out_path(out_dir, "variation.csv"),
        ["switch_count", "input_variation", "curve_gap", "omega", "t_span",
         "rate_bound", "amplitude_bound", "rate_bound_ok", "amplitude_bound_ok"],
        [[rep.switch_count, rep.input_variation, rep.curve_gap, rep.omega,
          rep.t_span, rep.rate_bound, rep.amplitude_bound,
          int(rep.rate_bound_ok), int(rep.amplitude_bound_ok)]],
    )
    if plots:
        ks = k_signals(f, u)
        line_plot(_out_path(out_dir, "channels.svg"),
                  [(u.t, ks.k0, "k0"), (u.t, ks.k1, "k1")],
                  "channel traces", "t", "label")
    print(text)
    return 0


def _task_reduce(cfg, out_dir: str, plots: bool) -> int:
    f = build_foliation(cfg)
    u = build_signal(cfg)
    red = reduce_history(f, u)
    rows = [[r.family, r.level, r.time, u.xy[r.index][0], u.xy[r.index][1]]
            for r in red.reversals]
    write_csv(_out_path(out_dir, "memory.csv"),
              ["family", "level", "time", "x1", "x2"], rows)
    red.waypoints.to_csv(_out_path(out_dir, "waypoints.csv"))
    if plots:
        plane_plot(_out_path(out_dir, "reduction.svg"),
                   [(u.xy, "input"), (red.waypoints.xy, "reduced")],
                   "memory reduction")
    print(f"surviving reversals: {len(red.reversals)}  "
          f"waypoints: {len(red.waypoints.t)}")
    return 0


def _task_identify(cfg, out_dir: str, plots: bool) -> int:
    f = build_foliation(cfg)
    grid = build_grid_cfg(cfg, f)
    ident = cfg["identify"]
    curve = build_curve(ident["curve"])
    validate_transversal(f, curve)
    s0 = lattice_nodes(ident["s0"])
    s1 = lattice_nodes(ident["s1"])
    res = identify_weight(grid, curve, s0, s1,
                          band_margin=ident.get("band_margin"))
    _matrix_csv(_out_path(out_dir, "psi.csv"), s0, s1, res.psi, "s0\\s1")
    _matrix_csv(_out_path(out_dir, "jacobian.csv"), s0, s1, res.jacobian, "s0\\s1")
    masked = np.where(res.valid, res.values, np.nan)
    _matrix_csv(_out_path(out_dir, "weight.csv"), s0, s1, masked, "s0\\s1")
    if plots:
        mid = len(s1) // 2
        line_plot(_out_path(out_dir, "weight_slice.svg"),
                  [(s0, np.where(res.valid[:, mid], res.values[:, mid], np.nan),
                    f"W(s0, s1={s1[mid]:.3g})")],
                  "identified weight slice", "s0", "W")
    n_valid = int(res.valid.sum())
    print(f"lattice: {len(s0)}x{len(s1)}  valid nodes: {n_valid}")
    return 0


def _task_recover(cfg, out_dir: str, plots: bool) -> int:
    f = build_foliation(cfg)
    grid = build_grid_cfg(cfg, f)
    rec = cfg["recover"]
    curves = [build_curve(c) for c in rec["curves"]]
    for c in curves:
        validate_transversal(f, c)
    clouds = recover_level_points(
        grid, curves, float(rec["target"]), float(rec["s_ref"]),
        tuple(rec["s_span"]), float(rec["scan_step"]), float(rec["fd_step"]),
        tol=float(rec.get("tol", 1e-3)), family=int(rec.get("family", 0)))
    rows = [[r.s_root, r.curve_index, r.point[0], r.point[1]]
            for r in clouds.records]
    write_csv(_out_path(out_dir, "clouds.csv"),
              ["s_root", "curve", "x1", "x2"], rows)
    report = [f"recovered points: {len(clouds.records)}",
              f"spread: {clouds.spread()!r}"]
    for idx, why in clouds.skipped:
        report.append(f"skipped curve {idx}: {why}")
    from .io import atomic_write_text

    atomic_write_text(_out_path(out_dir, "recover.txt"), "\n".join(report) + "\n")
    if plots and clouds.records:
        plane_plot(_out_path(out_dir, "clouds.svg"),
                   [(clouds.merged(), "recovered")] +
                   [(c.vertices, None) for c in curves],
                   "recovered level points")
    print("\n".join(report))
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    plots = cfg.get("output", {}).get("plots", True)
    if args.threads is not None and _kernels.HAVE_NUMBA:
        import numba

        numba.set_num_threads(max(1, args.threads))
    task = cfg["task"]
    if task == "drive":
        return _task_drive(cfg, out_dir, plots)
    if task == "variation":
        return _task_variation(cfg, out_dir, plots, seed)
    if task == "reduce":
        return _task_reduce(cfg, out_dir, plots)
    if task == "identify":
        return _task_identify(cfg, out_dir, plots)
    return _task_recover(cfg, out_dir, plots)


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    f = build_foliation(cfg)
    report = validate_foliation(f, seed=args.seed if args.seed is not None
                                else cfg.get("seed", 0))
    print(report.to_text())
    return 0 if report.passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hyst2d",
        description="Hysteresis operators with two-dimensional inputs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the task described by a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (default: current)")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--threads", type=int,
                       help="compute threads (effective with numba only)")
    p_run.set_defaults(func=_cmd_run)
    p_val = sub.add_parser(
        "validate", help="check a config's foliation against the "
        "structural conditions")
    p_val.add_argument("config")
    p_val.add_argument("--seed", type=int, help="override the config seed")
    p_val.set_defaults(func=_cmd_validate)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HysteresisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

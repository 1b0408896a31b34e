"""Command line: ``gyrosim run | scan | husimi | fit``."""
from __future__ import annotations

import argparse
import sys

from gyrosim.harness import ExperimentConfig, render_husimi, run_single, scan
from gyrosim.observables import ObservableSeries, fit_decay

# CLI flag -> ExperimentConfig field
_FLAGS = [
    ("--n-q", "n_q", "register qubits"),
    ("--target", "target", "searched basis state"),
    ("--iterations", "iterations", "Grover iterations (default 3 t_G)"),
    ("--epsilon", "epsilons", "imperfection strength(s), comma separated"),
    ("--mode", "modes", "ideal,static,fluctuating,gate_angle,gyqec (comma separated)"),
    ("--l-g", "l_g", "algorithm gates between relabelings, comma separated"),
    ("--swaps-per-event", "swaps_per_event", "swaps per relabeling (default n_tot // 2)"),
    ("--realizations", "realizations", "disorder realizations per cell"),
    ("--seed", "base_seed", "base seed for all derived streams"),
    ("--out", "output_dir", "output directory"),
    ("--topology", "topology", "coupling graph: ring, chain or all"),
    ("--slice-after-swaps", "slice_after_swaps", "also perturb GYQEC swaps (true/false)"),
    ("--n-theta", "n_theta", "Husimi phase cells"),
    ("--n-x", "n_x", "Husimi position cells"),
    ("--sigma", "sigma", "Husimi smoothing width"),
    ("--fit-window", "fit_window", "decay fit window lo,hi (default t_G,5t_G)"),
    ("--workers", "workers", "worker processes"),
]


def _add_config_flags(p):
    p.add_argument("--config", help="key=value file; flags override it")
    for flag, dest, helptext in _FLAGS:
        p.add_argument(flag, dest=dest, default=None, help=helptext)


def _config(args) -> ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = ExperimentConfig.from_text(fh.read())
        values = {k: v for k, v in vars(base).items()}
    for _, dest, _ in _FLAGS:
        v = getattr(args, dest)
        if v is not None:
            values[dest] = v
    return ExperimentConfig.from_mapping(values).resolved()


def _cmd_run(args):
    cfg = _config(args)
    sys.stdout.write(cfg.header())
    results = run_single(cfg)
    if cfg.output_dir is None:
        for label, series in results.items():
            sys.stdout.write(f"# series {label}\n{series.to_table()}")
    else:
        for label in results:
            print(f"# wrote series_{label}.tsv")
    return 0


def _cmd_scan(args):
    if args.base_seed is None:
        raise ValueError("scan requires --seed")
    cfg = _config(args)
    sys.stdout.write(cfg.header())
    res = scan(cfg)
    sys.stdout.write(res.to_table())
    return 0


def _cmd_husimi(args):
    cfg = _config(args)
    sys.stdout.write(cfg.header())
    t_star = None if args.t_star is None else int(args.t_star)
    grids = render_husimi(cfg, t_star)
    print("label\tt\ttarget_row_mass")
    for label, (grid, t) in grids.items():
        print(f"{label}\t{t}\t{grid.row_mass_fraction(cfg.target)!r}")
    return 0


def _cmd_fit(args):
    with open(args.input, encoding="utf-8") as fh:
        series = ObservableSeries.from_table(fh.read())
    window = None
    if args.window:
        lo, hi = (float(x) for x in args.window.split(","))
        window = (lo, hi)
    fit = fit_decay(series, args.field, window)
    print("field\tGamma\tr_squared\tt_lo\tt_hi")
    print(f"{args.field}\t{fit.Gamma!r}\t{fit.r_squared!r}\t{fit.window[0]:g}\t{fit.window[1]:g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gyrosim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="one realization per configured mode")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("scan", help="disorder-averaged epsilon x l_g scan")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_scan)
    p = sub.add_parser("husimi", help="Husimi grids and PGM images")
    _add_config_flags(p)
    p.add_argument("--t-star", default=None, help="snapshot iteration (default: each run's w_G maximum)")
    p.set_defaults(func=_cmd_husimi)
    p = sub.add_parser("fit", help="exponential decay fit of a series table")
    p.add_argument("input", help="series table written by run or scan")
    p.add_argument("--field", default="w_4", choices=("w_4", "fidelity"))
    p.add_argument("--window", default=None, help="lo,hi iterations")
    p.set_defaults(func=_cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"gyrosim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

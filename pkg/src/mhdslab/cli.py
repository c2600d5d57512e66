"""Command-line entry point.

Subcommands: run (single trajectory), decay (decay-rate campaign), sweep
(vanishing-viscosity sweep), verify (inequality ensembles), oracle (FD
cross-check).  Exit codes: 0 all asserted checks pass, 1 check failure,
2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import grid as gridmod
from .harness import ExperimentConfig, emit_report, run_decay, run_epsilon_sweep, run_single

USAGE_ERROR = 2
CHECK_FAILURE = 1


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        raise SystemExit(USAGE_ERROR)
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _finish(record, out_dir, verbose=True) -> int:
    paths = emit_report(record, out_dir)
    failed = [name for name, ok in record.flags.items() if not ok]
    if verbose:
        for name, ok in sorted(record.flags.items()):
            print(f"{'PASS' if ok else 'FAIL'} {name}")
        for name, fit in sorted(record.fits.items()):
            print(f"fit {name}: {fit}")
        print(f"wrote {paths['csv']} and {paths['json']}")
    return CHECK_FAILURE if failed else 0


def cmd_run(args) -> int:
    cfg = _load_config(args)
    record, _ = run_single(cfg, progress=args.progress)
    return _finish(record, args.out)


def cmd_decay(args) -> int:
    cfg = _load_config(args)
    record = run_decay(cfg, progress=args.progress)
    return _finish(record, args.out)


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    record = run_epsilon_sweep(cfg, progress=args.progress)
    return _finish(record, args.out)


def cmd_verify(args) -> int:
    from .grid import make_grid
    from .oracles import ensemble_equivalence, ensemble_max_ratio

    n = args.grid
    g = make_grid(n, n, n, 2 * np.pi, 2 * np.pi, 2 * np.pi)
    seeds = [int(x) for x in args.seeds.split(",")]
    names = ["a1", "a2", "a3", "a4", "a5", "a9", "a15", "a16"]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "inequality_ratios.csv"
    lines = ["name,seed,resolution,ratio"]
    ok = True
    for name in names:
        ratios = []
        for seed in seeds:
            r = ensemble_max_ratio(name, g, args.samples, seed)
            ratios.append(r)
            lines.append(f"{name},{seed},{n},{r!r}")
            print(f"{name} seed={seed}: max ratio {r:.6g}")
        if len(ratios) >= 2:
            stable = max(ratios) <= 2.0 * min(ratios) and np.isfinite(ratios).all()
            print(f"{'PASS' if stable else 'FAIL'} {name} cross-seed stability")
            ok = ok and stable
    lo, hi = ensemble_equivalence(g, args.samples // 2, seeds[0])
    lines.append(f"b5_low,{seeds[0]},{n},{lo!r}")
    lines.append(f"b5_high,{seeds[0]},{n},{hi!r}")
    print(f"b5 equivalence ratio range: [{lo:.4g}, {hi:.4g}]")
    ok = ok and lo > 0 and np.isfinite(hi)
    csv_path.write_text("\n".join(lines) + "\n")
    print(f"wrote {csv_path}")
    return 0 if ok else CHECK_FAILURE


def cmd_oracle(args) -> int:
    from .fd_study import refinement_study

    levels = [int(x) for x in args.levels.split(",")]
    study = refinement_study(levels=levels, T=args.T, seed=args.seed or 0)
    for row in study["table"]:
        print(f"n={row['n']}: diff={row['diff']:.6e}")
    for o in study["orders"]:
        print(f"observed order: {o:.3f}")
    ok = all(o >= 1.8 for o in study["orders"])
    print(f"{'PASS' if ok else 'FAIL'} oracle convergence order >= 1.8")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        import json

        (out / "oracle.json").write_text(json.dumps(study, indent=2) + "\n")
    return 0 if ok else CHECK_FAILURE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mhdslab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="JSON config path")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--progress", action="store_true")

    sp = sub.add_parser("run", help="single trajectory with diagnostics")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("decay", help="decay-rate campaign")
    common(sp)
    sp.set_defaults(func=cmd_decay)

    sp = sub.add_parser("sweep", help="vanishing-viscosity sweep")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="inequality ensemble suites")
    common(sp, needs_config=False)
    sp.add_argument("--grid", type=int, default=32)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--seeds", default="0,1")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("oracle", help="finite-difference cross-check")
    common(sp, needs_config=False)
    sp.add_argument("--levels", default="16,32,64")
    sp.add_argument("--T", type=float, default=0.5)
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0,) else 0
    if args.threads:
        gridmod.set_workers(args.threads)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())

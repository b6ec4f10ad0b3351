"""Command-line runner: simulate an ensemble from a JSON config, write CSV/JSON.

Outputs, all relative to --out:
  trajectories.csv  t, pe_mean, pe_stderr, pe_master, pe_traj_0, ...
  jumps.csv         traj_index, jump_time   (photon-counting scheme only)
  summary.json      config echo plus run statistics

Exit codes: 0 success, 1 malformed config or arguments, 2 invariant
violation during the run, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import RunConfig
from .ensemble import run_ensemble
from .errors import ConfigError, InvariantViolationError
from .filters import SCHEME_HDPC, SCHEMES
from .integrate import solve_master

_OBS = "pe"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract reserves 2
    # for runtime invariant violations, so bad arguments exit 1 instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="photonfilter",
                description="Simulate conditional dynamics of a system driven "
                            "by a single-photon wave packet, with the field "
                            "monitored behind a beam splitter.")
    p.add_argument("--config", required=True, help="path to a JSON run config")
    p.add_argument("--out", default=".",
                   help="output directory, created if missing (default: .)")
    p.add_argument("--scheme", choices=sorted(SCHEMES),
                   help="override the measurement scheme")
    p.add_argument("--trajectories", type=int, metavar="M",
                   help="override the ensemble size")
    p.add_argument("--seed", type=int, help="override the RNG seed")
    p.add_argument("--master-only", action="store_true",
                   help="solve only the unconditional ensemble average")
    p.add_argument("--quiet", action="store_true",
                   help="suppress the run report on stdout")
    return p


def _write_csv(path, header_cols, columns):
    data = np.column_stack(columns)
    np.savetxt(path, data, fmt="%.9g", delimiter=", ",
               header=", ".join(header_cols), comments="")


def _write_jumps(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("traj_index, jump_time\n")
        for rec in records:
            for t in rec.jump_times:
                fh.write(f"{rec.trajectory_index}, {t:.9g}\n")


def _jump_stats(counts):
    if counts is None or len(counts) == 0:
        return {"total": 0, "mean": 0.0, "std": 0.0, "min": 0, "max": 0}
    return {"total": int(counts.sum()),
            "mean": float(counts.mean()),
            "std": float(counts.std(ddof=1)) if len(counts) > 1 else 0.0,
            "min": int(counts.min()),
            "max": int(counts.max())}


def _run(args):
    t_begin = time.perf_counter()
    cfg = RunConfig.load(args.config).with_overrides(
        scheme=args.scheme, n_traj=args.trajectories, seed=args.seed)
    ctx, grid = cfg.context(), cfg.grid()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    summary = {"config": cfg.to_dict(), "master_only": bool(args.master_only)}

    if args.master_only:
        master = solve_master(ctx, grid, initial=cfg.initial_state())
        peak, t_peak = master.peak(_OBS)
        _write_csv(out / "trajectories.csv", ["t", f"{_OBS}_master"],
                   [grid.times, master.curves[_OBS]])
        summary.update({
            "peak_master_pe": peak,
            "peak_master_time": t_peak,
            "expected_jumps": master.expected_jumps(cfg.r),
        })
    else:
        ens = run_ensemble(ctx, grid, cfg.n_traj, cfg.seed,
                           initial=cfg.initial_state(),
                           config_echo=cfg.to_dict())
        peak, t_peak = ens.master.peak(_OBS)
        cols = [grid.times, ens.mean_curve, ens.stderr_curve, ens.master_curve]
        names = ["t", f"{_OBS}_mean", f"{_OBS}_stderr", f"{_OBS}_master"]
        for rec in ens.records:
            names.append(f"{_OBS}_traj_{rec.trajectory_index}")
            cols.append(rec.observable_curves[_OBS])
        _write_csv(out / "trajectories.csv", names, cols)
        if cfg.scheme == SCHEME_HDPC:
            _write_jumps(out / "jumps.csv", ens.records)
        summary.update({
            "peak_master_pe": peak,
            "peak_master_time": t_peak,
            "max_mean_master_deviation": ens.max_mean_master_gap(),
            "expected_jumps": ens.master.expected_jumps(cfg.r),
            "jumps": _jump_stats(ens.jump_counts),
            "n_trajectories": ens.n_traj,
            "aborted": len(ens.aborted_indices),
            "aborted_indices": ens.aborted_indices,
        })

    summary["wall_time_s"] = time.perf_counter() - t_begin
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")

    if not args.quiet:
        print(f"wrote {out / 'trajectories.csv'}")
        print(f"peak master {_OBS} = {summary['peak_master_pe']:.6f} "
              f"at t = {summary['peak_master_time']:.4f}")
        if not args.master_only:
            print(f"{summary['n_trajectories']} trajectories, "
                  f"{summary['aborted']} aborted, "
                  f"max |mean - master| = "
                  f"{summary['max_mean_master_deviation']:.4g}")
        print(f"done in {summary['wall_time_s']:.2f}s")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except InvariantViolationError as e:
        print(f"error: invariant violation: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: I/O failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

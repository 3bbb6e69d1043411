"""Command-line entry point: ``lobewalker <subcommand> ...``.

Exit codes: 0 success, 1 bad arguments, 2 input/format error,
3 seeding failure, 4 solver failure. Failures print a single
``ERROR <kind>: <detail>`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import io as vio
from .errors import LobeWalkerError
from .metrics import cumulative_histogram, lobe_scores
from .phantom import PhantomConfig, generate
from .rw import RwConfig, segment_lobes
from .seeding import LobeId, SeedingConfig, compute_seeds
from .volume import check_same_grid


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _triple(text, cast):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated values, got {text!r}")
    try:
        return tuple(cast(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value in {text!r}") from None


def _range(text):
    lo, sep, hi = text.partition(":")
    try:
        lo, hi = float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if not sep or not lo < hi:
        raise argparse.ArgumentTypeError(f"expected lo:hi with lo < hi, got {text!r}")
    return lo, hi


def _seeding_flags(p):
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--max-erosions", type=int, default=64)
    p.add_argument("--min-seed-voxels", type=int, default=50)


def _seeding_config(args):
    try:
        return SeedingConfig(args.theta, args.max_erosions, args.min_seed_voxels)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_inputs(args):
    prob = vio.read_volume(args.prob, "scalar")
    lung = vio.read_volume(args.lung, "mask")
    check_same_grid(prob, lung)
    try:
        prob.check_probability()
    except ValueError as exc:
        raise vio.ParseError(f"{args.prob}: {exc}") from None
    return prob, lung


def _emit(key, value):
    print(f"{key}={value}")


def cmd_segment(args):
    scfg = _seeding_config(args)
    try:
        rcfg = RwConfig(args.beta, args.eps, args.tol, args.max_iter)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    prob, lung = _load_inputs(args)
    seeds = compute_seeds(prob, lung, scfg)
    result = segment_lobes(prob, lung, seeds, rcfg, keep_probabilities=bool(args.probs_out_prefix))
    vio.write_volume(result.labels, args.out)
    if args.seeds_out:
        vio.write_volume(seeds.label_volume(), args.seeds_out)
    if args.probs_out_prefix:
        for key, vol in result.probabilities.items():
            vio.write_volume(vol, f"{args.probs_out_prefix}_{LobeId(key).name}.mhd")

    _emit("erosion_iterations", seeds.erosion_iterations)
    for key, n in seeds.sizes.items():
        _emit(f"seed_voxels_{LobeId(key).name}", n)
    _emit("graph_nodes", result.n_nodes)
    _emit("unseeded_nodes", result.n_unseeded)
    for key, st in result.solver_stats.items():
        name = LobeId(key).name
        _emit(f"cg_iterations_{name}", st.iterations)
        _emit(f"cg_residual_{name}", repr(st.residual))
    for w in result.warnings:
        print(f"WARNING {w}", file=sys.stderr)
    return 0


def cmd_seeds(args):
    scfg = _seeding_config(args)
    prob, lung = _load_inputs(args)
    seeds = compute_seeds(prob, lung, scfg)
    vio.write_volume(seeds.label_volume(), args.out)
    _emit("erosion_iterations", seeds.erosion_iterations)
    for key, n in seeds.sizes.items():
        _emit(f"seed_voxels_{LobeId(key).name}", n)
    return 0


def cmd_eval(args):
    pred = vio.read_volume(args.pred, "label")
    gt = vio.read_volume(args.gt, "label")
    check_same_grid(pred, gt)
    scores = lobe_scores(pred, gt)
    vio.write_metrics_csv([(Path(args.pred).stem, scores)], args.csv)
    _emit("overall_jaccard", repr(scores.overall_jaccard))
    return 0


def cmd_phantom(args):
    try:
        cfg = PhantomConfig(
            dims=args.dims,
            spacing=args.spacing,
            ridge_sigma=args.ridge_sigma,
            gap_frac=args.gap_frac,
            noise_sigma=args.noise,
            rng_seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    case = generate(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vio.write_volume(case.prob, out / "prob.mhd")
    vio.write_volume(case.lung, out / "lung.mhd")
    vio.write_volume(case.gt, out / "gt.mhd")
    _emit("fissure_voxels", case.fissure_voxel_count)
    _emit("zeroed_voxels", case.zeroed_voxel_count)
    return 0


def cmd_window(args):
    try:
        windows = vio.parse_windows(args.windows)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    hu = vio.read_volume(args.hu, "hu")
    for i, vol in enumerate(vio.hu_window(hu, windows), start=1):
        vio.write_volume(vol, f"{args.out_prefix}_ch{i}.mhd")
    return 0


def cmd_hist(args):
    if args.bins < 1:
        raise UsageError("--bins must be >= 1")
    scores = vio.read_scores(args.scores)
    hist = cumulative_histogram(scores, args.bins, args.range)
    try:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["threshold", "fraction"])
            for t, f in zip(hist.thresholds, hist.fractions):
                w.writerow([repr(float(t)), repr(float(f))])
    except OSError as exc:
        raise vio.IoError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    return 0


def build_parser():
    parser = _Parser(prog="lobewalker", description="Random-walker lung lobe segmentation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("segment", help="seed and run the random walker")
    p.add_argument("--prob", required=True)
    p.add_argument("--lung", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--beta", type=float, default=100.0)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=5000)
    _seeding_flags(p)
    p.add_argument("--seeds-out")
    p.add_argument("--probs-out-prefix")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("seeds", help="seeding stage only")
    p.add_argument("--prob", required=True)
    p.add_argument("--lung", required=True)
    p.add_argument("--out", required=True)
    _seeding_flags(p)
    p.set_defaults(func=cmd_seeds)

    p = sub.add_parser("eval", help="score a labelling against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("phantom", help="write a synthetic test case")
    p.add_argument("--dims", type=lambda s: _triple(s, int), default=(64, 64, 64))
    p.add_argument("--spacing", type=lambda s: _triple(s, float), default=(1.0, 1.0, 1.0))
    p.add_argument("--gap-frac", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--ridge-sigma", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("window", help="three-window 8-bit rescaling of a HU volume")
    p.add_argument("--hu", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--windows", default="-1000:200,-160:240,-1000:-775")
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("hist", help="cumulative histogram of per-case scores")
    p.add_argument("--scores", required=True)
    p.add_argument("--bins", type=int, required=True)
    p.add_argument("--range", type=_range, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hist)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"ERROR UsageError: {exc}", file=sys.stderr)
        return 1
    except LobeWalkerError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"ERROR IoError: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

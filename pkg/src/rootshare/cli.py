"""Command-line harness: sweeps, reports, and the toy encoder demo.

Every subcommand writes a CSV and prints a short summary. Usage problems
(bad flags, missing config file, malformed ranges) exit non-zero.
"""

import argparse
import csv
import math
import random
import sys

from .errors import RootshareError
from .bench import LutCostModel, REPORT_SCENARIOS, ToyEncoderConfig, \
    comm_report, flood_ablation, load_weights_csv, toy_encoder_infer, \
    write_report_csv
from .config import DEFAULT_CONFIG, load_config_file
from .flood import ActivationSampler, draw_flood_mask, flood_share
from .rsqrt import STRATEGIES, closeness_sweep, run_shared_rsqrt


def _parse_gaps(text: str):
    """Accept '0..12' ranges or comma lists like '0,3,6'."""
    text = text.strip()
    if ".." in text:
        lo_s, _, hi_s = text.partition("..")
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError(f"empty gap range {text!r}")
        return list(range(lo, hi + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def _load_config(args):
    cfg = DEFAULT_CONFIG
    if getattr(args, "config", None):
        cfg = load_config_file(args.config)
    iterations = getattr(args, "iterations", None)
    strategy = getattr(args, "strategy", None)
    if iterations is not None or strategy is not None:
        cfg = cfg.with_site(iterations=iterations, strategy=strategy)
    return cfg


def _add_common(p, default_out):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--seed", type=int, default=0, help="run seed")
    p.add_argument("--out", default=default_out, help="CSV output path")


def _cmd_rsqrt_sweep(args) -> int:
    cfg = _load_config(args)
    codec = cfg.codec
    sampler = ActivationSampler(cfg.sampler_log2_mean, cfg.sampler_log2_std,
                                seed=args.seed)
    xs = sampler.sample(args.count)
    rng = random.Random(args.seed + 1)
    pairs = []
    for x in xs:
        c, s = flood_share(x, draw_flood_mask(cfg.flood, rng), codec)
        pairs.append((c.value, s.value))
    results, st_c, st_s = run_shared_rsqrt(pairs, codec, cfg.seed, cfg.newton,
                                           dealer_seed=args.seed + 2)
    errs = [abs(y * math.sqrt(x) - 1.0) for x, y in zip(xs, results)]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("index", "x", "value", "rel_err"))
        for i, (x, y, e) in enumerate(zip(xs, results, errs)):
            writer.writerow((i, repr(x), repr(y), repr(e)))
    ranked = sorted(errs)
    within = sum(1 for e in errs if e <= args.tol)
    print(f"rsqrt-sweep: {args.count} flooded samples, "
          f"n={cfg.newton.iterations}, strategy={cfg.newton.strategy}")
    print(f"  within {args.tol:g}: {within}/{args.count} "
          f"({within / args.count:.2%})")
    print(f"  median rel err {ranked[len(ranked) // 2]:.3g}, "
          f"p99 {ranked[min(len(ranked) - 1, int(0.99 * len(ranked)))]:.3g}")
    print(f"  online bytes/party: client {st_c.bytes_sent}, "
          f"server {st_s.bytes_sent}; rounds {max(st_c.rounds, st_s.rounds)}")
    print(f"  wrote {args.out}")
    return 0


def _cmd_closeness_sweep(args) -> int:
    cfg = _load_config(args)
    gaps = _parse_gaps(args.gaps)
    rows = closeness_sweep(gaps, trials=args.trials,
                           n=args.iterations if args.iterations is not None
                           else 8,
                           codec=cfg.codec, params=cfg.seed, seed=args.seed,
                           strategy=cfg.newton.strategy)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("gap", "trials", "converged", "mean_rel_err"))
        for r in rows:
            writer.writerow((r.gap, r.trials, r.converged,
                             repr(r.mean_rel_err)))
    print(f"closeness-sweep: {args.trials} trials/gap, no flooding")
    print("  gap  rate")
    for r in rows:
        print(f"  {r.gap:>3}  {r.rate:.3f}")
    print(f"  wrote {args.out}")
    return 0


def _cmd_comm_report(args) -> int:
    cfg = _load_config(args)
    lut = LutCostModel(sigma=args.sigma, entries=args.entries,
                       alpha_bits=args.alpha_bits)
    rows = comm_report(args.scenario, cfg, lut=lut, row_len=args.row_len,
                       seed=args.seed)
    write_report_csv(rows, args.out)
    print(f"comm-report: scenario={args.scenario}")
    for r in rows:
        rounds = "-" if r.rounds is None else f"{r.rounds:g}"
        muls = "-" if r.muls is None else f"{r.muls:g}"
        print(f"  {r.method:<20} {r.kind:<8} {r.online_bytes:>14.1f} B/"
              f"{r.unit:<7} rounds {rounds:>6} muls {muls:>6}")
    print(f"  wrote {args.out}")
    return 0


def _cmd_toy_infer(args) -> int:
    cfg = _load_config(args)
    enc = ToyEncoderConfig(seq_len=args.seq, model_dim=args.dim,
                           ffn_dim=args.ffn, heads=args.heads,
                           seed=args.seed, weight_file=args.weights)
    rng = random.Random(args.seed)
    x = [[0.8 + 0.4 * rng.random() for _ in range(enc.model_dim)]
         for _ in range(enc.seq_len)]
    plain = shared = info = None
    if args.mode in ("plain", "both"):
        plain = toy_encoder_infer(enc, x, mode="plain")
    if args.mode in ("shared", "both"):
        shared, info = toy_encoder_infer(enc, x, mode="shared", protocol=cfg)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if args.mode == "both":
            writer.writerow(("row", "col", "plain", "shared", "abs_diff"))
            for i in range(enc.seq_len):
                for j in range(enc.model_dim):
                    writer.writerow((i, j, repr(plain[i][j]),
                                     repr(shared[i][j]),
                                     repr(abs(plain[i][j] - shared[i][j]))))
        else:
            rows = plain if args.mode == "plain" else shared
            writer.writerow(("row", "col", "value"))
            for i in range(enc.seq_len):
                for j in range(enc.model_dim):
                    writer.writerow((i, j, repr(rows[i][j])))
    print(f"toy-infer: seq={enc.seq_len} dim={enc.model_dim} "
          f"ffn={enc.ffn_dim} heads={enc.heads} mode={args.mode}")
    if args.mode == "both":
        worst = max(abs(plain[i][j] - shared[i][j])
                    for i in range(enc.seq_len)
                    for j in range(enc.model_dim))
        print(f"  max abs plain/shared difference: {worst:.3g}")
    if info is not None:
        b = info["bytes"]
        print(f"  online bytes: matmul {b['matmul']}, "
              f"nonlinear {b['nonlinear']}, total {b['total']}; "
              f"rounds {info['rounds']}")
    print(f"  wrote {args.out}")
    return 0


def _cmd_flood_ablation(args) -> int:
    cfg = _load_config(args)
    arms = ("without-flood",) if args.no_flood else \
        ("with-flood", "without-flood")
    rows = flood_ablation(gap=args.gap, trials=args.trials, cfg=cfg,
                          seed=args.seed, arms=arms)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("arm", "gap", "trials", "converged", "rate"))
        for r in rows:
            writer.writerow((r.arm, r.gap, r.trials, r.converged,
                             f"{r.rate:.4f}"))
    print(f"flood-ablation: gap={args.gap}, {args.trials} trials/arm, "
          f"n={cfg.newton.iterations}")
    for r in rows:
        print(f"  {r.arm:<15} convergence {r.rate:.2%}")
    if len(rows) == 2:
        delta = rows[0].rate - rows[1].rate
        print(f"  flooding gains {delta * 100:.1f} percentage points")
    print(f"  wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rootshare",
        description="two-party inverse-sqrt protocol: sweeps and reports")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rsqrt-sweep",
                       help="flooded shared rsqrt over sampled activations")
    _add_common(p, "rsqrt_sweep.csv")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--iterations", type=int)
    p.add_argument("--strategy", choices=STRATEGIES)
    p.set_defaults(fn=_cmd_rsqrt_sweep)

    p = sub.add_parser("closeness-sweep",
                       help="convergence rate versus share exponent gap")
    _add_common(p, "closeness_sweep.csv")
    p.add_argument("--gaps", default="0..12",
                   help="range like 0..12 or list like 0,3,6")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--iterations", type=int)
    p.add_argument("--strategy", choices=STRATEGIES)
    p.set_defaults(fn=_cmd_closeness_sweep)

    p = sub.add_parser("comm-report",
                       help="counted bytes versus modeled baselines")
    _add_common(p, "comm_report.csv")
    p.add_argument("--scenario", choices=REPORT_SCENARIOS,
                   default="activation")
    p.add_argument("--sigma", type=int, default=16)
    p.add_argument("--entries", type=int, default=1 << 16)
    p.add_argument("--alpha-bits", type=int, default=32)
    p.add_argument("--row-len", type=int, default=8)
    p.add_argument("--iterations", type=int)
    p.add_argument("--strategy", choices=STRATEGIES)
    p.set_defaults(fn=_cmd_comm_report)

    p = sub.add_parser("toy-infer", help="one-block encoder demo")
    _add_common(p, "toy_infer.csv")
    p.add_argument("--seq", type=int, default=8)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--ffn", type=int, default=32)
    p.add_argument("--heads", type=int, default=1)
    p.add_argument("--mode", choices=("plain", "shared", "both"),
                   default="both")
    p.add_argument("--weights", help="weight CSV (name,i,j,value)")
    p.add_argument("--iterations", type=int)
    p.add_argument("--strategy", choices=STRATEGIES)
    p.set_defaults(fn=_cmd_toy_infer)

    p = sub.add_parser("flood-ablation",
                       help="convergence with and without flooding")
    _add_common(p, "flood_ablation.csv")
    p.add_argument("--gap", type=int, default=6)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--no-flood", action="store_true",
                   help="run only the unflooded arm")
    p.add_argument("--iterations", type=int)
    p.add_argument("--strategy", choices=STRATEGIES)
    p.set_defaults(fn=_cmd_flood_ablation)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (RootshareError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

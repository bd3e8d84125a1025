"""Command-line interface: ``mg-selseg {segment,lfa,bench,tune}``.

Exit status is 0 on success, 2 for usage errors and invalid parameters, and
1 for runtime failures (unreadable files, numerical breakdown).
The environment variable ``MG_SELSEG_THREADS`` is reserved; the solver is
sequential and ignores it.
"""
import argparse
import sys
import time

import numpy as np

from . import io, synthetic
from .errors import DimensionError, ParameterError, SelSegError
from .grid import largest_crop
from .lfa import FrequencyGrid, rate_report
from .model import LevelProblem, MarkerSet, ModelKind, ModelParams, distance_map, edge_detector, initial_phi
from .model import polygon_area, region_means
from .multigrid import CycleConfig, segment, tune_smoothing
from .smoothers import SmootherKind, detect_jump_set

PARAM_FLAGS = ("mu", "lambda1", "lambda2", "nu", "theta", "beta", "sigma", "eps_heaviside", "eps_grad")


class UsageError(Exception):
    pass


def _sizes(text):
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not sizes or min(sizes) < 2:
        raise argparse.ArgumentTypeError("sizes must be integers >= 2")
    return sizes


def _add_input(p):
    g = p.add_argument_group("input")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", help="P2/P5 greymap")
    src.add_argument("--synthetic", choices=("disk", "blobs"), help="built-in test image instead of --image")
    g.add_argument("--markers", help="marker file, one 'x y' pair per line (built-in markers with --synthetic)")
    g.add_argument("--size", type=int, default=128, help="synthetic image size (default 128)")
    g.add_argument("--noise", type=float, default=0.0, help="Gaussian noise level for --synthetic blobs")
    g.add_argument("--crop", action="store_true", help="crop the image to the largest size the grid hierarchy accepts")


def _add_model(p):
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=[k.value for k in ModelKind], default=ModelKind.RADA_CHEN.value)
    g.add_argument(
        "--preset", choices=("default", "synthetic"), default="default",
        help="base weights: library defaults or the tuned synthetic benchmark set; flags below override",
    )
    for name in PARAM_FLAGS:
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=float)


def _add_cycle(p, smoother="hybrid2"):
    g = p.add_argument_group("multigrid")
    g.add_argument("--smoother", choices=[k.value for k in SmootherKind], default=smoother)
    g.add_argument("--gamma", type=int, default=1)
    g.add_argument("--nu1", type=int, help="pre-smoothing steps (default per smoother)")
    g.add_argument("--nu2", type=int, help="post-smoothing steps (default per smoother)")
    g.add_argument("--coarse-iters", type=int, default=100)
    g.add_argument("--eta", type=float, default=1e-4)
    g.add_argument("--max-cycles", type=int, default=50)
    g.add_argument("--sigma-jump", type=float, default=1.5, help="jump-set ratio threshold")
    g.add_argument("--coarsest", type=int, default=32)
    g.add_argument("--phi-bound", type=float, default=1.0, help="clip level set to [-b, b]; 0 disables")


def build_parser():
    ap = argparse.ArgumentParser(prog="mg-selseg", description="Multigrid selective segmentation.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment one image")
    _add_input(p)
    _add_model(p)
    _add_cycle(p)
    p.add_argument("--mask", default="mask.pgm", help="output mask (P5, 0/255)")
    p.add_argument("--overlay", help="optional overlay PGM with the zero level set in white")
    p.add_argument("--report", help="optional report file")

    p = sub.add_parser("lfa", help="local Fourier analysis of one smoother")
    _add_input(p)
    _add_model(p)
    p.add_argument("--smoother", choices=[k.value for k in SmootherKind], default="gsline1")
    p.add_argument("--phi", help="level set as a .npy array (default: the initial level set)")
    p.add_argument("--sigma-jump", type=float, default=1.5)
    p.add_argument("--threshold", type=float, default=0.6, help="rate map marks pixels above this")
    p.add_argument("--q", type=int, default=256, help="frequency samples per axis")
    p.add_argument("--map", default="rates.pgm", help="binary rate map output")
    p.add_argument("--report", help="optional report file")

    p = sub.add_parser("bench", help="timing across image sizes")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--image")
    src.add_argument("--synthetic", choices=("disk", "blobs"), default="blobs")
    p.add_argument("--markers")
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--sizes", type=_sizes, default=[128, 256, 512])
    _add_model(p)
    _add_cycle(p)

    p = sub.add_parser("tune", help="cycles versus smoothing steps")
    _add_input(p)
    _add_model(p)
    _add_cycle(p)
    p.add_argument("--nus", default="1,2,3,4,5,6", help="comma-separated nu1 = nu2 values")
    return ap


def _params(args):
    base = synthetic.benchmark_params() if args.preset == "synthetic" else ModelParams()
    kw = {k: getattr(base, k) for k in PARAM_FLAGS}
    kw.update({k: getattr(args, k) for k in PARAM_FLAGS if getattr(args, k) is not None})
    return ModelParams(**kw)


def _config(args):
    kind = SmootherKind(args.smoother)
    nu = synthetic.SMOOTHING_STEPS.get(kind, 3)
    cfg = CycleConfig(
        gamma=args.gamma,
        nu1=nu if args.nu1 is None else args.nu1,
        nu2=nu if args.nu2 is None else args.nu2,
        coarse_iters=args.coarse_iters,
        smoother=kind,
        eta=args.eta,
        max_cycles=args.max_cycles,
        sigma_jump=args.sigma_jump,
        coarsest=args.coarsest,
        phi_bound=args.phi_bound if args.phi_bound > 0 else None,
    )
    cfg.check_smoothing()
    return cfg


def _synthetic(kind, n, noise):
    if kind == "disk":
        z, _ = synthetic.disk(n)
        return z, synthetic.disk_markers(n)
    z, _, _ = synthetic.two_blobs(n, noise=noise)
    return z, synthetic.blob_markers(n)


def _inputs(args):
    if getattr(args, "synthetic", None) and not getattr(args, "image", None):
        z, mk = _synthetic(args.synthetic, args.size, args.noise)
        if args.markers:
            mk = io.load_markers(args.markers, z.shape)
        return z, mk
    z = io.load_image(args.image).values
    if not args.markers:
        raise UsageError("--markers is required with --image")
    if args.crop:
        n, m = largest_crop(*z.shape, getattr(args, "coarsest", 32))
        z = z[:n, :m]
    return z, io.load_markers(args.markers, z.shape)


def _print_stats(stats, out):
    out.write(f"cycles: {stats.cycles_run} ({'converged' if stats.converged else 'max_cycles reached'})\n")
    if stats.energy_per_cycle:
        out.write(f"final energy: {stats.energy_per_cycle[-1]:.6g}\n")
        out.write(f"final relative change: {stats.rel_change_per_cycle[-1]:.3e}\n")
    out.write(f"wall time: {stats.wall_time_total:.3f} s\n")


def cmd_segment(args, out):
    z, mk = _inputs(args)
    phi, mask, stats = segment(z, mk, _params(args), args.model, _config(args))
    io.write_mask(args.mask, mask)
    if args.overlay:
        io.write_overlay(args.overlay, z, phi)
    if args.report:
        io.write_report(args.report, stats=stats)
    _print_stats(stats, out)
    out.write(f"mask written to {args.mask}\n")
    return 0


def _lfa_coefficients(z, mk, phi, params, kind):
    d = distance_map(mk, params.sigma, z.shape)
    g = edge_detector(z, params.beta)
    c1, c2 = region_means(z, phi, params.eps_heaviside)
    prob = LevelProblem.from_image(z, d, g, c1, c2, params, kind, polygon_area(mk, z.shape))
    return prob.coefficients(phi)


def cmd_lfa(args, out):
    z, mk = _inputs(args)
    if args.phi:
        phi = np.load(args.phi)
        if phi.shape != z.shape:
            raise UsageError(f"--phi has shape {phi.shape}, image is {z.shape}")
    else:
        phi = initial_phi(mk, z.shape)
    if not args.sigma_jump > 1:
        raise UsageError("--sigma-jump must exceed 1")
    coeffs = _lfa_coefficients(z, mk, phi, _params(args), args.model)
    cm = detect_jump_set(coeffs, args.sigma_jump)
    rep = rate_report(coeffs, args.smoother, cm, FrequencyGrid(args.q))
    above = rep.above(args.threshold)
    io.write_mask(args.map, above)
    if args.report:
        io.write_report(args.report, lfa=rep)
    out.write(f"smoother {args.smoother}: mu_max {rep.mu_max:.4f}  mu_avg {rep.mu_avg:.4f}\n")
    out.write(f"  jump set ({cm.in_jump_set.sum()} px): mu_max {rep.mu_max_D:.4f}  mu_avg {rep.mu_avg_D:.4f}\n")
    out.write(f"  elsewhere: mu_max {rep.mu_max_notD:.4f}  mu_avg {rep.mu_avg_notD:.4f}\n")
    out.write(f"  pixels above {args.threshold:g}: {int(above.sum())} (map in {args.map})\n")
    if rep.flagged:
        out.write(f"  warning: {rep.singular_samples} singular frequency samples skipped\n")
    return 0


def _rescale_markers(mk, n0, n):
    pts = [tuple(int(round((c + 0.5) * n / n0 - 0.5)) for c in p) for p in mk.points]
    return MarkerSet(tuple(pts), (n, n))


def bench_rows(z0, mk0, sizes, params, kind, config):
    """Time `segment` on ``z0`` rescaled to each size; CPU seconds via ``process_time``."""
    n0 = z0.shape[0]
    warm = synthetic.rescale(z0, 64)
    segment(warm, _rescale_markers(mk0, n0, 64), params, kind, config)
    rows = []
    prev = None
    for n in sizes:
        z = synthetic.rescale(z0, n)
        mk = _rescale_markers(mk0, n0, n)
        t = time.process_time()
        _, _, st = segment(z, mk, params, kind, config)
        cpu = time.process_time() - t
        rows.append({"size": n, "cycles": st.cycles_run, "converged": st.converged, "cpu_seconds": cpu,
                     "ratio": None if prev is None else cpu / prev})
        prev = cpu
    return rows


def cmd_bench(args, out):
    if args.image:
        if not args.markers:
            raise UsageError("--markers is required with --image")
        z0 = io.load_image(args.image).values
        if z0.shape[0] != z0.shape[1]:
            raise UsageError("bench needs a square image")
        mk0 = io.load_markers(args.markers, z0.shape)
    else:
        z0, mk0 = _synthetic(args.synthetic, max(args.sizes), args.noise)
    rows = bench_rows(z0, mk0, args.sizes, _params(args), args.model, _config(args))
    out.write(f"{'N':>12} {'cycles':>7} {'CPU (s)':>10} {'ratio':>7}\n")
    for r in rows:
        ratio = "" if r["ratio"] is None else f"{r['ratio']:.2f}"
        flag = "" if r["converged"] else "  (not converged)"
        out.write(f"{r['size']:>5}x{r['size']:<6} {r['cycles']:>7} {r['cpu_seconds']:>10.2f} {ratio:>7}{flag}\n")
    return 0


def cmd_tune(args, out):
    z, mk = _inputs(args)
    try:
        nus = [int(s) for s in str(args.nus).split(",")]
    except ValueError:
        raise UsageError(f"--nus expects comma-separated integers, got {args.nus!r}") from None
    rows = tune_smoothing(z, mk, _params(args), args.model, _config(args), nus)
    out.write(f"{'nu':>4} {'cycles':>7}  note\n")
    for r in rows:
        cyc = "-" if r["cycles"] is None else str(r["cycles"])
        note = r["flag"] or ("" if r["converged"] else "not converged")
        out.write(f"{r['nu']:>4} {cyc:>7}  {note}\n")
    return 0


COMMANDS = {"segment": cmd_segment, "lfa": cmd_lfa, "bench": cmd_bench, "tune": cmd_tune}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, ParameterError, DimensionError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except (SelSegError, OSError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())

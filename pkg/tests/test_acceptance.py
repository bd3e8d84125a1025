"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line, which is printed when it runs
and repeated in the pytest terminal summary. Run directly with
``python tests/test_acceptance.py`` to get just those lines.
"""
import time

import numpy as np

from mg_selseg import synthetic
from mg_selseg.cli import _lfa_coefficients, bench_rows
from mg_selseg.grid import interpolate, restrict
from mg_selseg.lfa import FrequencyGrid, amp_adapted, amp_line, amplification, rate_report
from mg_selseg.model import StencilField, apply_operator, initial_phi
from mg_selseg.multigrid import CycleConfig, segment
from mg_selseg.smoothers import SmootherKind, detect_jump_set, solve_arrow4, solve_tridiagonal

import conftest
import oracles
from reference_rates import WORST_PIXELS

F512 = FrequencyGrid(512)
RC, SC = "rada-chen", "spencer-chen"


def verdict(n, title, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    conftest.ACCEPTANCE[n] = line
    print(line, flush=True)
    assert ok, line


def config_for(kind, **kw):
    nu = synthetic.SMOOTHING_STEPS[SmootherKind(kind)]
    return CycleConfig(smoother=kind, nu1=nu, nu2=nu, **kw)


def blobs256():
    z, target, _ = synthetic.two_blobs(256, noise=0.1)
    return z, target, synthetic.blob_markers(256)


def test_criterion_1_line_rates():
    t0 = time.perf_counter()
    misses = []
    for i, j, rate, A, B, C, D in WORST_PIXELS:
        got = amp_line(A, B, C, D, A + B + C + D, F512)
        if abs(got - rate) > 1e-3:
            misses.append(f"({i},{j}) {got:.4f} vs {rate:.4f}")
    dt = time.perf_counter() - t0
    ok = not misses and dt < 1.0
    detail = f"{10 - len(misses)}/10 rows within 1e-3, {dt:.2f} s"
    if misses:
        detail += "; off: " + ", ".join(misses)
    verdict(1, "line-smoother rates of the reference coefficient rows", ok, detail)


def test_criterion_2_decoupled_rows():
    rng = np.random.default_rng(2024)
    worst, bad_arg = 0.0, 0
    for A, B, C, D in rng.uniform(1e-3, 1e3, size=(1000, 4)):
        r = amplification(A, B, C, D, A + B + C + D, "AB", F512)
        worst = max(worst, abs(r.value - 1.0))
        bad_arg += r.argmax != (-np.pi, 0.0)
    verdict(2, "lag {A,B} gives rate one at (-pi, 0)", worst <= 1e-9 and bad_arg == 0,
            f"max |rate - 1| = {worst:.1e}, {bad_arg} maximizers elsewhere")


def test_criterion_3_lag_smallest():
    failures = []
    for i, j, _, A, B, C, D in WORST_PIXELS:
        vals = dict(zip("ABCD", (A, B, C, D)))
        S = A + B + C + D
        small = min("ABCD", key=lambda k: (vals[k], "ABCD".index(k)))
        one = amp_adapted(A, B, C, D, S, small, F512)
        if not one < amp_line(A, B, C, D, S, F512):
            failures.append(f"({i},{j}) not below line rate")
        for other in "ABCD".replace(small, ""):
            if amp_adapted(A, B, C, D, S, small + other, F512) < one:
                failures.append(f"({i},{j}) +{other} decreased")
    verdict(3, "lagging the smallest coefficient beats line relaxation", not failures,
            "all 10 rows" if not failures else "; ".join(failures))


def test_criterion_4_hybrid2_rate():
    z, _ = synthetic.disk(128)
    mk = synthetic.disk_markers(128)
    c = _lfa_coefficients(z, mk, initial_phi(mk, z.shape), synthetic.benchmark_params(), RC)
    cm = detect_jump_set(c, 1.5)
    line = rate_report(c, SmootherKind.GSLINE_I, cm, F512).mu_max
    hyb = rate_report(c, SmootherKind.HYBRID2, cm, F512).mu_max
    verdict(4, "hybrid 2 smooths better than line relaxation on a jump field",
            hyb < line and hyb <= 0.6, f"mu_max hybrid2 {hyb:.4f}, gsline1 {line:.4f}")


def test_criterion_5_cycle_ordering():
    z, _, mk = blobs256()
    t0 = time.perf_counter()
    cyc = {}
    for kind in ("hybrid2", "hybrid1", "gsline1"):
        _, _, st = segment(z, mk, synthetic.benchmark_params(), RC, config_for(kind))
        cyc[kind] = st.cycles_run if st.converged else 10**9
    dt = time.perf_counter() - t0
    ok = cyc["hybrid2"] <= cyc["hybrid1"] <= cyc["gsline1"] and cyc["hybrid2"] <= 6 and dt < 60
    verdict(5, "cycles hybrid2 <= hybrid1 <= gsline1", ok,
            f"{cyc['hybrid2']} / {cyc['hybrid1']} / {cyc['gsline1']} cycles, {dt:.1f} s")


def test_criterion_6_energy():
    z, _, mk = blobs256()
    problems = []
    runs = {}
    for kind in ("hybrid2", "hybrid1", "gsline1"):
        _, _, st = segment(z, mk, synthetic.benchmark_params(), RC, config_for(kind))
        e = st.energy_per_cycle
        if any(b > a * 1.005 for a, b in zip(e[1:], e[2:])):
            problems.append(f"{kind} energy rose")
    for sigma in (1.5, 3.0, 10.0):
        _, _, st = segment(z, mk, synthetic.benchmark_params(), RC, config_for("hybrid2", sigma_jump=sigma))
        runs[sigma] = st.energy_per_cycle
    for lo, hi in ((1.5, 3.0), (3.0, 10.0)):
        for a, b in zip(runs[lo], runs[hi]):
            if a > b * 1.005:
                problems.append(f"Sigma {lo} above Sigma {hi}")
                break
    verdict(6, "energies decrease and do not grow as Sigma shrinks", not problems,
            "; ".join(problems) or f"final energy {runs[1.5][-1]:.6f}")


def test_criterion_7_scaling():
    z0, _, _ = synthetic.two_blobs(512, noise=0.1)
    mk0 = synthetic.blob_markers(512)
    rows = bench_rows(z0, mk0, [128, 256, 512], synthetic.benchmark_params(), RC, config_for("hybrid2"))
    ratios = [r["ratio"] for r in rows[1:]]
    per_cycle = [
        (b["cpu_seconds"] / b["cycles"]) / (a["cpu_seconds"] / a["cycles"]) for a, b in zip(rows, rows[1:])
    ]
    ok = all(3 <= q <= 5 for q in ratios) and all(r["converged"] for r in rows)
    verdict(7, "CPU time ratio per doubling in [3, 5]", ok,
            "cycles " + "/".join(str(r["cycles"]) for r in rows)
            + ", ratios " + ", ".join(f"{q:.2f}" for q in ratios)
            + ", per-cycle ratios " + ", ".join(f"{q:.2f}" for q in per_cycle))


def test_criterion_8_dice():
    scores = {}
    z, truth = synthetic.disk(128)
    zb, tb, _ = synthetic.two_blobs(128)
    cases = {"disk": (z, truth, synthetic.disk_markers(128)), "blobs": (zb, tb, synthetic.blob_markers(128))}
    for kind in (RC, SC):
        for name, (img, gt, mk) in cases.items():
            _, mask, _ = segment(img, mk, synthetic.benchmark_params(), kind)
            scores[f"{kind} {name}"] = synthetic.dice(mask.values, gt)
    verdict(8, "Dice >= 0.95 for both models", min(scores.values()) >= 0.95,
            ", ".join(f"{k} {v:.3f}" for k, v in scores.items()))


def _dominant_tridiagonal(rng):
    n = int(rng.integers(1, 25))
    lo, up = rng.normal(size=(2, n - 1))
    dg = -(np.abs(np.r_[lo, 0]) + np.abs(np.r_[0, up]) + rng.uniform(0.1, 2, n))
    return lo, dg, up, rng.normal(size=n)


def _dominant_arrow(rng):
    M = np.zeros((4, 4))
    M[0, 1:] = rng.normal(size=3)
    M[1:, 0] = rng.normal(size=3)
    M[0, 0] = -(np.abs(M[0, 1:]).sum() + rng.uniform(0.1, 3))
    for k in range(1, 4):
        M[k, k] = -(abs(M[k, 0]) + rng.uniform(0.1, 3))
    return M, rng.normal(size=4)


def test_criterion_9_oracles():
    rng = np.random.default_rng(9)
    err = dict.fromkeys(("tridiagonal", "arrow", "restrict", "interpolate", "operator"), 0.0)
    for _ in range(1000):
        lo, dg, up, b = _dominant_tridiagonal(rng)
        x = solve_tridiagonal(lo, dg, up, b)
        err["tridiagonal"] = max(err["tridiagonal"], np.abs(x - np.linalg.solve(oracles.tridiagonal_dense(lo, dg, up), b)).max())

        M, b = _dominant_arrow(rng)
        err["arrow"] = max(err["arrow"], np.abs(solve_arrow4(M, b) - np.linalg.solve(M, b)).max())

        n, m = 2 * rng.integers(1, 7, size=2)
        f = rng.normal(size=(n, m))
        err["restrict"] = max(err["restrict"], np.abs(restrict(f) - oracles.restrict_dense(f)).max())

        n, m = rng.integers(2, 7, size=2)
        c = rng.normal(size=(n, m))
        err["interpolate"] = max(err["interpolate"], np.abs(interpolate(c) - oracles.interpolate_dense(c)).max())

        A, B, C, D = rng.uniform(0.01, 10, size=(4, n, m))
        S = A + B + C + D + rng.uniform(0, 1, size=(n, m))
        phi, src = rng.normal(size=(2, n, m))
        got = apply_operator(phi, StencilField(A, B, C, D, S), src)
        err["operator"] = max(err["operator"], np.abs(got - oracles.apply_operator_dense(phi, A, B, C, D, S, src)).max())
    verdict(9, "kernels match dense oracles on 1000 instances each", max(err.values()) <= 1e-10,
            ", ".join(f"{k} {v:.1e}" for k, v in err.items()))


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass

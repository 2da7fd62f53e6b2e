"""Exit criteria, one test each, at their stated tolerances and time budgets."""

import math
import time

import numpy as np

from phiqkd import keyrate, qmath
from phiqkd.gsd import (
    build_povm, find_ctp, find_erp, helstrom_probs, make_signal_pair, metrics,
    probs_closed, probs_operator,
)
from phiqkd.keyrate import DEFAULTS
from phiqkd.optimizer import (
    Mode, coverage, default_theta_grid, landmarks, optimize_phi, phi_bound, theta_sweep,
)
from phiqkd.simulator import (
    SimulationConfig, event_probabilities, neumark_unitary, run_protocol,
)

PI4 = make_signal_pair(math.pi / 4)


def timed(fn, repeat=5):
    """Return (result, best wall time in seconds) after one warm-up call."""
    fn()
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def close(x, ref, tol):
    return abs(x - ref) <= tol


def test_c01_idp_baseline(criterion):
    p, dt = timed(lambda: probs_closed(PI4, 0.0))
    ok = all(close(a, b, 1e-6) for a, b in zip(p.as_tuple(), (0.292893, 0.0, 0.707107)))
    criterion("C1 IDP baseline", ok and dt < 1e-3, f"{p.as_tuple()} in {dt * 1e3:.3f} ms")


def test_c02_special_points(criterion):
    def run():
        return find_ctp(PI4), find_erp(PI4)

    (ctp, erp), dt = timed(run)
    pc, pe = probs_closed(PI4, ctp), probs_closed(PI4, erp)
    ok = (
        close(ctp, 0.186997, 1e-5) and close(pc.p_s, 0.487656, 1e-5) and close(pc.p_q, 0.487656, 1e-5)
        and close(erp, 0.356915, 1e-5) and close(pe.p_e, 0.113924, 1e-5) and close(pe.p_q, 0.113924, 1e-5)
    )
    criterion(
        "C2 special points", ok and dt < 10e-3,
        f"phi_CTP={ctp:.6f} (P_s={pc.p_s:.6f}, P_q={pc.p_q:.6f}), "
        f"phi_ERP={erp:.6f} (P_e={pe.p_e:.6f}, P_q={pe.p_q:.6f}) in {dt * 1e3:.2f} ms",
    )


def test_c03_metrics_regression(criterion):
    def run():
        return {
            "MED": metrics(helstrom_probs(PI4)),
            "IDP": metrics(probs_closed(PI4, 0.0)),
            "CTP": metrics(probs_closed(PI4, find_ctp(PI4))),
            "ERP": metrics(probs_closed(PI4, find_erp(PI4))),
        }

    got, dt = timed(run)
    table = {"MED": (85.38, 100.00), "IDP": (100.00, 29.29), "CTP": (95.18, 51.23), "ERP": (87.14, 88.61)}
    misses = [
        f"{k} chi={got[k].chi:.4f} vs {v[0]}" if not close(got[k].chi, v[0], 0.02)
        else f"{k} zeta={got[k].zeta:.4f} vs {v[1]}"
        for k, v in table.items()
        if not (close(got[k].chi, v[0], 0.02) and close(got[k].zeta, v[1], 0.02))
    ]
    detail = ", ".join(f"{k}=({m.chi:.3f}, {m.zeta:.3f})" for k, m in got.items())
    if misses:
        detail += "; outside 0.02: " + "; ".join(misses)
    criterion("C3 metrics regression", not misses and dt < 10e-3, detail)


def test_c04_asymptotic_rates(criterion):
    def run():
        return [
            keyrate.asymptotic_rate(PI4, 0.050389),
            keyrate.asymptotic_rate(PI4, find_ctp(PI4)),
            keyrate.asymptotic_rate(PI4, find_erp(PI4)),
        ]

    rates, dt = timed(run)
    ok = all(close(r, e, 1e-3) for r, e in zip(rates, (0.310055, 0.226816, -0.094521)))
    criterion("C4 asymptotic rates", ok and dt < 10e-3, f"{[round(r, 6) for r in rates]} in {dt * 1e3:.2f} ms")


def test_c05_hoeffding(criterion):
    d, dt = timed(lambda: keyrate.hoeffding_delta(10**5, 1e-10))
    criterion("C5 Hoeffding delta", close(d, 0.010890, 1e-6) and dt < 1e-3, f"delta={d:.7f}")


def test_c06_finite_key(criterion):
    r, dt = timed(lambda: keyrate.finite_rate(PI4, 0.083261, DEFAULTS))
    criterion("C6 finite-key rate", close(r, 0.188063, 1e-3) and dt < 10e-3, f"R_finite={r:.6f}")


def test_c07_composable(criterion):
    def run():
        ell = keyrate.composable_key_length(PI4, 0.073953, DEFAULTS)
        return ell, ell / DEFAULTS.N, keyrate.b92_secure_rate(PI4, DEFAULTS)

    (ell, r, b92), dt = timed(run)
    imp = 100 * (r - b92) / b92
    ok = close(ell, 181958, 200) and close(r, 0.181958, 2e-4) and close(b92, 0.156862, 2e-4) and close(imp, 16, 0.5)
    criterion(
        "C7 composable", ok and dt < 10e-3,
        f"l={ell:.4f} R_secure={r:.6f} R_B92={b92:.6f} improvement={imp:.3f}%",
    )


def test_c08_optimizer(criterion):
    t0 = time.perf_counter()
    opts = {m: optimize_phi(PI4, m).phi_opt for m in Mode}
    bound = phi_bound(PI4)
    cov = coverage(PI4)
    dt = time.perf_counter() - t0
    ok = (
        close(opts[Mode.ASYMPTOTIC], 0.050389, 5e-4)
        and close(opts[Mode.FINITE], 0.083261, 5e-4)
        and close(opts[Mode.COMPOSABLE], 0.073953, 5e-4)
        and bound is not None and close(bound, 0.149123, 5e-4)
        and close(cov, 37.97, 0.2)
    )
    criterion(
        "C8 optimizer", ok and dt < 2.0,
        f"phi_opt={[round(v, 6) for v in opts.values()]} phi_bound={bound:.6f} "
        f"coverage={cov:.3f}% in {dt:.2f} s",
    )


def test_c09_theta_sweep(criterion):
    t0 = time.perf_counter()
    rows = theta_sweep(default_theta_grid(600))
    marks = landmarks(rows)
    dt = time.perf_counter() - t0
    phi_half_pi = optimize_phi(make_signal_pair(math.pi / 2), Mode.COMPOSABLE).phi_opt
    ok = (
        marks.saturation_theta is not None and close(marks.saturation_theta, 0.938015, 0.01)
        and close(marks.max_difference, 0.781095, 2e-3) and close(marks.max_difference_theta, 1.341750, 0.01)
        and close(marks.improvement_peak, 47.82, 0.5) and close(marks.improvement_peak_theta, 1.119617, 0.01)
        and close(marks.max_phi_opt, 0.274995, 2e-3)
        and phi_half_pi == 0.0
    )
    criterion(
        "C9 theta-sweep landmarks", ok and dt < 60.0,
        f"saturation={marks.saturation_theta:.6f} max_diff={marks.max_difference:.6f}@{marks.max_difference_theta:.6f} "
        f"improvement={marks.improvement_peak:.3f}%@{marks.improvement_peak_theta:.6f} "
        f"max_phi_opt={marks.max_phi_opt:.6f} phi_opt(pi/2)={phi_half_pi} in {dt:.1f} s",
    )


def test_c10_property_suite(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    worst = 0.0
    psd = True
    for _ in range(1000):
        theta = rng.uniform(1e-3, math.pi / 2)
        phi = rng.uniform() * (math.pi / 4 - theta / 2)
        sp = make_signal_pair(theta)
        povm = build_povm(sp, phi)
        psd &= all(qmath.psd_check(e) for e in povm.elements)
        closed = np.array(probs_closed(sp, phi).as_tuple())
        op = np.array(probs_operator(sp, povm).as_tuple())
        worst = max(worst, povm.completeness_residual(), abs(closed.sum() - 1), np.max(np.abs(closed - op)))
    helstrom = 0.0
    b92_gap = 0.0
    for theta in np.linspace(0.3, math.pi / 2, 50):
        sp = make_signal_pair(theta)
        top, h = probs_closed(sp, sp.phi_med), helstrom_probs(sp)
        helstrom = max(helstrom, top.p_q, abs(top.p_s - h.p_s), abs(top.p_e - h.p_e))
        b92_gap = max(b92_gap, abs(keyrate.secure_rate(sp, 0.0) - keyrate.b92_secure_rate(sp)))
    dt = time.perf_counter() - t0
    ok = psd and worst <= 1e-12 and helstrom <= 1e-12 and b92_gap <= 1e-9
    criterion(
        "C10 property suite", ok and dt < 5.0,
        f"psd={psd} max residual={worst:.2e} helstrom endpoint={helstrom:.2e} "
        f"phi=0 vs B92={b92_gap:.2e} in {dt:.2f} s",
    )


def test_c11_simulator(criterion):
    t0 = time.perf_counter()
    cfg = SimulationConfig(math.pi / 4, 0.073953, seed=2025)
    p = np.array(probs_closed(PI4, 0.073953).as_tuple())

    def consistent(summary):
        freq = np.array(summary.counts) / cfg.fk.N
        return bool(np.all(np.abs(freq - p) <= 4 * np.sqrt(p * (1 - p) / cfg.fk.N)))

    s = run_protocol(cfg)
    stats_ok = consistent(s) or consistent(run_protocol(SimulationConfig(cfg.theta, cfg.phi, seed=2026)))
    analytic = keyrate.key_length_from_counts(s.n_sifted, cfg.fk.n, s.q_worst_hat, 1.0, cfg.fk)
    key_ok = abs(s.key_length_hat - analytic) < 1
    dilation = 0.0
    rng = np.random.default_rng(11)
    for _ in range(1000):
        theta = rng.uniform(1e-3, math.pi / 2)
        sp = make_signal_pair(theta)
        phi = rng.uniform() * sp.phi_med
        povm = build_povm(sp, phi)
        u, omap = neumark_unitary(povm)
        avg = np.mean([event_probabilities(u, omap, sp, k) for k in (0, 1)], axis=0)
        dilation = max(dilation, np.max(np.abs(avg - probs_operator(sp, povm).as_tuple())))
    same = s == run_protocol(cfg, workers=2) == run_protocol(cfg, workers=4)
    dt = time.perf_counter() - t0
    ok = stats_ok and key_ok and dilation <= 1e-12 and same
    criterion(
        "C11 simulator", ok and dt < 30.0,
        f"counts={s.counts} within 4 sigma={stats_ok} key_length_hat={s.key_length_hat} "
        f"(analytic {analytic:.3f}) dilation err={dilation:.2e} deterministic={same} in {dt:.1f} s",
    )

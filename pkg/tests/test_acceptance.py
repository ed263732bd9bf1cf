"""Acceptance criteria, one test each, logged through ``record_criterion``."""
import math
import time

import numpy as np
import pytest

import oracles as O
from cqcombine import bounds as B, channels as C, combine as K, duality as D
from cqcombine import experiments as E, linalg as L, polar as P

LN2 = math.log(2)


def test_criterion_1_chain_rule(record_criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(1000):
        d1, d2 = 2 + i % 5, 2 + (i // 5) % 5
        W1 = C.random_cq_channel(d1, "half", 101, 2 * i)
        W2 = C.random_cq_channel(d2, "half", 101, 2 * i + 1)
        hm = C.channel_entropy(K.boxast(W1, W2))
        hp = C.channel_entropy(K.varoast(W1, W2))
        worst = max(worst, abs(hm + hp - C.channel_entropy(W1) - C.channel_entropy(W2)))
    dt = time.perf_counter() - t0
    record_criterion("1", worst <= 1e-7 and dt < 60, f"max residual {worst:.2e} over 1000 pairs, {dt:.1f}s")


def test_criterion_2_duality(record_criterion):
    t0 = time.perf_counter()
    rep = E.run_duality_suite(E.ExperimentConfig(command="duality", samples=200, dims=[2, 3], seed=202))
    eps = np.linspace(0.0, 1.0, 21)
    bec = max(abs(C.symmetric_capacity(D.dual_channel(C.bec_embed(e))) - e * LN2) for e in eps)
    dt = time.perf_counter() - t0
    ok = rep["max_residual"] <= 1e-7 and bec <= 1e-12 and dt < 60
    record_criterion("2", ok, f"max identity residual {rep['max_residual']:.2e}, BEC dual {bec:.2e}, {dt:.1f}s")


def test_criterion_3_concavity(record_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    form_gap = chain_fail = 0.0
    for _ in range(1000):
        n, d = int(rng.integers(2, 5)), int(rng.integers(2, 6))
        p = rng.dirichlet(np.ones(n))
        rho = [O.rand_state(rng, d, rank=int(rng.integers(1, d + 1))) for _ in range(n)]
        direct, via = B.concavity_gap_forms(p, rho)
        s, f = B.concavity_lower_sqrt(p, rho), B.concavity_lower_fid(p, rho)
        form_gap = max(form_gap, abs(direct - via))
        chain_fail = max(chain_fail, s - direct, f - s - 1e-9)
    dt = time.perf_counter() - t0
    ok = form_gap <= 1e-8 and chain_fail <= 1e-9 and dt < 60
    record_criterion("3", ok, f"form disagreement {form_gap:.2e}, worst chain excess {chain_fail:.2e}, {dt:.1f}s")


def test_criterion_4_fidelity_window(record_criterion):
    t0 = time.perf_counter()
    slack = np.inf
    for i in range(10_000):
        W = C.random_cq_channel(2 + i % 3, "half", 404, i, rank=1 + (i // 3) % (2 + i % 3))
        H = C.channel_entropy(W)
        F = L.fidelity(W.sigma0, W.sigma1)
        lo, hi = B.fidelity_window(H)
        slack = min(slack, F - lo, hi - F)
    pure = 0.0
    for a in np.linspace(0.0, math.pi / 2, 101):
        W = C.pure_channel(a)
        pure = max(pure, abs(B.fidelity_window(C.channel_entropy(W))[1] - L.fidelity(W.sigma0, W.sigma1)))
    dt = time.perf_counter() - t0
    ok = slack >= -1e-8 and pure <= 1e-8 and dt < 60
    record_criterion("4", ok, f"min window slack {slack:.2e}, pure-state edge gap {pure:.2e}, {dt:.1f}s")


def test_criterion_5_proven_bounds(record_criterion):
    t0 = time.perf_counter()
    slacks, checked = [], 0.0
    for pairing, seed in (("identical", 505), ("distinct", 506)):
        r = E.run_conjecture_sweep(E.ExperimentConfig(samples=10_000, pairing=pairing, seed=seed))
        c = r.columns
        slacks.append(float(np.min(c["exact"] - c["thm3"])))
        if pairing == "identical":
            slacks.append(float(np.min(c["exact"] - c["thm4"])))
        for k in range(0, 10_000, 500):
            checked = max(checked, abs(c["thm3"][k] - O.thm3(c["H1"][k], c["H2"][k])))
    edge = np.linspace(0.0, LN2, 51)
    on_edge = max(
        abs(B.qmgl_lower_asym(e, h) - max(e, h)) + abs(B.qmgl_lower_asym(h, e) - max(e, h))
        for e in (0.0, LN2)
        for h in edge
    )
    inner = np.linspace(1e-3, LN2 - 1e-3, 100)
    H1, H2 = np.meshgrid(inner, inner)
    interior = float(np.min(np.asarray(B.qmgl_lower_asym(H1, H2)) - np.maximum(H1, H2)))
    dt = time.perf_counter() - t0
    ok = min(slacks) >= -1e-8 and checked <= 1e-9 and on_edge <= 1e-12 and interior > 0 and dt < 180
    record_criterion(
        "5",
        ok,
        f"min slack {min(slacks):.2e}, edge gap {on_edge:.1e}, min interior gap {interior:.2e}, {dt:.1f}s",
    )


def test_criterion_6_conjectures(record_criterion):
    t0 = time.perf_counter()
    parts = []
    ok = True
    for prior, seed in (("half", 606), ("uniform", 607)):
        s = E.run_conjecture_sweep(E.ExperimentConfig(samples=50_000, prior=prior, seed=seed)).summary
        ok &= s["conjecture_violations"] == 0 and s["classical_lower_violations"] >= 1
        parts.append(f"{prior}: {s['conjecture_violations']} conj, {s['classical_lower_violations']} classical-lower")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    record_criterion("6", ok, "; ".join(parts) + f", {dt:.1f}s")


def test_criterion_7_equality_channels(record_criterion):
    worst = 0.0
    for p, q in [(0.01, 0.05), (0.05, 0.11), (0.1, 0.1), (0.02, 0.25)]:
        W1, W2 = C.bsc_embed(p), C.bsc_embed(q)
        h1, h2 = C.channel_entropy(W1), C.channel_entropy(W2)
        assert h1 + h2 <= LN2
        worst = max(worst, abs(K.minus_entropy(W1, W2) - B.conjectured_lower(h1, h2)))
    for a, b in [(0.3, 0.5), (0.4, 0.4), (0.2, 0.7), (0.1, 0.9)]:
        W1, W2 = C.pure_channel(a), C.pure_channel(b)
        h1, h2 = C.channel_entropy(W1), C.channel_entropy(W2)
        assert h1 + h2 >= LN2
        worst = max(worst, abs(K.minus_entropy(W1, W2) - B.conjectured_lower(h1, h2)))
    for e1, e2 in [(0.1, 0.7), (0.5, 0.5), (0.9, 0.3), (0.0, 1.0)]:
        W1, W2 = C.bec_embed(e1), C.bec_embed(e2)
        worst = max(
            worst,
            abs(K.minus_entropy(W1, W2) - B.conjectured_upper(C.channel_entropy(W1), C.channel_entropy(W2))),
        )
    record_criterion("7", worst <= 1e-8, f"max |slack| {worst:.2e}")


A, Bw = 0.05 * LN2, 0.95 * LN2


def test_criterion_8a_bec_theta(record_criterion):
    tr = P.polarization_trace(P.polarize_classical_levels("bec", 0.5, 16), A, Bw)
    theta = tr[-1].theta
    record_criterion("8a", theta <= 0.05, f"BEC(1/2) theta at n=16 is {theta:.5f} (target <= 0.05)")


def test_criterion_8b_martingale(record_criterion):
    tr = P.polarization_trace(P.polarize_classical_levels("bec", 0.5, 16), A, Bw)
    mu = np.array([t.mu for t in tr])
    nu = np.array([t.nu for t in tr])
    drift = float(np.max(np.abs(mu - mu[0])))
    ok = drift <= 1e-12 and bool(np.all(np.diff(nu) >= 0))
    record_criterion("8b", ok, f"mu drift {drift:.1e}, min nu increment {np.min(np.diff(nu)):.2e}")


def test_criterion_8c_exact_vs_scalar(record_criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for n in (1, 2, 3):
        for p in (0.05, 0.11, 0.3):
            worst = max(worst, np.max(np.abs(P.polarize_exact(C.bsc_embed(p), n) - P.polarize_classical("bsc", p, n))))
        for e in (0.2, 0.5, 0.8):
            worst = max(worst, np.max(np.abs(P.polarize_exact(C.bec_embed(e), n) - P.polarize_classical("bec", e, n))))
    dt = time.perf_counter() - t0
    record_criterion("8c", worst <= 1e-6 and dt < 120, f"max exact/scalar gap {worst:.2e}, {dt:.1f}s")


def test_criterion_8d_nonstationary(record_criterion):
    t0 = time.perf_counter()
    _, levels = E.polarization_levels(E.ExperimentConfig(command="polarize", channel="bec-mixed", levels=12))
    theta = np.array([t.theta for t in P.polarization_trace(levels, A, Bw)])[4:]
    dt = time.perf_counter() - t0
    ok = bool(np.all(np.diff(theta) < 0)) and dt < 120
    record_criterion("8d", ok, f"theta n=4..12: {np.round(theta, 4).tolist()}, {dt:.1f}s")


def test_criterion_9_determinism(record_criterion, tmp_path):
    runs = [
        E.ExperimentConfig(command="sweep", samples=500, dims=[2, 3], prior="uniform", seed=909),
        E.ExperimentConfig(command="curves", grid=21),
        E.ExperimentConfig(command="duality", samples=5, seed=909),
        E.ExperimentConfig(command="polarize", channel="random", levels=2, seed=909),
        E.ExperimentConfig(command="speed", channel="bsc", param=0.11, levels=5),
    ]
    same = []
    for k, cfg in enumerate(runs):
        ext = "json" if cfg.command == "duality" else "csv"
        blobs = []
        for rep in (0, 1):
            d = tmp_path / f"r{rep}"
            cfg.out_path = str(d / f"{k}.{ext}")
            E.RUNNERS[cfg.command](cfg)
            blobs.append({p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name.startswith(f"{k}")})
        same.append(blobs[0] == blobs[1])
    record_criterion("9", all(same), f"{sum(same)}/{len(same)} experiments byte-identical on rerun")

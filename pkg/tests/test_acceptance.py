"""Acceptance criteria 1-9, one PASS/FAIL line each (shown in the terminal summary)."""

import json
import time

import numpy as np

from collective_lab import cli
from collective_lab import estimation as est
from collective_lab.linalg import proj
from collective_lab.povm import (
    e7_decomposition_check,
    optimal_povm,
    outcome_probabilities,
    povm_fidelity,
    symmetric_povm,
    symmetry_kit,
    validate_povm,
)
from collective_lab.separability import (
    BIPARTITIONS,
    BISEPARABLE,
    CERTIFIED,
    INCONCLUSIVE,
    biseparable_report,
    certify_genuinely_collective,
    example_povms,
    lemma1_trace,
    schmidt_rank_one,
    singlet,
    verify_coarse_graining,
)
from collective_lab.states import haar_random_kets, icosahedron_states, make_rng, octahedron_states, three_copy
from collective_lab.walk.anchors import U9_AS_PRINTED, validate_against_anchors
from collective_lab.walk.coins import COIN_MULTIPLICITY
from collective_lab.walk.engine import encode, extract_effective_povm, run_with_detectors
from collective_lab.walk.schedule import coin_multiset, default_schedule

EXPECTED_MULTISET = {"H2": 14, "H1": 4, "H7": 4, "H3": 3, "H4": 1, "H5": 1, "H6": 1, "H8": 1, "H9": 1}


def record(log, n, ok, detail, elapsed):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}  ({elapsed:.2f} s)"
    log.append(line)
    print(line)
    return ok


def test_criterion_1_povm_construction(acceptance_log):
    t0 = time.perf_counter()
    p = optimal_povm()
    rep = validate_povm(p)
    traces = [np.trace(e).real for e in p.elements]
    decomposition = e7_decomposition_check()
    elapsed = time.perf_counter() - t0
    ok = (
        rep.passed
        and rep.completeness_residual <= 1e-10
        and min(rep.min_eig) >= -1e-10
        and all(abs(t - 2 / 3) <= 1e-12 for t in traces[:6])
        and abs(traces[6] - 4) <= 1e-12
        and decomposition <= 1e-12
        and elapsed < 1
    )
    detail = f"completeness {rep.completeness_residual:.1e}, min eig {min(rep.min_eig):.1e}, tr E7 {traces[6]:.12f}, E7 residual {decomposition:.1e}"
    assert record(acceptance_log, 1, ok, detail, elapsed)


def test_criterion_2_walk_reproduces_anchors(acceptance_log):
    t0 = time.perf_counter()
    sched, plan = default_schedule()
    report = validate_against_anchors(sched, plan)
    walk = extract_effective_povm(sched, plan)
    ideal = optimal_povm()
    elementwise = max(float(np.max(np.abs(a - b))) for a, b in zip(walk.elements, ideal.elements))
    fid = povm_fidelity(walk, ideal)
    literal = validate_against_anchors(sched, plan, anchors={9: U9_AS_PRINTED}).check(9).max_deviation
    elapsed = time.perf_counter() - t0
    worst = max(c.max_deviation for c in report.checks)
    worst_exact = max(c.exact_deviation for c in report.checks)
    ok = (
        [c.t for c in report.checks] == [1, 2, 3, 6, 8, 9]
        and report.passed
        and worst_exact <= 1e-10
        and elementwise <= 1e-10
        and fid >= 1 - 1e-9
        and elapsed < 1
    )
    detail = (
        f"anchors {sum(c.passed for c in report.checks)}/6, max deviation {worst_exact:.1e} "
        f"(phase-quotiented {worst:.1e}), POVM diff {elementwise:.1e}, fidelity {fid:.12f}; "
        f"t=9 uses the conjugated final rows (literal rows deviate by {literal:.3f})"
    )
    assert record(acceptance_log, 2, ok, detail, elapsed)


def test_criterion_3_coin_bookkeeping(acceptance_log):
    t0 = time.perf_counter()
    sched, _ = default_schedule()
    counts = dict(coin_multiset(sched))
    elapsed = time.perf_counter() - t0
    ok = counts == EXPECTED_MULTISET == COIN_MULTIPLICITY and sum(counts.values()) == 30
    detail = ", ".join(f"{k}:{v}" for k, v in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))) + f", total {sum(counts.values())}"
    assert record(acceptance_log, 3, ok, detail, elapsed)


def _expected_table():
    kets = [e.ket for e in octahedron_states()]
    table = np.zeros((6, 7))
    for i, a in enumerate(kets):
        for j, b in enumerate(kets):
            table[i, j] = (2 / 3) * abs(np.vdot(b, a)) ** 6
        table[i, 6] = 1 - table[i, :6].sum()
    return table


def test_criterion_4_probability_table(acceptance_log):
    t0 = time.perf_counter()
    ideal = optimal_povm()
    sched, plan = default_schedule()
    states = [three_copy(e.ket) for e in octahedron_states()]
    via_povm = np.array([outcome_probabilities(ideal, proj(k)) for k in states])
    via_walk = np.zeros((6, 7))
    for i, k in enumerate(states):
        res = run_with_detectors(encode(k), sched, plan)
        for det in plan:
            via_walk[i, int(det.outcome[1:]) - 1] += np.linalg.norm(res.records[det.label]) ** 2
    oracle = _expected_table()
    elapsed = time.perf_counter() - t0
    diag = np.diag(via_povm[:, :6])
    antipodal = [via_povm[i, i ^ 1] for i in range(6)]
    off = [via_povm[i, j] for i in range(6) for j in range(6) if j not in (i, i ^ 1)]
    ok = (
        np.allclose(diag, 2 / 3, atol=1e-12, rtol=0)
        and np.allclose(antipodal, 0, atol=1e-12)
        and np.allclose(off, 1 / 12, atol=1e-12, rtol=0)
        and np.allclose(via_povm.sum(axis=1), 1, atol=1e-12, rtol=0)
        and np.allclose(via_walk.sum(axis=1), 1, atol=1e-12, rtol=0)
        and np.max(np.abs(via_povm - oracle)) <= 1e-12
        and np.max(np.abs(via_walk - oracle)) <= 1e-12
    )
    detail = f"ideal vs oracle {np.max(np.abs(via_povm - oracle)):.1e}, walk vs oracle {np.max(np.abs(via_walk - oracle)):.1e}"
    assert record(acceptance_log, 4, ok, detail, elapsed)


def test_criterion_5_theta_sweep(acceptance_log, monkeypatch):
    monkeypatch.setenv(est.THREADS_ENV, "1")
    t0 = time.perf_counter()
    rows = est.sweep_theta(est.EstimationConfig())
    elapsed = time.perf_counter() - t0
    f = np.array([r["f_analytic"] for r in rows])
    z = max(abs(r["f_mc"] - r["f_analytic"]) / r["stderr"] for r in rows)
    ok = (
        len(rows) == 17
        and abs(f.max() - 5 / 6) <= 1e-12
        and all(abs(f[k] - 5 / 6) <= 1e-12 for k in (0, 8, 16))
        and abs(f.min() - 19 / 24) <= 1e-12
        and abs(f[2] - 19 / 24) <= 1e-12
        and bool(np.all(f > est.bounds().local))
        and z <= 4
        and elapsed < 30
    )
    detail = f"max {f.max():.6f}, min {f.min():.6f} at theta=pi/8, all > {est.bounds().local:.6f}, max |mc-analytic|/SE {z:.2f}"
    assert record(acceptance_log, 5, ok, detail, elapsed)


def test_criterion_6_icosahedron(acceptance_log):
    t0 = time.perf_counter()
    analytic = [est.analytic_fidelity(e.ket) for e in icosahedron_states()]
    res = est.icosahedron_average(est.EstimationConfig())
    cal = est.calibrate_noise(0.9942)
    achieved = next(r["fidelity"] for r in cal.table if r["sigma"] == cal.sigma)
    noisy = est.icosahedron_average(est.EstimationConfig(noise_sigma=cal.sigma))
    elapsed = time.perf_counter() - t0
    ok = (
        max(abs(a - 0.8) for a in analytic) <= 1e-12
        and abs(res.mean - 0.8) <= 3 * res.stderr
        and abs(achieved - 0.9942) <= 0.001
        and elapsed < 300
    )
    detail = (
        f"analytic max dev {max(abs(a - 0.8) for a in analytic):.1e}, MC {res.mean:.6f} +- {res.stderr:.1e}, "
        f"calibrated sigma {cal.sigma} -> POVM fidelity {achieved:.5f}, noisy aggregate {noisy.mean:.5f}"
    )
    assert record(acceptance_log, 6, ok, detail, elapsed)


def test_criterion_7_bounds(acceptance_log):
    t0 = time.perf_counter()
    b = est.bounds()
    res = est.icosahedron_average(est.EstimationConfig())
    elapsed = time.perf_counter() - t0
    sep = res.separation("biseparable")
    ok = (
        abs(b.local - (3 + np.sqrt(3)) / 6) <= 1e-12
        and abs(b.biseparable - (8 + np.sqrt(22)) / 16) <= 1e-12
        and abs(b.collective - 0.8) <= 1e-12
        and round(b.local, 6) == 0.788675
        and round(b.biseparable, 4) == 0.7932
        and b.local < b.biseparable < b.collective
        and sep > 3
    )
    detail = f"{b.local:.6f} < {b.biseparable:.6f} < {b.collective:.6f}, MC aggregate {sep:.1f} SE above biseparable"
    assert record(acceptance_log, 7, ok, detail, elapsed)


def test_criterion_8_certificate(acceptance_log):
    t0 = time.perf_counter()
    rep = certify_genuinely_collective(optimal_povm())
    p2a = symmetry_kit().P2A
    rng = make_rng(8)
    Phis = rng.normal(size=(1000, 4)) + 1j * rng.normal(size=(1000, 4))
    Phis /= np.linalg.norm(Phis, axis=1, keepdims=True)
    phis = haar_random_kets(rng, 1000)
    lemma_ok = all(
        lemma1_trace(Phi, phi) > 1e-6 for Phi, phi in zip(Phis, phis) if np.max(np.abs(proj(Phi) - p2a)) > 1e-3
    ) and all(lemma1_trace(singlet(), phi) <= 1e-12 for phi in phis)
    k2 = certify_genuinely_collective(example_povms(0.5)["K2"], construction=verify_coarse_graining(0.5))
    a_product = all(
        schmidt_rank_one(np.linalg.eigh(e)[1][:, -1], "12|3") for e in example_povms(0.5)["A"].elements
    )
    fixtures_valid = all(
        validate_povm(povm).passed for p_mix in (0.1, 0.5, 0.9) for povm in example_povms(p_mix).values()
    )
    sym = certify_genuinely_collective(symmetric_povm())
    elapsed = time.perf_counter() - t0
    ok = (
        rep.verdict == CERTIFIED
        and rep.fact("complement_rank") == 4
        and lemma_ok
        and k2.verdict == INCONCLUSIVE
        and k2.fact("biseparable_construction")["holds"]
        and biseparable_report(0.5).verdict == BISEPARABLE
        and a_product
        and fixtures_valid
        and sym.verdict == INCONCLUSIVE
        and elapsed < 10
    )
    detail = f"optimal {rep.verdict} (r_c {rep.fact('complement_rank')}), singlet-trace suite {'ok' if lemma_ok else 'broken'}, K2 {k2.verdict}, six-element {sym.verdict}"
    assert record(acceptance_log, 8, ok, detail, elapsed)


COMMANDS = [
    ["verify-povm"],
    ["walk", "validate"],
    ["walk", "extract", "--sigma", "0.01", "--seed", "7"],
    ["walk", "dump-schedule"],
    ["walk", "synthesize", "--segment", "3-6"],
    ["estimate", "sweep"],
    ["estimate", "icosa"],
    ["estimate", "icosa", "--sigma", "0.04"],
    ["estimate", "single", "--theta", "0", "--trials", "100", "--reps", "1", "--seed", "1"],
    ["certify"],
]


def test_criterion_9_determinism(acceptance_log, tmp_path, monkeypatch):
    t0 = time.perf_counter()
    mismatched = []
    for i, argv in enumerate(COMMANDS):
        outputs = []
        for threads in ("1", "4", "4"):
            monkeypatch.setenv(est.THREADS_ENV, threads)
            path = tmp_path / f"cmd{i}_{len(outputs)}"
            code = cli.main(argv + ["--out", str(path)])
            outputs.append((code, path.read_bytes()))
        if len(set(outputs)) != 1 or outputs[0][0] != 0:
            mismatched.append(" ".join(argv))
    elapsed = time.perf_counter() - t0
    ok = not mismatched
    detail = f"{len(COMMANDS) - len(mismatched)}/{len(COMMANDS)} commands bit-identical over 3 runs (1 and 4 workers)"
    assert record(acceptance_log, 9, ok, detail, elapsed)

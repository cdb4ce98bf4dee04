"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (also repeated in
the terminal summary). Criteria whose analysis shows they cannot hold are
marked as strict expected failures; their lines still read FAIL.
"""
import time

import numpy as np
import pytest

from cdflow.cd_certifier import cd_slack, certify, frontier
from cdflow.constants import (
    alpha_theta,
    c_beta,
    c_phi,
    p_star_negative_dim,
    p_star_weighted,
    poincare_constant,
    q_star,
)
from cdflow.entropy_flow import (
    Entropy,
    FlowConfig,
    decay_certificate,
    refined_decay_certificate,
    residual_ok,
    run_flow,
)
from cdflow.inequality_lab import beckner_lhs, beckner_quotient, entropy_limit, randomized_falsifier, spectral_gap
from cdflow.operator import (
    apply_L,
    discretize,
    gamma,
    gamma2,
    gamma2_by_definition,
    hessian_identity_check,
    make_operator,
)
from cdflow.testfunctions import random_positive, trial_rngs

from conftest import ACCEPTANCE_LINES


def report(number, ok, detail, seconds):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({seconds:.1f} s) {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_closed_form_constants():
    t0 = time.perf_counter()
    checks = {
        "c_phi(1,3)": (c_phi(1, 3), 49 / 16),
        "p_star_weighted(1,3)": (p_star_weighted(1, 3), 50 / 33),
        "p_star_negative_dim(-3)": (p_star_negative_dim(-3), 32 / 19),
        "q_star(-3)": (q_star(-3), 6 / 13),
        "poincare(c=2, beta=3)": (poincare_constant(2 * (3 - 0.5), 2 * (1 - 3)), 0.25),
    }
    for b, v in {0.6: 0.01, 1: 0.25, 1.49: 0.9801, 1.5: 1, 2: 2, 3: 4, 10: 18}.items():
        checks[f"C_beta({b})"] = (c_beta(b), v)
    worst = max(abs(a - b) for a, b in checks.values())
    report(1, worst <= 1e-12, f"max abs error {worst:.1e} over {len(checks)} values", time.perf_counter() - t0)


def test_criterion_02_consistency_identities():
    t0 = time.perf_counter()
    errs = []
    for n in (-2.5, -3, -5, -10):
        q = q_star(n)
        errs.append(abs((q + 2) / (q + 1) - p_star_negative_dim(n)) <= 1e-12)
        errs.append(abs(alpha_theta(p_star_negative_dim(n), n)[0]) <= 1e-10)
        errs.append(alpha_theta(2.0, n)[1] == 0.0)
    report(2, all(errs), f"{sum(errs)}/{len(errs)} identities hold", time.perf_counter() - t0)


def test_criterion_03_cd_certification():
    t0 = time.perf_counter()
    ok = []
    for beta in (1.6, 2.0, 3.0, 10.0):
        op = make_operator("quadratic", beta)
        cert = certify(op, 2 * beta - 1, 2 * (1 - beta))
        ok.append(cert.certified and abs(cert.min_slack) <= 1e-9)
    op2 = make_operator("quadratic", 2.0)
    ok.append(not certify(op2, 3.1, -2.0).certified)
    quartic = make_operator("quartic", 2.0)
    cert = certify(quartic, 3.0, 7.0)
    ok.append(cert.certified and abs(cd_slack(quartic, 3.0, 7.0, 1.0) - 4.5) <= 1e-9)
    rel = []
    for beta in (1.0, 2.0, 3.0):
        res = frontier(make_operator("quadratic", beta, R=50.0, n=2001), method="grid-scan")
        rel.append(abs(res.best_constant - c_beta(beta)) / c_beta(beta))
    ok.append(max(rel) <= 1e-6)
    elapsed = time.perf_counter() - t0
    report(3, all(ok) and elapsed < 5, f"{sum(ok)}/{len(ok)} checks, frontier rel err {max(rel):.1e}", elapsed)


def test_criterion_04_saturation():
    t0 = time.perf_counter()
    op = make_operator("quadratic", 3.0)
    x = op.x
    resid = np.max(np.abs(gamma2(op, x) - 5 * gamma(op, x) - apply_L(op, x) ** 2 / -4))
    elapsed = time.perf_counter() - t0
    report(4, resid <= 1e-8 and elapsed < 1, f"max |Gamma2 - 5 Gamma + (Lf)^2/4| = {resid:.1e}", elapsed)


def test_criterion_05_spectral_gap():
    ok, parts = [], []
    start = time.perf_counter()
    for beta, kw, tol in ((3.0, {}, 1e-2), (10.0, {}, 1e-2), (1.0, dict(R=1e12, grid="sinh"), 5e-2)):
        t0 = time.perf_counter()
        rep = spectral_gap(discretize(make_operator("quadratic", beta, **kw)))
        dt = time.perf_counter() - t0
        ok.append(rep.rel_error <= tol and dt < 10)
        parts.append(f"beta={beta:g}: {rep.gap:.6f} ({100 * rep.rel_error:.2f}%)")
    report(5, all(ok), "; ".join(parts), time.perf_counter() - start)


def test_criterion_06_extremal_sharpness():
    t0 = time.perf_counter()
    op = make_operator("quadratic", 3.0, R=400.0, n=32001)
    raw = beckner_quotient(op, 2.0, op.x)
    shifted = beckner_quotient(op, 2.0, op.x + op.measure.R + 1.0)
    ok = abs(raw - 4) <= 1e-6 * 4 and abs(shifted - 4) <= 1e-6 * 4
    report(6, ok, f"raw {raw:.9f}, shifted {shifted:.9f}", time.perf_counter() - t0)


def test_criterion_07_entropy_flow():
    t0 = time.perf_counter()
    op = make_operator("quadratic", 3.0, tail_tol=1e-12, n=8001)
    tr = run_flow(FlowConfig(op, lambda x: x, t_end=1.0, dt=2.5e-4, record_every=40), K=4.0)
    ratio = np.max(np.abs(tr.lam / tr.lam[0] / np.exp(-8 * tr.times) - 1))
    drift = np.max(np.abs(tr.mass - tr.mass[0]))
    res_ok = residual_ok(tr, tol=1e-6)
    small = make_operator("quadratic", 3.0, n=4001)
    decays = 0
    for rng in trial_rngs(2024, 20):
        f0 = random_positive(small.x, rng)
        trace = run_flow(FlowConfig(small, f0, t_end=1.0, dt=1e-3), K=4.0)
        decays += decay_certificate(trace, 4.0)
    elapsed = time.perf_counter() - t0
    ok = ratio <= 1e-5 and drift < 1e-9 and res_ok and decays == 20 and elapsed < 30
    detail = f"ratio dev {ratio:.1e}, mass drift {drift:.1e}, residual ok {res_ok}, random decay {decays}/20"
    report(7, ok, detail, elapsed)


@pytest.mark.xfail(
    strict=True,
    reason="the inflated theta is not violated by the 20 seeded draws; the stated theta is itself "
    "not sharp (it already fails for bounded tilts outside the draw family)",
)
def test_criterion_08_refined_decay():
    t0 = time.perf_counter()
    op = make_operator("quadratic", 3.0, n=4001)
    _, theta = alpha_theta(1.8, -4)
    ok_theta = fail_inflated = 0
    for rng in trial_rngs(2025, 20):
        f0 = random_positive(op.x, rng)
        cfg = FlowConfig(op, f0, entropy=Entropy("power", 1.8), t_end=1.0, dt=1e-3)
        tr = run_flow(cfg, K=4.0, theta=theta)
        ok_theta += refined_decay_certificate(tr, 4.0, theta)
        fail_inflated += not refined_decay_certificate(tr, 4.0, 1.5 * theta)
    elapsed = time.perf_counter() - t0
    ok = ok_theta == 20 and fail_inflated >= 1 and elapsed < 60
    detail = f"theta={theta:.6f}: {ok_theta}/20 certified; 1.5 theta: {fail_inflated} failures (need >= 1)"
    report(8, ok, detail, elapsed)


@pytest.mark.xfail(
    strict=True,
    reason="C = 1 sets the threshold 1/C = 1 below the sharp quotient 4, so no draw can violate it",
)
def test_criterion_09_randomized_falsification():
    t0 = time.perf_counter()
    op = make_operator("quadratic", 3.0)
    zero = {}
    for p in (p_star_weighted(1, 3), 1.8, 2.0):
        zero[round(p, 4)] = randomized_falsifier(op, p, 0.25, trials=1000, seed=42).violations
    over = randomized_falsifier(op, 1.8, 1.0, trials=1000, seed=42).violations
    m = op.measure.mass
    rel = 0.0
    for rng in trial_rngs(99, 50):
        f = random_positive(op.x, rng)
        lim = entropy_limit(m, f)
        rel = max(rel, abs(beckner_lhs(m, 1.001, f) - lim) / abs(lim))
    elapsed = time.perf_counter() - t0
    ok = all(v == 0 for v in zero.values()) and over >= 1 and rel <= 1e-3 and elapsed < 120
    detail = f"violations at C=1/4 {zero}; C=1 violations {over} (need >= 1); p->1 rel err {rel:.1e}"
    report(9, ok, detail, elapsed)


def _calculus(n):
    op = make_operator("quadratic", 3.0, R=12.0, n=n)
    x, m = op.x, op.measure.mass
    f = np.exp(-((x - 0.5) ** 2))
    g = np.sin(x) * np.exp(-x * x / 4)
    inner = np.abs(x) < 3
    return np.array(
        [
            abs(np.dot(m, gamma(op, f, g)) + np.dot(m, f * apply_L(op, g))),
            abs(np.dot(m, apply_L(op, f + g))),
            np.max(np.abs(gamma2(op, f) - gamma2_by_definition(op, f))[inner]),
        ]
    )


def test_criterion_10_calculus_self_tests():
    t0 = time.perf_counter()
    coarse, fine = _calculus(801), _calculus(1601)
    orders = list(np.log2(coarse / fine))
    hess = [hessian_identity_check(np.sin, lambda t: np.exp(t / 2), np.linspace(-2, 2, k)) for k in (201, 401)]
    orders.append(np.log2(hess[0] / hess[1]))
    elapsed = time.perf_counter() - t0
    names = ("ibp", "int L", "gamma2", "hessian")
    detail = ", ".join(f"{k} {o:.2f}" for k, o in zip(names, orders))
    report(10, min(orders) >= 1.8 and elapsed < 10, f"observed orders: {detail}", elapsed)

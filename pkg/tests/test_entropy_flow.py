import numpy as np
import pytest
from scipy.linalg import eigh

from cdflow.constants import alpha_theta, theta_flow
from cdflow.entropy_flow import (
    Entropy,
    FlowConfig,
    decay_certificate,
    refined_decay_certificate,
    residual_ok,
    run_flow,
)
from cdflow.errors import PositivityLost, ValidationError
from cdflow.operator import discretize, make_operator
from cdflow.testfunctions import random_positive, trial_rngs


@pytest.fixture(scope="module")
def small():
    return make_operator("quadratic", 3.0, R=20.0, n=401)


@pytest.fixture(scope="module")
def medium():
    return make_operator("quadratic", 3.0, tail_tol=1e-10, n=4001)


def test_matches_eigen_decomposition(small):
    dop = discretize(small)
    w, V = eigh(dop.A.toarray(), np.diag(dop.mass))
    f0 = np.tanh(small.x) + 0.3 * np.exp(-small.x**2)
    c = V.T @ (dop.mass * f0)
    tr = run_flow(FlowConfig(small, f0, t_end=0.5, dt=1e-4, record_every=50), K=1.0)
    exact = np.array([np.sum(c[1:] ** 2 * np.exp(-2 * w[1:] * t)) for t in tr.times])
    assert np.allclose(tr.lam, exact, rtol=1e-6)
    exact1 = np.array([-2 * np.sum(w[1:] * c[1:] ** 2 * np.exp(-2 * w[1:] * t)) for t in tr.times])
    assert np.allclose(tr.lam1, exact1, rtol=1e-6)
    exact2 = np.array([4 * np.sum(w[1:] ** 2 * c[1:] ** 2 * np.exp(-2 * w[1:] * t)) for t in tr.times])
    assert np.allclose(tr.lam2, exact2, rtol=1e-6)


def test_second_order_in_time(small):
    f0 = np.tanh(small.x)
    ref = run_flow(FlowConfig(small, f0, t_end=0.2, dt=1e-5, record_every=20000), K=1.0).lam[-1]
    errs = [
        abs(run_flow(FlowConfig(small, f0, t_end=0.2, dt=dt, record_every=10**6), K=1.0).lam[-1] - ref)
        for dt in (4e-3, 2e-3)
    ]
    assert np.log2(errs[0] / errs[1]) > 1.8


def test_coordinate_decays_at_twice_the_gap(medium):
    tr = run_flow(FlowConfig(medium, lambda x: x, t_end=1.0, dt=5e-4, record_every=20), K=4.0)
    assert decay_certificate(tr, 4.0)
    assert not decay_certificate(tr, 4.5)
    assert refined_decay_certificate(tr, 4.0, 0.0) == decay_certificate(tr, 4.0)
    assert np.max(np.abs(tr.mass - tr.mass[0])) < 1e-9
    assert residual_ok(tr)


def test_power_entropy_bookkeeping(medium):
    rng = np.random.default_rng(5)
    f0 = random_positive(medium.x, rng, amplitude=1.0)
    tr = run_flow(FlowConfig(medium, f0, entropy=Entropy("power", 1.8), t_end=0.2, dt=1e-3), K=4.0)
    assert np.allclose(tr.total - tr.psi_inf, tr.lam, rtol=1e-10, atol=1e-15)
    assert np.all(np.diff(tr.lam) <= 0) and np.all(tr.lam1 <= 0)
    assert tr.status == "ok"


@pytest.mark.parametrize("kind,p", [("variance", 2.0), ("power", 1.8), ("power", 1.6)])
def test_linear_residual_nonnegative_on_random_data(medium, kind, p):
    for rng in trial_rngs(11, 4):
        f0 = random_positive(medium.x, rng)
        tr = run_flow(FlowConfig(medium, f0, entropy=Entropy(kind, p), t_end=0.3, dt=1e-3), K=4.0)
        assert residual_ok(tr), (kind, p)
        assert decay_certificate(tr, 4.0)


def test_refined_flow_needs_the_smaller_coefficient(medium):
    x = medium.x
    f0 = np.exp(4 * x / np.sqrt(1 + x * x))
    cfg = FlowConfig(medium, f0, entropy=Entropy("power", 1.8), t_end=0.3, dt=1e-3, record_every=5)
    _, theta = alpha_theta(1.8, -4)
    large = run_flow(cfg, K=4.0, theta=theta)
    small = run_flow(cfg, K=4.0, theta=theta_flow(1.8, -4))
    assert large.residual_refined[0] < 0
    assert not refined_decay_certificate(large, 4.0, theta)
    assert residual_ok(small, refined=True)
    assert refined_decay_certificate(small, 4.0, theta_flow(1.8, -4))


def test_refined_log_form(medium):
    rng = np.random.default_rng(3)
    f0 = random_positive(medium.x, rng, amplitude=0.5)
    tr = run_flow(FlowConfig(medium, f0, entropy=Entropy("power", 1.8), t_end=0.3, dt=1e-3), K=4.0, theta=1e-3)
    assert refined_decay_certificate(tr, 4.0, 1.0) in (True, False)
    assert refined_decay_certificate(tr, 4.0, 1e-3)


def test_positivity_errors(small):
    with pytest.raises(PositivityLost):
        run_flow(FlowConfig(small, small.x, entropy=Entropy("power", 1.5), t_end=0.01, dt=1e-3), K=1.0)
    f0 = 1.5 + np.tanh(small.x)
    f0[0] = 1e-14
    tr = run_flow(FlowConfig(small, f0, entropy=Entropy("xlogx"), t_end=0.002, dt=1e-3, record_every=1), K=1.0)
    assert tr.status == "diagnostic"


def test_validation(small):
    with pytest.raises(ValidationError):
        FlowConfig(small, small.x, dt=0)
    with pytest.raises(ValidationError):
        FlowConfig(small, small.x, scheme_weight=0.3)
    with pytest.raises(ValidationError):
        Entropy("power", 2.5)
    with pytest.raises(ValidationError):
        run_flow(FlowConfig(small, small.x, t_end=0.01), K=0.0)
    with pytest.raises(ValidationError):
        run_flow(FlowConfig(small, small.x, t_end=0.01), K=1.0, theta=-1.0)


def test_theta_scheme_option(small):
    f0 = np.tanh(small.x)
    a = run_flow(FlowConfig(small, f0, t_end=0.1, dt=1e-4, scheme="theta"), K=1.0)
    b = run_flow(FlowConfig(small, f0, t_end=0.1, dt=1e-4), K=1.0)
    assert np.allclose(a.lam, b.lam, rtol=1e-4)


def test_recording_grid(small):
    tr = run_flow(FlowConfig(small, np.tanh(small.x), t_end=0.011, dt=1e-3, record_every=4), K=1.0)
    assert tr.times[0] == 0.0 and tr.times[-1] == pytest.approx(0.011)
    assert len(tr.rows()[0]) == len(tr.CSV_HEADER)

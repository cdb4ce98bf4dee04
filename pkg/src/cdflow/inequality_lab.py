"""Numerical estimates of Poincare and Beckner constants for the weighted operator.

All integrals are taken against the discrete measure and the Dirichlet energy
is the assembled form ``f.A.f``, so that the p = 2 quotient of the coordinate
function reproduces the discrete spectral gap, not a quadrature of it.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded, eigh_tridiagonal

from .cd_certifier import _threads
from .constants import c_beta
from .errors import DegenerateDenominator, LineSearchFail, OutOfRange, SolverStall, ValidationError
from .operator import DiscretizedOperator, OperatorSpec, discretize
from .testfunctions import random_positive, trial_rngs

__all__ = [
    "TOL_Q",
    "GapReport",
    "BecknerReport",
    "spectral_gap",
    "predicted_gap",
    "beckner_lhs",
    "refined_beckner_lhs",
    "entropy_limit",
    "beckner_quotient",
    "randomized_falsifier",
    "quotient_minimizer",
    "phi_entropy_quotient",
]

TOL_Q = 1e-4
DENOM_FLOOR = 1e-14


@dataclass
class GapReport:
    gap: float
    predicted: float
    rel_error: float
    eigenvector: np.ndarray
    residual: float = 0.0
    orthogonality: float = 0.0

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "predicted": self.predicted,
            "rel_error": self.rel_error,
            "residual": self.residual,
            "orthogonality": self.orthogonality,
            "sign_changes": int(np.count_nonzero(np.diff(np.sign(self.eigenvector)) != 0)),
        }


@dataclass
class BecknerReport:
    p: float
    theoretical_C: float
    source: str  # "weighted" | "cd"
    worst_quotient: float
    violations: int
    extremal_candidate: np.ndarray
    trials: int = 0
    redraws: int = 0
    seed: int | None = None
    theta: float = 0.0
    quotients: np.ndarray = field(default_factory=lambda: np.empty(0))

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "theoretical_C": self.theoretical_C,
            "threshold": 1.0 / self.theoretical_C,
            "source": self.source,
            "theta": self.theta,
            "worst_quotient": self.worst_quotient,
            "violations": self.violations,
            "trials": self.trials,
            "redraws": self.redraws,
            "seed": self.seed,
        }


def _as_dop(op) -> DiscretizedOperator:
    return op if isinstance(op, DiscretizedOperator) else discretize(op)


def predicted_gap(op: OperatorSpec) -> float:
    """Closed-form best constant for 1 + x**2, else the c (beta - 1) bound."""
    if op.weight.family == "quadratic":
        return c_beta(op.beta)
    return op.weight.c * (op.beta - 1.0)


def spectral_gap(dop, predicted: float | None = None) -> GapReport:
    """Second eigenvalue of the pencil (A, M).

    ``M`` is diagonal, so the pencil is congruent to the symmetric
    tridiagonal matrix ``M^{-1/2} A M^{-1/2}``; a single eigenpair is taken by
    Sturm bisection with inverse iteration (LAPACK stebz/stein).
    """
    dop = _as_dop(dop)
    d, e = dop.symmetric_tridiagonal()
    try:
        w, y = eigh_tridiagonal(d, e, select="i", select_range=(1, 1), lapack_driver="stebz")
    except np.linalg.LinAlgError as err:
        raise SolverStall(f"inverse iteration did not converge: {err}") from err
    lam = float(w[0])
    m = dop.mass
    v = y[:, 0] / np.sqrt(m)
    v /= math.sqrt(np.dot(m, v * v))
    if v[-1] < 0:
        v = -v
    Av = dop.apply(v)
    residual = float(np.linalg.norm((Av - lam * m * v) / np.sqrt(m)) / max(abs(lam), 1e-300))
    if not lam > 0 or residual > 1e-6:
        raise SolverStall(f"eigenpair rejected: lambda={lam:g}, residual={residual:.2e}")
    if predicted is None:
        predicted = predicted_gap(dop.op)
    return GapReport(
        gap=lam,
        predicted=float(predicted),
        rel_error=abs(lam - predicted) / abs(predicted),
        eigenvector=v,
        residual=residual,
        orthogonality=float(abs(np.dot(m, v))),
    )


def _check_p(p: float):
    if not 1.0 < p <= 2.0:
        raise OutOfRange(f"need p in (1, 2], got {p:g}")


def _bracket(mass, p, f):
    """(X, D) with X = int f**2 and D = X - (int f**(2/p))**p, without cancellation.

    With ``a = int f**(2/p)`` and ``u = f**(2/p)/a - 1`` (mean zero),
    ``D = a**p int [(1 + u)**p - 1 - p u]``. At p = 2 this is the variance,
    which also makes sense for signed f.
    """
    f = np.asarray(f, dtype=float)
    X = float(np.dot(mass, f * f))
    if p == 2.0:
        mean = float(np.dot(mass, f))
        return X, float(np.dot(mass, (f - mean) ** 2))
    g = np.abs(f) ** (2.0 / p)
    a = float(np.dot(mass, g))
    if a <= 0:
        return X, 0.0
    r = g / a
    u = r - 1.0
    with np.errstate(divide="ignore"):
        logr = np.where(np.abs(u) < 0.5, np.log1p(u), np.log(r))
    D = a**p * float(np.dot(mass, np.expm1(p * logr) - p * u))
    return X, max(D, 0.0)


def beckner_lhs(mass, p: float, f) -> float:
    """(p/(p-1)) (int f**2 - (int f**(2/p))**p)."""
    _check_p(p)
    _, D = _bracket(mass, p, f)
    return p / (p - 1.0) * D


def refined_beckner_lhs(mass, p: float, f, theta: float) -> float:
    """Left side of the refined inequality; the log form at theta = 1.

    ``X = int f**2`` and ``Y = (int f**(2/p))**p``; the bracket is
    ``(X - Y**(1-theta) X**theta)/(1-theta)``, which is ``X - Y`` at theta = 0.
    """
    _check_p(p)
    if theta < 0:
        raise ValidationError("theta must be nonnegative")
    X, D = _bracket(mass, p, f)
    Y = X - D
    if D <= 0 or theta == 0.0:
        return p / (p - 1.0) * D
    if Y <= 0:
        if theta == 1.0:
            return math.inf
        return p / (p - 1.0) * X / (1.0 - theta) if theta < 1.0 else math.inf
    r = math.log1p(D / Y)  # log(X / Y)
    if theta == 1.0:
        return p / (p - 1.0) * X * r
    return p / (p - 1.0) * -X * math.expm1(-(1.0 - theta) * r) / (1.0 - theta)


def entropy_limit(mass, f) -> float:
    """int f**2 log(f**2 / int f**2), the p -> 1 limit of the Beckner bracket."""
    f2 = np.asarray(f, dtype=float) ** 2
    X = float(np.dot(mass, f2))
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(f2 > 0, f2 * np.log(f2 / X), 0.0)
    return float(np.dot(mass, integrand))


def _quotient(dop: DiscretizedOperator, p: float, f: np.ndarray, theta: float = 0.0) -> float:
    if p != 2.0 and np.min(f) < 0:
        raise ValidationError("Beckner quotients need f >= 0 when p < 2")
    lhs = refined_beckner_lhs(dop.mass, p, f, theta) if theta else beckner_lhs(dop.mass, p, f)
    scale = float(np.dot(dop.mass, f * f))
    if not lhs > DENOM_FLOOR * max(scale, 1e-300):
        raise DegenerateDenominator("the entropy bracket vanishes (f is constant)")
    return 2.0 * dop.energy(f) / lhs


def beckner_quotient(op, p: float, f, weighted: bool = True, theta: float = 0.0) -> float:
    """2 E(f) / [(p/(p-1))(int f**2 - (int f**(2/p))**p)].

    ``E`` is the weighted Dirichlet energy ``int phi f'**2`` or, with
    ``weighted=False``, the flat one ``int f'**2``. B_p(C) holds for f iff the
    quotient is at least 1/C. The quotient is invariant under f -> lambda f.
    """
    _check_p(p)
    if isinstance(op, DiscretizedOperator):
        dop = op
        if dop.weighted != weighted:
            dop = discretize(op.op, weighted)
    else:
        dop = discretize(op, weighted)
    f = dop.op.measure.sample(f).astype(float)
    return _quotient(dop, p, f, theta)


def phi_entropy_quotient(op, p: float, f) -> float:
    """int Phi''(f) phi f'**2 / (2 Ent^Phi(f)) for Phi = x**p.

    The numerator is the discrete form ``Phi'(f).A.f``, which at p = 2 is
    exactly twice the Dirichlet energy.
    """
    _check_p(p)
    dop = _as_dop(op)
    f = dop.op.measure.sample(f).astype(float)
    if np.min(f) <= 0:
        raise ValidationError("phi-entropy quotients need f > 0")
    m = dop.mass
    mean = float(np.dot(m, f))
    if p == 2.0:
        ent = float(np.dot(m, (f - mean) ** 2))
        num = 2.0 * dop.energy(f)
    else:
        u = (f - mean) / mean
        ent = float(np.dot(m, mean**p * (np.expm1(p * np.log1p(u)) - p * u)))
        num = dop.energy(p * f ** (p - 1.0), f)
    if not ent > DENOM_FLOOR * mean**p:
        raise DegenerateDenominator("Ent^Phi(f) vanishes (f is constant)")
    return num / (2.0 * ent)


def randomized_falsifier(
    op,
    p: float,
    C: float,
    trials: int = 1000,
    seed: int = 0,
    weighted: bool = True,
    theta: float = 0.0,
    source: str = "cd",
    tol_q: float = TOL_Q,
) -> BecknerReport:
    """Test B_p(C) (or its refined form with ``theta``) on random positive functions.

    A violation is a quotient below ``(1 - tol_q)/C``. Each trial owns a
    generator spawned from ``seed``, so the report does not depend on the
    number of worker threads.
    """
    _check_p(p)
    if not C > 0:
        raise ValidationError("C must be positive")
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    base = op.op if isinstance(op, DiscretizedOperator) else op
    dop = discretize(base, weighted)
    x = base.measure.x

    def one(rng):
        redraws = 0
        while True:
            f = random_positive(x, rng)
            try:
                return _quotient(dop, p, f, theta), redraws
            except DegenerateDenominator:
                redraws += 1
                if redraws > 100:
                    raise

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, trial_rngs(seed, trials)))
    quotients = np.array([q for q, _ in results])
    redraws = sum(r for _, r in results)
    worst = int(np.argmin(quotients))
    # regenerate the worst draw instead of keeping every function in memory
    rng = trial_rngs(seed, trials)[worst]
    while True:
        f = random_positive(x, rng)
        try:
            _quotient(dop, p, f, theta)
            break
        except DegenerateDenominator:
            continue
    threshold = (1.0 - tol_q) / C
    return BecknerReport(
        p=float(p),
        theoretical_C=float(C),
        source=source,
        worst_quotient=float(quotients[worst]),
        violations=int(np.count_nonzero(quotients < threshold)),
        extremal_candidate=f,
        trials=int(trials),
        redraws=int(redraws),
        seed=seed,
        theta=float(theta),
        quotients=quotients,
    )


def _starts(x: np.ndarray, seed: int):
    span = np.max(np.abs(x))
    reach = min(span, 50.0)
    yield 1.0 + 0.5 * np.tanh(x / reach) * reach / (reach + 1.0)  # shifted coordinate
    yield 1.0 + np.exp(-0.5 * x * x)
    for rng in trial_rngs(seed, 3):
        yield random_positive(x, rng)


def quotient_minimizer(op, p: float, weighted: bool = True, iters: int = 200, seed: int = 0, sigma: float = 1.0):
    """Multi-start preconditioned projected gradient descent on the quotient.

    Iterates are kept positive and normalized in L2(mu); the descent
    direction is the gradient preconditioned by ``(A + sigma M)^{-1}``, with
    an Armijo backtracking line search. A start whose line search fails is
    stopped at its current value. Returns ``(best_value, best_function)``.
    """
    _check_p(p)
    if iters < 0:
        raise ValidationError("iters must be nonnegative")
    base = op.op if isinstance(op, DiscretizedOperator) else op
    dop = discretize(base, weighted)
    m = dop.mass
    main, off = dop.diagonals()
    ab = np.zeros((2, dop.n))
    ab[0, 1:] = off
    ab[1, :] = main + sigma * m
    chol = cholesky_banded(ab, lower=False)
    floor = 1e-12

    def normalize(f):
        return f / math.sqrt(np.dot(m, f * f))

    def value_grad(f):
        X = np.dot(m, f * f)
        S = np.dot(m, f ** (2.0 / p))
        k = p / (p - 1.0)
        D = k * (X - S**p)
        E = dop.energy(f)
        dD = k * (2.0 * m * f - 2.0 * S ** (p - 1.0) * m * f ** (2.0 / p - 1.0))
        dE = 2.0 * dop.apply(f)
        Q = 2.0 * E / D
        return Q, (2.0 * dE * D - 2.0 * E * dD) / D**2

    def descend(f):
        f = normalize(np.maximum(f, floor))
        try:
            Q, g = value_grad(f)
        except FloatingPointError:
            return math.inf, f
        for _ in range(iters):
            d = -cho_solve_banded((chol, False), g)
            slope = np.dot(g, d)
            if not slope < 0:
                break
            t = 1.0
            try:
                while True:
                    trial = normalize(np.maximum(f + t * d, floor))
                    with np.errstate(all="ignore"):
                        Qt, gt = value_grad(trial)
                    if np.isfinite(Qt) and Qt <= Q + 1e-4 * t * slope:
                        break
                    t *= 0.5
                    if t < 1e-12:
                        raise LineSearchFail("Armijo backtracking exhausted")
            except LineSearchFail:
                break
            converged = Q - Qt <= 1e-13 * abs(Q)
            f, Q, g = trial, Qt, gt
            if converged:
                break
        return Q, f

    best_q, best_f = math.inf, None
    for f0 in _starts(base.measure.x, seed):
        with np.errstate(all="ignore"):
            try:
                q, f = descend(f0)
            except DegenerateDenominator:
                continue
        if np.isfinite(q) and q < best_q:
            best_q, best_f = q, f
    if best_f is None:
        raise DegenerateDenominator("every start was degenerate")
    return float(best_q), best_f

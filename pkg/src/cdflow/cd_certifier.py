"""Pointwise certification of CD(rho, n) for the one-dimensional operator Lbar.

In one dimension the curvature-dimension inequality reduces to a quadratic
form in (f', f''), which is nonnegative iff the scalar slack

    s(x) = -(b - 1/2) ((b - 1/2)/(n - 1) + 1/2) phi'**2/phi + (b - 1/2) phi'' - rho

is nonnegative everywhere. For polynomial phi the slack is a rational
function, so its infimum is found from the grid, its exact critical points and
its limit at infinity.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DimensionForbidden, NoFeasiblePair, OutOfRange

__all__ = [
    "SLACK_TOL",
    "N_GUARD",
    "CDCertificate",
    "FrontierResult",
    "check_dimension",
    "cd_slack",
    "asymptotic_slack",
    "min_slack",
    "certify",
    "closed_form_condition",
    "frontier",
    "conformal_criterion_slack",
]

SLACK_TOL = 1e-9
N_GUARD = 1e-6
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CDCertificate:
    rho: float
    n: float
    status: str  # "certified" | "violated"
    min_slack: float
    argmin_x: float
    method: str  # "closed-form" | "grid-scan"
    asymptotic_slack: float

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "n": self.n,
            "status": self.status,
            "min_slack": self.min_slack,
            "argmin_x": self.argmin_x,
            "method": self.method,
            "asymptotic_slack": self.asymptotic_slack,
        }


@dataclass(frozen=True)
class FrontierResult:
    best_constant: float
    rho_star: float
    n_star: float
    certificate: CDCertificate
    method: str

    @property
    def poincare_constant(self) -> float:
        return 1.0 / self.best_constant

    def to_dict(self) -> dict:
        return {
            "best_constant": self.best_constant,
            "rho_star": self.rho_star,
            "n_star": self.n_star,
            "method": self.method,
            "certificate": self.certificate.to_dict(),
        }


def check_dimension(n: float) -> None:
    if 0.0 <= n <= 1.0:
        raise DimensionForbidden(f"n={n:g} lies in the forbidden band [0, 1]")


def _coefficients(beta: float, n: float):
    k2 = beta - 0.5
    k1 = k2 * (k2 / (n - 1.0) + 0.5)
    return k1, k2


def cd_slack(op, rho: float, n: float, x):
    """Slack of the one-dimensional CD(rho, n) criterion at ``x``."""
    check_dimension(n)
    w = op.weight
    k1, k2 = _coefficients(op.beta, n)
    x = np.asarray(x, dtype=float)
    return -k1 * w.d1(x) ** 2 / w(x) + k2 * w.d2(x) - rho


def _numerator(op, rho: float, n: float) -> Polynomial:
    """Polynomial P with slack = P / phi."""
    k1, k2 = _coefficients(op.beta, n)
    p = op.weight.poly
    return -k1 * p.deriv() ** 2 + (k2 * p.deriv(2) - rho) * p


def asymptotic_slack(op, rho: float, n: float) -> float:
    """Limit of the slack as |x| -> infinity, from leading coefficients."""
    check_dimension(n)
    P = _numerator(op, rho, n)
    coef = np.array(P.coef, dtype=float)
    scale = max(np.max(np.abs(coef)), 1.0)
    coef[np.abs(coef) <= 1e-12 * scale] = 0.0
    nz = np.nonzero(coef)[0]
    if nz.size == 0:
        return 0.0
    top = nz[-1]
    deg_phi = op.weight.degree
    if top > deg_phi:
        return math.copysign(math.inf, coef[top])
    if top == deg_phi:
        return float(coef[top] / op.weight.leading)
    return 0.0


def _critical_points(op, rho: float, n: float) -> np.ndarray:
    P = _numerator(op, rho, n)
    phi = op.weight.poly
    Q = P.deriv() * phi - P * phi.deriv()
    coef = Q.coef
    if np.all(np.abs(coef) <= 1e-14 * max(np.max(np.abs(coef)), 1.0)):
        return np.zeros(0)
    roots = Q.trim(1e-14 * np.max(np.abs(coef))).roots()
    real = roots[np.abs(roots.imag) <= 1e-9 * (1.0 + np.abs(roots.real))].real
    return real


def min_slack(op, rho: float, n: float):
    """(min slack, location, asymptotic slack) over the real line.

    Scans the measure's nodes and the exact critical points of the rational
    slack; the limit at infinity is attributed to the truncation boundary.
    """
    check_dimension(n)
    R = op.measure.R
    x = np.concatenate([op.measure.x, _critical_points(op, rho, n)])
    s = cd_slack(op, rho, n, x)
    i = int(np.argmin(s))
    best, where = float(s[i]), float(np.clip(x[i], -R, R))
    limit = asymptotic_slack(op, rho, n)
    if limit < best:
        best, where = limit, R
    return best, where, limit


def _is_quadratic(op) -> bool:
    return op.weight.family == "quadratic"


def closed_form_condition(beta: float, rho: float, n: float) -> bool:
    """CD(rho, n), rho > 0, for phi = 1 + x**2: rho <= 2b-1 and 0 < rho(1-n) <= (2b-1)**2."""
    check_dimension(n)
    a = 2.0 * beta - 1.0
    return 0.0 < rho <= a and 0.0 < rho * (1.0 - n) <= a * a


def _closed_form_min(op, rho: float, n: float):
    # phi = 1 + x**2: the slack is monotone in x**2 between x = 0 and infinity
    k1, k2 = _coefficients(op.beta, n)
    at_zero = 2.0 * k2 - rho
    at_inf = -4.0 * k1 + 2.0 * k2 - rho
    if at_zero <= at_inf:
        return at_zero, 0.0, at_inf
    return at_inf, op.measure.R, at_inf


def certify(op, rho: float, n: float, method: str | None = None, slack_tol: float = SLACK_TOL) -> CDCertificate:
    """Certify CD(rho, n) for ``op``.

    ``method`` defaults to ``"closed-form"`` for phi = 1 + x**2 and to
    ``"grid-scan"`` otherwise.
    """
    check_dimension(n)
    if rho < 0:
        raise OutOfRange(f"rho={rho:g} must be nonnegative")
    if method is None:
        method = "closed-form" if _is_quadratic(op) else "grid-scan"
    if method == "closed-form":
        if not _is_quadratic(op):
            raise OutOfRange("the closed-form test only applies to phi = 1 + x**2")
        value, where, limit = _closed_form_min(op, rho, n)
    elif method == "grid-scan":
        value, where, limit = min_slack(op, rho, n)
    else:
        raise OutOfRange(f"unknown method {method!r}")
    status = "certified" if value >= -slack_tol else "violated"
    return CDCertificate(float(rho), float(n), status, float(value), float(where), method, float(limit))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CDFLOW_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


def _rho_cap(op, n: float, rho_max: float) -> float:
    """Largest rho certified at dimension n (the slack is affine in rho)."""
    value, _, _ = min_slack(op, 0.0, n)
    return min(value, rho_max)


def _objective(op, n: float, rho_max: float) -> float:
    rho = _rho_cap(op, n, rho_max)
    if not rho > 0 or not math.isfinite(rho):
        return -math.inf
    return rho * n / (n - 1.0)


def _golden_max(func, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 300):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = func(d)
    return (c, fc) if fc >= fd else (d, fd)


def _scan_side(op, side: str, n_range, rho_max: float, samples: int):
    """Coarse log-spaced scan of one side of [0, 1], refined by golden section.

    The search variable is u = log|n| (negative side) or u = log(n - 1).
    """
    lo, hi = n_range
    eps = N_GUARD
    if side == "negative":
        if lo >= -eps:
            return None
        to_n = lambda u: -math.exp(u)  # noqa: E731
        u_lo, u_hi = math.log(eps), math.log(-lo)
    else:
        if hi <= 1.0 + eps:
            return None
        to_n = lambda u: 1.0 + math.exp(u)  # noqa: E731
        u_lo, u_hi = math.log(eps), math.log(hi - 1.0)
    us = np.linspace(u_lo, u_hi, samples)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        vals = list(pool.map(lambda u: _objective(op, to_n(u), rho_max), us))
    vals = np.array(vals)
    if not np.any(np.isfinite(vals)):
        return None
    k = int(np.argmax(vals))
    a = us[max(k - 1, 0)]
    b = us[min(k + 1, samples - 1)]
    u, val = _golden_max(lambda u: _objective(op, to_n(u), rho_max), a, b)
    if vals[k] > val:
        u, val = us[k], vals[k]
    return to_n(u), val


def frontier(
    op,
    rho_max: float = math.inf,
    n_range=(-1e3, 1e3),
    method: str | None = None,
    samples: int = 161,
) -> FrontierResult:
    """Maximize rho n / (n - 1) over certified pairs with rho > 0.

    For phi = 1 + x**2 the closed form is used unless ``method="grid-scan"``.
    """
    if method is None:
        method = "closed-form" if _is_quadratic(op) else "grid-scan"
    b = op.beta
    if method == "closed-form":
        if not _is_quadratic(op):
            raise OutOfRange("the closed-form frontier only applies to phi = 1 + x**2")
        if b <= 0.5:
            raise NoFeasiblePair(f"no certified pair for beta={b:g} <= 1/2")
        if b >= 1.5:
            rho, n = 2.0 * b - 1.0, 2.0 * (1.0 - b)
        else:
            rho, n = (2.0 * b - 1.0) ** 2 / 2.0, -1.0
        if rho > rho_max or not (n_range[0] <= n <= n_range[1]):
            raise NoFeasiblePair("closed-form optimum lies outside the search box")
        cert = certify(op, rho, n, method="closed-form")
        return FrontierResult(rho * n / (n - 1.0), rho, n, cert, method)
    if method != "grid-scan":
        raise OutOfRange(f"unknown method {method!r}")

    best = None
    for side in ("negative", "positive"):
        found = _scan_side(op, side, n_range, rho_max, samples)
        if found is not None and math.isfinite(found[1]) and (best is None or found[1] > best[1]):
            best = found
    if best is None:
        raise NoFeasiblePair("no certified (rho, n) with rho > 0 in the search box")
    n = best[0]
    rho = _rho_cap(op, n, rho_max)
    cert = certify(op, rho, n, method="grid-scan")
    return FrontierResult(rho * n / (n - 1.0), rho, n, cert, method)


def conformal_criterion_slack(op, rho: float, n: float, x):
    """Scalar form of the conformal (tensorial) CD criterion in dimension one.

    With d = 1 and a flat reference metric the tensor inequality is the sign
    of ``(b-1) phi''/phi + (1 - (2b-1)**2/(n-1)) phi'**2/(4 phi**2)
    + phi''/(2 phi) - 2 b phi'**2/(4 phi**2) - rho/phi``.
    """
    check_dimension(n)
    d = 1.0
    b = op.beta
    w = op.weight
    x = np.asarray(x, dtype=float)
    phi, p1, p2 = w(x), w.d1(x), w.d2(x)
    ricci = 0.0
    grad_sq = p1**2 / (4.0 * phi**2)
    return (
        ricci
        + (b - 1.0) * p2 / phi
        + (2.0 - d - (2.0 * b - 1.0) ** 2 / (n - d)) * grad_sq
        + (p2 / (2.0 * phi) - 2.0 * b * p1**2 / (4.0 * phi**2) - rho / phi)
    )

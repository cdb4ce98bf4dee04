"""Closed-form constants and admissible parameter ranges.

Every function raises on inadmissible input instead of returning NaN.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cd_certifier import check_dimension
from .errors import Degenerate, NonpositiveCurvature, OutOfRange, ValidationError

__all__ = [
    "ConstantReport",
    "c_phi",
    "p_star_weighted",
    "p_star_negative_dim",
    "p_star_bgs",
    "alpha_theta",
    "theta_flow",
    "q_star",
    "poincare_constant",
    "c_beta",
    "phi_condition_check",
    "evaluate",
    "CONSTANTS",
]


def c_phi(n: float, beta: float) -> float:
    """C_{n,beta} = (8(b-1-n)(2b-1) + 9n) / (8(b-1-n)(b-1))."""
    gap = beta - 1.0 - n
    if gap == 0.0 or beta == 1.0:
        raise Degenerate(f"C_(n,beta) is singular at n={n:g}, beta={beta:g}")
    if gap < 0.0:
        raise OutOfRange(f"need beta > n + 1, got n={n:g}, beta={beta:g}")
    return (8.0 * gap * (2.0 * beta - 1.0) + 9.0 * n) / (8.0 * gap * (beta - 1.0))


def p_star_weighted(n: float, beta: float) -> float:
    """Lower end of the admissible exponent range for power entropies under CD(0, n)."""
    if n < 0:
        raise OutOfRange(f"need n >= 0, got {n:g}")
    gap = beta - 1.0 - n
    if gap == 0.0:
        raise Degenerate(f"p* is degenerate at beta = n + 1 = {beta:g}")
    if gap < 0.0:
        raise OutOfRange(f"need beta > n + 1, got n={n:g}, beta={beta:g}")
    return 1.0 + (8.0 * gap + 9.0 * n) / (8.0 * beta * gap + 9.0 * n)


def p_star_negative_dim(n: float) -> float:
    """1 + (1 - 4n) / (2n**2 + 1), for n < -2."""
    if not n < -2.0:
        raise OutOfRange(f"p* under CD(rho, n) needs n < -2, got {n:g}")
    return 1.0 + (1.0 - 4.0 * n) / (2.0 * n * n + 1.0)


def p_star_bgs(d: float, beta: float) -> float:
    """Comparison exponent 1 + 1/(beta - d) for phi = 1 + |x|**2."""
    if not beta > d:
        raise OutOfRange(f"need beta > d, got d={d:g}, beta={beta:g}")
    return 1.0 + 1.0 / (beta - d)


def alpha_theta(p: float, n: float):
    """(alpha, theta) of the improved Beckner inequality; theta = alpha p/(p-1)."""
    if p == 1.0 or n == -2.0:
        raise Degenerate(f"alpha/theta undefined at p={p:g}, n={n:g}")
    if not 1.0 < p <= 2.0:
        raise OutOfRange(f"need p in (1, 2], got {p:g}")
    q = (2.0 - p) / (p - 1.0)
    alpha = q / (2.0 * (n + 2.0) ** 2) * (q * (4.0 * n - 1.0) + 2.0 * n * (n + 2.0))
    theta = alpha * p / (p - 1.0)
    return alpha, theta


def theta_flow(p: float, n: float) -> float:
    """alpha (p-1)/p, the coefficient of Lambda'**2 / int f**p that the entropy
    flow actually supports.

    Cauchy-Schwarz gives ``int h**(q-2) Gamma(h)**2 >= ((p-1)/p)**2 Lambda'**2 / int f**p``
    with ``h = f**(p-1)``, so the factor ``p/(p-1)`` in front of it leaves
    ``alpha (p-1)/p`` rather than ``alpha p/(p-1)``.
    """
    alpha, _ = alpha_theta(p, n)
    return alpha * (p - 1.0) / p


def q_star(n: float) -> float:
    if not n < -2.0:
        raise OutOfRange(f"q* needs n < -2, got {n:g}")
    return 2.0 * n * (n + 2.0) / (1.0 - 4.0 * n)


def poincare_constant(rho: float, n: float) -> float:
    """(n - 1) / (rho n), the Poincare constant under CD(rho, n)."""
    check_dimension(n)
    if not rho > 0:
        raise NonpositiveCurvature(f"need rho > 0, got {rho:g}")
    return (n - 1.0) / (rho * n)


def c_beta(beta: float) -> float:
    """Best CD-frontier constant for phi = 1 + x**2."""
    if not beta > 0.5:
        raise OutOfRange(f"need beta > 1/2, got {beta:g}")
    if beta >= 1.5:
        return 2.0 * (beta - 1.0)
    return (beta - 0.5) ** 2


def phi_condition_check(family: str, n: float, beta: float, p: float | None = None) -> bool:
    """Whether Phi'''' Phi'' >= C_{n,beta} Phi'''**2 holds for Phi = x**p or x log x."""
    C = c_phi(n, beta)
    if family == "power":
        if p is None or not 1.0 < p <= 2.0:
            raise OutOfRange(f"power family needs p in (1, 2], got {p!r}")
        return p_star_weighted(n, beta) <= p <= 2.0
    if family == "xlogx":
        # Phi'''' Phi'' = 2 Phi'''**2 for x log x
        return C <= 2.0
    raise ValidationError(f"unknown entropy family {family!r}")


@dataclass(frozen=True)
class ConstantReport:
    name: str
    inputs: dict = field(default_factory=dict)
    value: float | None = None
    validity: bool = True
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": dict(self.inputs),
            "value": self.value,
            "validity": self.validity,
            "message": self.message,
        }


CONSTANTS = {
    "c_phi": (c_phi, ("n", "beta")),
    "p_star_weighted": (p_star_weighted, ("n", "beta")),
    "p_star": (p_star_negative_dim, ("n",)),
    "p_star_negative_dim": (p_star_negative_dim, ("n",)),
    "p_star_bgs": (p_star_bgs, ("d", "beta")),
    "alpha": (lambda p, n: alpha_theta(p, n)[0], ("p", "n")),
    "theta": (lambda p, n: alpha_theta(p, n)[1], ("p", "n")),
    "theta_flow": (theta_flow, ("p", "n")),
    "q_star": (q_star, ("n",)),
    "poincare": (poincare_constant, ("rho", "n")),
    "c_beta": (c_beta, ("beta",)),
}


def evaluate(name: str, **inputs) -> ConstantReport:
    """Evaluate a named constant; inadmissible inputs give ``validity=False``."""
    if name not in CONSTANTS:
        raise ValidationError(f"unknown constant {name!r}; choose from {sorted(CONSTANTS)}")
    func, args = CONSTANTS[name]
    missing = [a for a in args if inputs.get(a) is None]
    if missing:
        raise ValidationError(f"constant {name!r} needs {', '.join('--' + m for m in missing)}")
    used = {a: float(inputs[a]) for a in args}
    try:
        value = func(**used)
    except ValidationError as err:
        return ConstantReport(name, used, None, False, str(err))
    if not math.isfinite(value):
        return ConstantReport(name, used, None, False, "non-finite value")
    return ConstantReport(name, used, float(value), True)

"""The weighted operator Lbar f = phi f'' - (beta - 1) phi' f' and its calculus.

Pointwise diagnostics (carre du champ, iterated carre du champ, generator)
use fourth-order finite differences on the measure's nodes. The quadratic
forms used by the flow solver and the eigensolver come from a second-order
divergence-form assembly, ``Lbar f = phi**beta (phi**(1 - beta) f')'``, with
zero-flux ends so that discrete integration by parts holds exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import _fd
from .errors import ValidationError
from .weights import Measure, WeightFunction, build_measure, weight_from_config

__all__ = [
    "OperatorSpec",
    "DiscretizedOperator",
    "make_operator",
    "dx",
    "dxx",
    "gamma",
    "apply_L",
    "gamma2",
    "gamma2_by_definition",
    "discretize",
    "hessian_identity_check",
    "hessian_sides",
]


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    weight: WeightFunction
    beta: float
    measure: Measure

    def __post_init__(self):
        if self.measure.beta != self.beta or self.measure.weight != self.weight:
            raise ValidationError("operator and measure disagree on (phi, beta)")

    @property
    def x(self) -> np.ndarray:
        return self.measure.x

    def describe(self) -> dict:
        return self.measure.describe()


def make_operator(family="quadratic", beta: float = 3.0, **measure_kw) -> OperatorSpec:
    """Convenience constructor: weight family plus ``build_measure`` keywords."""
    w = weight_from_config(family)
    m = build_measure(w, beta, **measure_kw)
    return OperatorSpec(w, float(beta), m)


def dx(m: Measure, f) -> np.ndarray:
    """d/dx of grid values, through the node map."""
    f = m.sample(f)
    return _fd.derivative(f, m.dxi, 1) / m.dx_dxi


def dxx(m: Measure, f) -> np.ndarray:
    f = m.sample(f)
    d1 = _fd.derivative(f, m.dxi, 1)
    d2 = _fd.derivative(f, m.dxi, 2)
    return (d2 - m.d2x_dxi2 * d1 / m.dx_dxi) / m.dx_dxi**2


def gamma(op: OperatorSpec, f, g=None) -> np.ndarray:
    """Carre du champ of Lbar: ``phi f' g'``."""
    m = op.measure
    fp = dx(m, f)
    gp = fp if g is None else dx(m, g)
    return op.weight(m.x) * fp * gp


def apply_L(op: OperatorSpec, f) -> np.ndarray:
    m = op.measure
    x = m.x
    return op.weight(x) * dxx(m, f) - (op.beta - 1.0) * op.weight.d1(x) * dx(m, f)


def gamma2(op: OperatorSpec, f) -> np.ndarray:
    """Iterated carre du champ from its closed-form one-dimensional expansion."""
    m = op.measure
    x = m.x
    b = op.beta
    phi, p1, p2 = op.weight(x), op.weight.d1(x), op.weight.d2(x)
    f1, f2 = dx(m, f), dxx(m, f)
    return (
        0.5 * ((2 * b - 1) * phi * p2 + (1 - b) * p1**2) * f1**2
        + phi * p1 * f1 * f2
        + phi**2 * f2**2
    )


def gamma2_by_definition(op: OperatorSpec, f) -> np.ndarray:
    """``Gamma2(f) = L(Gamma(f)) / 2 - Gamma(f, L f)``, composed numerically."""
    f = op.measure.sample(f)
    return 0.5 * apply_L(op, gamma(op, f)) - gamma(op, f, apply_L(op, f))


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    """Quadratic forms ``f.A.f ~ int phi f'**2 dmu`` and ``f.M.f ~ int f**2 dmu``.

    ``A`` is stored through its edge weights (``f.A.f = sum edge * diff(f)**2``)
    and ``M`` through its diagonal, which is the measure's node mass.
    """

    op: OperatorSpec
    edge: np.ndarray
    mass: np.ndarray
    weighted: bool = True

    @property
    def n(self) -> int:
        return self.mass.size

    def energy(self, f, g=None) -> float:
        f = self.op.measure.sample(f)
        df = np.diff(f)
        dg = df if g is None else np.diff(self.op.measure.sample(g))
        return float(np.sum(self.edge * df * dg))

    def apply(self, f) -> np.ndarray:
        """A @ f."""
        f = self.op.measure.sample(f)
        flux = self.edge * np.diff(f)
        out = np.zeros_like(f)
        out[:-1] -= flux
        out[1:] += flux
        return out

    def generator(self, f) -> np.ndarray:
        """-M^{-1} A f, the discrete counterpart of Lbar f."""
        return -self.apply(f) / self.mass

    def diagonals(self):
        """Main and off diagonal of A."""
        main = np.zeros(self.n)
        main[:-1] += self.edge
        main[1:] += self.edge
        return main, -self.edge

    @property
    def A(self) -> sparse.csr_matrix:
        main, off = self.diagonals()
        return sparse.diags([off, main, off], [-1, 0, 1], format="csr")

    @property
    def M(self) -> sparse.dia_matrix:
        return sparse.diags(self.mass)

    def symmetric_tridiagonal(self):
        """Diagonals of M^{-1/2} A M^{-1/2}, similar to -M^{-1} A up to sign."""
        main, off = self.diagonals()
        s = np.sqrt(self.mass)
        return main / self.mass, off / (s[:-1] * s[1:])


def discretize(op: OperatorSpec, weighted: bool = True) -> DiscretizedOperator:
    """Divergence-form assembly with half-node coefficients.

    Weighted: edge = Z phi**(1 - beta)(x_{i+1/2}) / (x_{i+1} - x_i), the
    Dirichlet form of Lbar. Unweighted: phi**(-beta) instead, the flat form
    ``int f'**2 dmu``.
    """
    m = op.measure
    x_half = m.xi_to_x(0.5 * (m.xi[1:] + m.xi[:-1]))
    power = 1.0 - op.beta if weighted else -op.beta
    edge = m.Z * op.weight(x_half) ** power / np.diff(m.x)
    return DiscretizedOperator(op, edge, m.mass.copy(), weighted)


def hessian_sides(a, b, x=None):
    """Both sides of ``a''(b')**2 = Gamma(b, Gamma(a, b)) - Gamma(a, Gamma(b)) / 2``.

    Uses the flat carre du champ ``Gamma(u, v) = u' v'`` on a uniform grid.
    """
    x = np.linspace(-2.0, 2.0, 401) if x is None else np.asarray(x, dtype=float)
    h = x[1] - x[0]

    def d(u):
        return _fd.derivative(u, h, 1)

    def G(u, v):
        return d(u) * d(v)

    av = np.asarray(a(x), dtype=float) * np.ones_like(x)
    bv = np.asarray(b(x), dtype=float) * np.ones_like(x)
    lhs = _fd.derivative(av, h, 2) * d(bv) ** 2
    rhs = G(bv, G(av, bv)) - 0.5 * G(av, G(bv, bv))
    return x, lhs, rhs


def hessian_identity_check(a, b, x=None) -> float:
    """Max residual of the Hessian identity for two test functions."""
    _, lhs, rhs = hessian_sides(a, b, x)
    return float(np.max(np.abs(lhs - rhs)))

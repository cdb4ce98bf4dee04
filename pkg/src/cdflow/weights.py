"""Weight functions phi and the probability measures Z * phi**(-beta) dx.

Weights are even polynomials with positive leading coefficient. The measure
is truncated to [-R, R] (R chosen from an analytic tail bound) and carries a
quadrature rule whose nodes are shared by every discretization downstream.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from .errors import NonConvex, NonIntegrable, ShapeMismatch, ValidationError

__all__ = [
    "WeightFunction",
    "Measure",
    "quadratic",
    "quartic",
    "even_poly",
    "weight_from_config",
    "build_measure",
    "moment",
    "gregory_weights",
]

# Uniform grids coarser than this near the origin are replaced by a stretched
# grid when grid="auto".
_AUTO_MAX_SPACING = 0.05


@dataclass(frozen=True)
class WeightFunction:
    """Even polynomial weight ``phi(x) = sum_k coeffs[k] * x**(2k)``."""

    coeffs: tuple
    family: str = "poly"
    poly: Polynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        if len(coeffs) < 2:
            raise NonConvex("a constant weight has no convexity bound")
        if coeffs[-1] <= 0:
            raise NonConvex("leading coefficient must be positive")
        full = np.zeros(2 * len(coeffs) - 1)
        full[::2] = coeffs
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "poly", Polynomial(full))

    @property
    def degree(self) -> int:
        return self.poly.degree()

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def __call__(self, x):
        return self.poly(np.asarray(x, dtype=float))

    def d1(self, x):
        return self.poly.deriv(1)(np.asarray(x, dtype=float))

    def d2(self, x):
        return self.poly.deriv(2)(np.asarray(x, dtype=float))

    @property
    def c(self) -> float:
        """Exact infimum of phi'' over the real line."""
        d2 = self.poly.deriv(2)
        if d2.degree() == 0:
            return float(d2.coef[0])
        candidates = [0.0]
        for r in d2.deriv().roots():
            if abs(r.imag) <= 1e-10 * (1.0 + abs(r.real)):
                candidates.append(r.real)
        return float(min(d2(np.array(candidates))))

    def describe(self):
        if self.family in ("quadratic", "quartic"):
            return self.family
        return {"poly": list(self.coeffs)}


def quadratic() -> WeightFunction:
    """phi(x) = 1 + x**2, the generalized Cauchy weight."""
    return WeightFunction((1.0, 1.0), family="quadratic")


def quartic() -> WeightFunction:
    """phi(x) = 1 + x**2 + x**4."""
    return WeightFunction((1.0, 1.0, 1.0), family="quartic")


def even_poly(coeffs) -> WeightFunction:
    coeffs = tuple(float(c) for c in coeffs)
    if coeffs == (1.0, 1.0):
        return quadratic()
    if coeffs == (1.0, 1.0, 1.0):
        return quartic()
    return WeightFunction(coeffs, family="poly")


def weight_from_config(config) -> WeightFunction:
    """Accepts ``"quadratic"``, ``"quartic"`` or ``{"poly": [c0, c2, ...]}``."""
    if isinstance(config, WeightFunction):
        return config
    if config == "quadratic":
        return quadratic()
    if config == "quartic":
        return quartic()
    if isinstance(config, dict) and "poly" in config:
        return even_poly(config["poly"])
    raise ValidationError(
        f"unknown weight family {config!r}; use 'quadratic', 'quartic' or {{'poly': [c0, c2, ...]}}"
    )


def gregory_weights(n: int, h: float) -> np.ndarray:
    """Composite trapezoid weights with fourth-order Gregory end corrections."""
    if n < 7:
        raise ValidationError("Gregory quadrature needs at least 7 nodes")
    w = np.full(n, h)
    ends = h * np.array([3 / 8, 7 / 6, 23 / 24])
    w[:3] = ends
    w[-3:] = ends[::-1]
    return w


@dataclass(frozen=True, eq=False)
class Measure:
    """Truncated, normalized measure ``Z * phi**(-beta) dx`` on [-R, R].

    Nodes are ``x = map(xi)`` for a uniform computational grid ``xi``; with
    ``grid == "uniform"`` the map is the identity, with ``grid == "sinh"`` it
    is ``x = sinh(xi)``, which resolves slowly decaying tails cheaply.
    """

    weight: WeightFunction
    beta: float
    Z: float
    R: float
    grid: str
    xi: np.ndarray
    x: np.ndarray
    dx_dxi: np.ndarray
    d2x_dxi2: np.ndarray
    quad: np.ndarray  # dx-quadrature weights
    density: np.ndarray  # Z * phi**(-beta) at the nodes
    mass: np.ndarray  # quad * density; sums to one
    tail_mass: float
    quad_error: float  # estimated absolute error of Z

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def dxi(self) -> float:
        return float(self.xi[1] - self.xi[0])

    def xi_to_x(self, xi):
        return np.sinh(xi) if self.grid == "sinh" else np.asarray(xi, dtype=float)

    def sample(self, g) -> np.ndarray:
        """Evaluate a callable on the nodes, or check an array's shape."""
        if callable(g):
            values = np.asarray(g(self.x), dtype=float)
            if values.ndim == 0:
                values = np.full(self.n, float(values))
            return values
        values = np.asarray(g, dtype=float)
        if values.shape != self.x.shape:
            raise ShapeMismatch(f"expected {self.x.shape} grid values, got {values.shape}")
        return values

    def describe(self) -> dict:
        return {
            "family": self.weight.describe(),
            "beta": self.beta,
            "R": self.R,
            "N": self.n,
            "grid": self.grid,
        }


def _decay_order(w: WeightFunction, beta: float) -> float:
    """beta_eff such that phi**(-beta) ~ x**(-2 * beta_eff)."""
    return beta * w.degree / 2.0


def tail_bound(w: WeightFunction, beta: float, Z: float, R: float) -> float:
    """Upper bound on the measure of {|x| > R}, valid once phi >= lead * x**deg / 2 beyond R."""
    b = _decay_order(w, beta)
    factor = w.leading ** (-beta)
    if any(c < 0 for c in w.coeffs[:-1]):
        factor *= 2.0**beta
    return 2.0 * Z * factor * R ** (1.0 - 2.0 * b) / (2.0 * b - 1.0)


def _radius_for(w: WeightFunction, beta: float, Z: float, tail_tol: float) -> float:
    b = _decay_order(w, beta)
    factor = w.leading ** (-beta)
    negative = any(c < 0 for c in w.coeffs[:-1])
    if negative:
        factor *= 2.0**beta
    # small margin: renormalizing the truncated measure raises Z slightly
    target = 0.999 * tail_tol
    R = (2.0 * Z * factor / ((2.0 * b - 1.0) * target)) ** (1.0 / (2.0 * b - 1.0))
    R = max(R, 5.0)
    if negative:
        # the bound needs phi(x) >= lead * x**deg / 2 for every |x| >= R
        while True:
            xs = R * np.geomspace(1.0, 1e3, 200)
            if np.all(w(xs) >= 0.5 * w.leading * xs**w.degree):
                break
            R *= 2.0
    return float(R)


def build_measure(
    w: WeightFunction,
    beta: float,
    tail_tol: float = 1e-10,
    n: int = 8001,
    R: float | None = None,
    grid: str = "auto",
) -> Measure:
    """Build the normalized measure ``Z * phi**(-beta) dx`` and its quadrature.

    ``R`` defaults to the smallest radius whose analytic tail bound is below
    ``tail_tol``; passing ``R`` overrides that choice (the tail estimate is
    still recorded). ``grid`` is ``"uniform"``, ``"sinh"`` or ``"auto"``
    (uniform unless the node spacing would exceed 0.05).
    """
    w = weight_from_config(w)
    beta = float(beta)
    if beta * w.degree <= 1.0:
        raise NonIntegrable(
            f"phi**(-beta) decays like |x|**(-{beta * w.degree:g}); need beta * deg(phi) > 1"
        )
    c = w.c
    if not c > 0:
        raise NonConvex(f"inf phi'' = {c:g} is not positive")
    if tail_tol <= 0:
        raise ValidationError("tail_tol must be positive")
    if n < 7 or n % 2 == 0:
        raise ValidationError("the node count must be odd and at least 7")

    total, _ = integrate.quad(lambda t: w(t) ** (-beta), -np.inf, np.inf, limit=200)
    z_estimate = 1.0 / total
    if R is None:
        R = _radius_for(w, beta, z_estimate, tail_tol)
    R = float(R)

    if grid == "auto":
        grid = "uniform" if 2.0 * R / (n - 1) <= _AUTO_MAX_SPACING else "sinh"
    if grid == "uniform":
        xi = np.linspace(-R, R, n)
        x = xi.copy()
        jac = np.ones(n)
        jac2 = np.zeros(n)
    elif grid == "sinh":
        S = np.arcsinh(R)
        xi = np.linspace(-S, S, n)
        x = np.sinh(xi)
        jac = np.cosh(xi)
        jac2 = x.copy()
    else:
        raise ValidationError(f"unknown grid kind {grid!r}")
    dxi = xi[1] - xi[0]

    phi = w(x)
    if np.any(phi <= 0):
        raise NonConvex("phi must be positive on the grid")
    if np.min(w.d2(x)) < c - 1e-12:
        raise NonConvex("phi'' falls below its convexity bound on the grid")

    quad = gregory_weights(n, dxi) * jac
    unnormalized = phi ** (-beta)
    integral = float(np.dot(quad, unnormalized))
    # Richardson-type estimate from the rule on every other node
    coarse = gregory_weights((n + 1) // 2, 2 * dxi) * jac[::2]
    integral_coarse = float(np.dot(coarse, unnormalized[::2]))
    Z = 1.0 / integral
    density = Z * unnormalized
    return Measure(
        weight=w,
        beta=beta,
        Z=Z,
        R=R,
        grid=grid,
        xi=xi,
        x=x,
        dx_dxi=jac,
        d2x_dxi2=jac2,
        quad=quad,
        density=density,
        mass=quad * density,
        tail_mass=tail_bound(w, beta, Z, R),
        quad_error=Z * Z * abs(integral - integral_coarse) / 15.0,
    )


def moment(m: Measure, g) -> float:
    """Integral of ``g`` against the measure, by the stored quadrature rule."""
    return float(np.dot(m.mass, m.sample(g)))

"""Random strictly positive test functions: exponentials of bounded smooth fields."""
from __future__ import annotations

import numpy as np
from numpy.polynomial import hermite_e

__all__ = ["random_field", "random_positive", "trial_rngs"]


def random_field(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """A bounded smooth field with unit sup norm.

    Low-order Hermite polynomial in a random length scale, clamped by a
    smooth tanh at a random level, plus a few Gaussian bumps. One draw in
    four is dominated by the coordinate direction, the extremal direction of
    the Poincare inequality for phi = 1 + x**2.
    """
    x = np.asarray(x, dtype=float)
    scale = rng.uniform(0.5, 4.0)
    coef = rng.normal(size=4) / np.array([1.0, 1.0, 2.0, 6.0])
    poly = hermite_e.hermeval(x / scale, coef)
    clamp = rng.uniform(2.0, 60.0)
    field = clamp * np.tanh(poly / clamp)
    for _ in range(rng.integers(0, 4)):
        centre = rng.normal(scale=2.0)
        width = rng.uniform(0.3, 3.0)
        field += rng.normal() * np.exp(-0.5 * ((x - centre) / width) ** 2)
    if rng.uniform() < 0.25:
        reach = rng.uniform(30.0, 200.0)
        tilt = reach * np.tanh(x / reach)
        tilt /= np.max(np.abs(tilt))
        field = tilt + rng.uniform(0.0, 0.05) * field / max(np.max(np.abs(field)), 1e-300)
    top = np.max(np.abs(field))
    return field / top if top > 0 else field


def random_positive(x: np.ndarray, rng: np.random.Generator, amplitude=None) -> np.ndarray:
    """``exp(a * field)`` with amplitude ``a`` log-uniform on [1e-3, 2] unless given."""
    if amplitude is None:
        amplitude = float(np.exp(rng.uniform(np.log(1e-3), np.log(2.0))))
    return np.exp(amplitude * random_field(x, rng))


def trial_rngs(seed: int, trials: int):
    """Independent per-trial generators derived from one master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]

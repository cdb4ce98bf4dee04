"""Spectral gap of the discretized operator against the predicted constant.

The generator is symmetric with respect to mu, so the gap is the second
eigenvalue of M^-1/2 A M^-1/2. For beta >= 3/2 the first nonconstant
eigenfunction is x itself and the gap equals 2(beta - 1).
"""
import numpy as np

from cdflow import discretize, make_operator, spectral_gap

for beta, kw in ((3.0, {}), (10.0, {}), (1.0, dict(R=1e12, grid="sinh"))):
    op = make_operator("quadratic", beta, tail_tol=1e-10, **kw)
    rep = spectral_gap(discretize(op))
    print(f"beta={beta:4.1f}: gap {rep.gap:.6f}, predicted {rep.predicted:.6f}, rel err {rep.rel_error:.2%}")

# at beta = 3 the eigenvector should be proportional to x on the bulk
op = make_operator("quadratic", 3.0, tail_tol=1e-10)
rep = spectral_gap(discretize(op))
x, v = op.x, rep.eigenvector
bulk = np.abs(x) < 5
slope = np.dot(v[bulk], x[bulk]) / np.dot(x[bulk], x[bulk])
print(f"max |v - slope x| on |x| < 5: {np.max(np.abs(v[bulk] - slope * x[bulk])):.2e}")

"""Entropy decay along the heat flow.

We run the semigroup from f = x and from a random positive datum, record
Lambda(t) = Ent(f_t) and check the exponential decay Lambda' <= -2K Lambda
together with the second-order inequality Lambda'' + 2K Lambda' >= 0.
"""
import numpy as np

from cdflow import Entropy, FlowConfig, make_operator, run_flow
from cdflow.entropy_flow import summary
from cdflow.testfunctions import random_positive

op = make_operator("quadratic", 3.0, tail_tol=1e-10, n=4001)
K = 4.0

trace = run_flow(FlowConfig(op, op.x.copy(), t_end=1.0, dt=1e-3, record_every=50), K)
ratio = trace.lam / (trace.lam[0] * np.exp(-2 * K * trace.times))
print("variance flow from f = x (eigenfunction: the ratio drifts only by the discrete gap error)")
for t, r in zip(trace.times[::4], ratio[::4]):
    print(f"  t={t:4.2f}  Lambda/(Lambda0 e^-2Kt) = {r:.8f}")

f0 = random_positive(op.x, np.random.default_rng(7))
cfg = FlowConfig(op, f0, entropy=Entropy("power", 1.8), t_end=1.0, dt=1e-3, record_every=50)
s = summary(run_flow(cfg, K))
print("\npower entropy p=1.8 from a random datum:")
for key in ("decay_ok", "residual_linear_ok", "min_residual", "max_mass_drift", "status"):
    print(f"  {key}: {s[key]}")

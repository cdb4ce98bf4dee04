"""How large can the refinement exponent theta be?

The refined inequality adds theta Lambda'^2 / Psi to the convexity bound.
Cauchy-Schwarz only supports theta = alpha (p - 1) / p. The larger value
alpha p / (p - 1) is violated by a bounded tilt, both along the flow at t = 0
and in the integrated Beckner quotient.
"""
import numpy as np

from cdflow import (
    Entropy,
    FlowConfig,
    alpha_theta,
    beckner_quotient,
    make_operator,
    run_flow,
    theta_flow,
)

p, n = 1.8, -4.0
alpha = alpha_theta(p, n)[0]
big, small = alpha * p / (p - 1), theta_flow(p, n)
print(f"alpha={alpha:.7f}  alpha p/(p-1)={big:.6f}  alpha (p-1)/p={small:.6f}")

op = make_operator("quadratic", 3.0, tail_tol=1e-10, n=4001)
x = op.x

f = np.exp(4 * x / np.sqrt(1 + x * x))
for theta in (small, big):
    cfg = FlowConfig(op, f, entropy=Entropy("power", p), t_end=0.01, dt=1e-4, record_every=10)
    tr = run_flow(cfg, 4.0, theta)
    print(f"flow residual at t=0 with theta={theta:.4f}: {tr.residual_refined[0]:+.4e}")

g = np.exp(2 * x / np.sqrt(1 + x * x)) ** 0.9
for theta in (small, big):
    q = beckner_quotient(op, p, g, theta=theta)
    print(f"refined Beckner quotient with theta={theta:.4f}: {q:.4f} (needs >= 4)")

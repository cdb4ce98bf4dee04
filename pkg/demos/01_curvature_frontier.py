"""Curvature-dimension certificates for phi = 1 + x^2.

For the generalized Cauchy weight (1 + x^2)^-beta the operator
phi f'' - (beta - 1) phi' f' satisfies CD(rho, n) with negative n. Here we
certify one pair, then trace the best Poincare-type constant rho n / (n - 1)
as beta varies and compare it with the closed form C_beta.
"""
import numpy as np

from cdflow import c_beta, certify, frontier, make_operator

op = make_operator("quadratic", 3.0, tail_tol=1e-10)

# (5, -4) is the optimal pair at beta = 3: rho n / (n - 1) = 4
cert = certify(op, 5.0, -4.0)
print(f"CD(5, -4) at beta=3: {cert.status}, min slack {cert.min_slack:.3e}")
print(f"CD(6, -4) at beta=3: {certify(op, 6.0, -4.0).status}")

print("\n beta   frontier    C_beta")
for beta in np.linspace(0.75, 6.0, 8):
    opb = make_operator("quadratic", beta, tail_tol=1e-8)
    res = frontier(opb)
    print(f"{beta:5.2f}  {res.best_constant:9.6f}  {c_beta(beta):9.6f}")

# grid-scan is the independent route; it should agree with the closed form
res = frontier(op, method="grid-scan")
print(f"\ngrid-scan frontier at beta=3: {res.best_constant:.6f} at (rho, n) = ({res.rho_star:.3f}, {res.n_star:.3f})")

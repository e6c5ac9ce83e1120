"""
Grunwald-Letnikov fractional differences
========================================

phi_0 = 1, phi_i = phi_{i-1} (i - 1 - alpha) / i. Integer orders give
ordinary differences; fractional ones have a slowly decaying tail.
"""
import numpy as np

from deframe import frac_coeffs, frac_gradient, frac_spectral_symbol

for alpha in (0.5, 0.75, 1.0, 1.5, 2.0):
    print(f"alpha={alpha:<4}", np.round(frac_coeffs(alpha, 6).phi, 4))

# weights sum to (nearly) zero for alpha > 0, so constants are (nearly) annihilated
for q in (5, 15, 60):
    print("alpha=0.75, q =", q, "sum of weights:", round(frac_coeffs(0.75, q).phi.sum(), 5))

# the response to a step edge: alpha < 1 keeps a long memory of the edge
x = np.zeros((32, 32))
x[16:, :] = 1.0
for alpha in (0.5, 1.0):
    g = frac_gradient(x, frac_coeffs(alpha, 15))
    print(f"alpha={alpha}: column profile rows 14..22:", np.round(g[0, 14:23, 0], 3))

# frequency response |symbol|^2 along the first axis: roughly (2 sin(w/2))^(2 alpha)
for alpha in (0.5, 1.0, 1.5):
    sh, _ = frac_spectral_symbol(frac_coeffs(alpha, 15), 32, 32)
    print(f"alpha={alpha}: |D_h|^2 at w=pi/8, pi/2, pi:", np.round(sh.power()[[2, 8, 16], 0], 3))

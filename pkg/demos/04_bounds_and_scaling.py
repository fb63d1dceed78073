"""
Energy bounds and scaling
=========================

Bounded-error windows, the trial-state bound for a constant rejection
probability, the k/T^2 scaling of a weak end penalty, and an exploratory
look at how steep the secular function is near mu = 1/2.
Run with ``python demos/04_bounds_and_scaling.py``.
"""

import math

import numpy as np

from clockham.bounds import (constant_rejection_bound, scaling_study,
                             two_block_matrix, verify_qma_window)
from clockham.circuitham import assemble, biased_coin_circuit, linear_clock
from clockham.linalg import rayleigh
from clockham.walks import endpoint_ground_energy

# Bounded-error circuits land inside their windows.
T = 12
for eta in (0.25, 1 / 3):
    for kind, p in (("YES", eta), ("NO", 1 - eta)):
        h = assemble(biased_coin_circuit(T, 1, p), linear_clock(T, 1))
        r = verify_qma_window(h, eta, kind)
        print(f"eta = {eta:.3f} {kind:3s}: {r.predicted_lo: .5f} <= {r.computed:.5f} <= {r.predicted_hi:.5f}")

# Constant rejection probability mu: a trial state keeps the energy at
# O(mu / T^2) even though the NO energy would be 1 - cos(pi/2T).
print()
for T in (36, 100, 400):
    t_init = math.ceil(math.sqrt(T))
    mu = 1 / 3
    trial, bound = constant_rejection_bound(T, t_init, mu)
    q = rayleigh(two_block_matrix(T, t_init, mu), trial.vector)
    print(f"T = {T:3d}: quotient {q:.3e} <= bound {bound:.3e},  T u_T'^2 = {T * trial.u_last ** 2:.3f}")

# Penalty mu = k/T on the end of the walk: lambda_0 T^2 / k stays in a band.
table = scaling_study([0.25, 0.5, 1.0, 2.0], [2 ** p for p in range(6, 13)])
print("\n   k      T    lambda_0 T^2 / k")
for k, T, lam, ratio in table.rows:
    print(f"{k:5.2f} {T:6d}   {ratio:.5f}")
print("band", table.band, "ratio", round(table.band_ratio, 3))

# Exploratory: slope of g(lam) = tan(theta/2) tan(T theta) at the mu = 1/2
# ground root.  The fitted exponent comes out close to 3.
Ts = 2 ** np.arange(3, 12)
slopes = []
for T in Ts:
    lam = endpoint_ground_energy(int(T), 0.5)
    th = 2 * np.arcsin(np.sqrt(lam / 2))
    dg = 0.5 / np.cos(th / 2) ** 2 * np.tan(T * th) + np.tan(th / 2) * T / np.cos(T * th) ** 2
    slopes.append(dg / np.sin(th))
fit = np.polyfit(np.log(Ts), np.log(slopes), 1)
print("\ng'(lambda_0) at mu = 1/2:")
for T, s in zip(Ts, slopes):
    print(f"  T = {T:5d}  {s:.4e}")
print(f"fitted exponent {fit[0]:.3f}")

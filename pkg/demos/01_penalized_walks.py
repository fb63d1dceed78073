"""
Penalised walks on a line
=========================

Spectra of the path-graph Laplacian with a penalty on one site, where the
penalty costs least, and how a walk splits into two shorter ones.
Run with ``python demos/01_penalized_walks.py``.
"""

import math

import numpy as np

from clockham.linalg import eig_dense, eig_tridiagonal
from clockham.walks import (PenalizedWalk, analytic_spectrum_full_penalty,
                            endpoint_spectrum, laplacian, one_minus_cos,
                            starting_penalty_scan, uncouple)

# The free walk on T sites: diagonal 1/2, 1, ..., 1, 1/2 and hopping -1/2.
T = 8
print("laplacian(8) diagonal:", laplacian(T).diag)
print("free spectrum:", np.round(eig_tridiagonal(laplacian(T)).eigenvalues, 6))

# A unit penalty on the last site gives the closed form 1 - cos((2k-1) pi / 2T).
full = eig_tridiagonal(PenalizedWalk.endpoint(T, 1.0).to_matrix()).eigenvalues
print("end penalty, max deviation from closed form:",
      np.max(np.abs(full - analytic_spectrum_full_penalty(T))))

# Where should a single penalty go to cost the least?  Scan every site.
scan = starting_penalty_scan(16)
print("\nground energy by penalty position, T = 16:")
for k, v in enumerate(scan.values, start=1):
    print(f"  k = {k:2d}  {v:.6f}")
print("cheapest positions:", scan.argmin, " 1 - cos(pi/32) =", one_minus_cos(math.pi / 32))

# A penalty strictly inside splits the walk: blocks plus a PSD coupling J.
w = PenalizedWalk(12, [(5, 1.0)])
u = uncouple(w)
print("\nuncoupling at k = 5 of 12:")
print("  H == blocks + J exactly:", np.array_equal(w.to_matrix().to_dense(),
                                                  u.block_matrix() + u.coupling_matrix()))
print("  J eigenvalues:", eig_dense(u.coupling.matrix).eigenvalues)
print("  lambda_0(H) =", eig_tridiagonal(w.to_matrix()).min,
      ">= block lambda_0 =", u.block_ground_energy())

# A fractional penalty mu on the last site: roots of the secular equation.
for mu in (0.01, 0.5, 0.99):
    lam = endpoint_spectrum(32, mu)
    print(f"\nmu = {mu}: lowest three eigenvalues at T = 32:", np.round(lam[:3], 8))

"""
Clock Hamiltonians from circuits
================================

Assemble the four-term clock Hamiltonian for small circuits, look at its
invariant clock subspaces and check the history state.
Run with ``python demos/02_clock_hamiltonians.py``.
"""

import math
from pathlib import Path

import numpy as np

from clockham.bounds import verify_subspaces
from clockham.circuitham import (assemble, biased_coin_circuit, conjugation_W,
                                 history_state, linear_clock, walk_tensor_identity)
from clockham.linalg import rayleigh
from clockham.specfile import load_spec
from clockham.walks import one_minus_cos

HERE = Path(__file__).resolve().parent

# An accepting and a rejecting one-qubit circuit on a plain line clock.
T = 8
yes = biased_coin_circuit(T, 1, 0.0)
no = biased_coin_circuit(T, 1, 1.0)
h_yes = assemble(yes, linear_clock(T, 1))
h_no = assemble(no, linear_clock(T, 1))
print("YES ground energy:", h_yes.legal_ground_energy())
print("NO  ground energy:", h_no.legal_ground_energy(), " 1 - cos(pi/2T) =", one_minus_cos(math.pi / (2 * T)))

# The uniform history state has zero energy when the circuit accepts;
# the sine-profile state reaches the NO energy exactly.
v = h_yes.embed_state(history_state(yes, [1, 0]).vector())
print("uniform history state on YES:", rayleigh(h_yes.matrix, v))
v = h_no.embed_state(history_state(no, [1, 0], "no_profile").vector())
print("sine-profile state on NO:", rayleigh(h_no.matrix, v))

# W turns the transition term into a free walk tensored with the identity.
w = conjugation_W(no)
err = np.max(np.abs(w.T @ h_no.components["trans"].matrix @ w - walk_tensor_identity(T, 2)))
print("max |W^T H_trans W - Delta (x) 1| =", err)

# A spec file with a complex phase gate and illegal clock branches.
circuit, clock = load_spec(HERE / "specs" / "phase_branches.json")
h = assemble(circuit, clock)
print(f"\nphase_branches.json: {len(clock.labels)} clock states, realified: {h.factor == 2}")
for s in clock.partition:
    print(f"  {s.kind:12s} {len(s):2d} states  lambda_0 = {h.block_spectrum(s)[0]:.6f}")
for r in verify_subspaces(h):
    print(f"  {r.name}: {r.computed:.6f} >= {r.predicted_lo:.6f}  {r.verdict}")

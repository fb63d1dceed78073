"""
Projectors in two-by-two block form
===================================

Conjugate a projector by a block-diagonal orthogonal matrix until only
uncoupled 0/1 entries and two-by-two blocks with non-positive coupling are
left.  The weights mu of those blocks decide the energy of a circuit.
Run with ``python demos/03_stoquastic_blocks.py``.
"""

import numpy as np
from scipy.stats import ortho_group

from clockham.bounds import compute_eta
from clockham.circuitham import biased_coin_circuit, linear_clock
from clockham.stoquastic import circuit_block_form, extract_mu, stoquastize

np.set_printoptions(precision=4, suppress=True)

# Projector onto (|0> + |1>)/sqrt 2 with the split after the first coordinate.
v = np.array([1.0, 1.0]) / np.sqrt(2)
f = stoquastize(np.outer(v, v), 1)
print("D for the plus state:\n", f.D)

# A random rank-3 projector in dimension 8, split 4 + 4.
rng = np.random.default_rng(1)
q = ortho_group.rvs(8, random_state=rng)[:, :3]
f = stoquastize(q @ q.T, 4)
print("\nrandom rank 3, split 4:")
print(" reconstruction residual:", f.residual)
print(" block mu values:", [round(b.mu, 4) for b in f.pairs])
print(" D =\n", f.D)

# For a circuit, the split is the support of the input penalties and mu is
# the rejection weight of each correctly initialised block.
for p in (0.0, 0.2, 0.75, 1.0):
    c = biased_coin_circuit(6, 1, p)
    clock = linear_clock(6, 1)
    form = circuit_block_form(c, clock)
    kind = "NO" if p >= 0.5 else "YES"
    eta = compute_eta(c, clock, kind)
    rep = extract_mu(form, kind, eta)
    print(f"\nreject with p = {p}: mu = {rep.mu}, {kind} with eta = {eta:.3f}, tags {rep.tags}")

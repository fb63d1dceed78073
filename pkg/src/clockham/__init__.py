"""Penalised quantum walks and standard-form clock Hamiltonians.

Spectra of path-graph walks with penalties, Hamiltonians assembled from a
circuit and a clock, stoquastic block forms of projectors, and numerical
checks of the energy bounds that follow from them.
"""

from .errors import *  # noqa: F401,F403
from .linalg import (DenseSymmetric, Spectrum, SymTridiagonal, eig_dense,
                     eig_tridiagonal, is_psd, rayleigh, spectral_norm)
from .walks import (PenalizedWalk, endpoint_spectrum, g_eval, laplacian,
                    starting_penalty_scan, uncouple)
from .circuitham import (CircuitSpec, ClockSpec, Gate, StandardFormHamiltonian,
                         acceptance_probability, assemble, conjugation_W,
                         dynamic_init_clock, history_state, invariant_partition,
                         linear_clock)
from .stoquastic import ProjectorBlockForm, extract_mu, stoquastize
from .bounds import (BoundReport, TrialVector, constant_rejection_bound,
                     kkr_check, predict_eqma, scaling_study, verify_qma_window)
from .specfile import load_spec

__version__ = "0.1.0"

"""Exact-plus-numeric toolkit for matrix-valued quantum correlations.

Builds the infinite-dimensional witness correlations for the
three-input/two-outcome and two-input/three-outcome scenarios, verifies
their defining identities in exact arithmetic over Q(sqrt2, w), exports
cyclically truncated finite-dimensional models, and measures the
finite-dimensional defect of the witnesses with a deterministic optimizer.
"""

__version__ = "0.1.0"

CONVENTIONS = (
    "two-outcome observables use S_x = E(2,x) - E(1,x); outcome 2 spans the +1 eigenspace",
    "the two-input/three-outcome combination is evaluated with all four terms at input pair (1,1)",
    "the two-input/three-outcome witness dimension is pinned to n = 4 by the explicit "
    "index-3 induced representation; it is a construction choice",
    "the weighted diagonal vector zeta_1 carries tail weights (sqrt2)^j over j < 0",
    "inner products are linear in the first argument and conjugate-linear in the second",
)

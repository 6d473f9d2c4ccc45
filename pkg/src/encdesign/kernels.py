"""Sampling kernels with a compiled fast path.

The Cython extension is optional: when it is missing, the numpy fallback
is used instead. Each kernel dispatches to whichever backend measures
faster for its workload shape (the compiled argmax loop wins by several
times; the numpy constraint check wins at small constraint counts). Both
backends compute the same float64 operations in the same order, so
results are bit-identical either way; tests assert this whenever the
compiled backend is present. ``benchmarks/`` compares their throughput.
"""

import numpy as np

from . import _kernels_py

try:
    from . import _ckernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def available_backends() -> dict:
    backends = {"python": _kernels_py}
    if _compiled is not None:
        backends["compiled"] = _compiled
    return backends


def _prepare(eps, betas, z_targets):
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    z_targets = np.ascontiguousarray(z_targets, dtype=np.int64)
    return eps, betas, z_targets


def potential_type_codes(eps, betas, z_targets, impl=None):
    """Chosen treatment under each instrument value for a batch of utility
    shocks; see _kernels_py.potential_type_codes for the contract."""
    eps, betas, z_targets = _prepare(eps, betas, z_targets)
    impl = impl if impl is not None else (_compiled or _kernels_py)
    d, ties = impl.potential_type_codes(eps, betas, z_targets)
    return np.asarray(d), np.asarray(ties, dtype=bool)


def region_accept(eps, lhs, rhs, offsets, impl=None):
    """Acceptance mask for a system of strict pairwise shock constraints.

    Defaults to the numpy backend: region systems carry only a handful of
    constraints, where vectorized passes beat the compiled per-row loop
    even at low acceptance rates (see benchmarks/bench_kernels.py).
    """
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    lhs = np.ascontiguousarray(lhs, dtype=np.int64)
    rhs = np.ascontiguousarray(rhs, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    impl = impl if impl is not None else _kernels_py
    return np.asarray(impl.region_accept(eps, lhs, rhs, offsets), dtype=bool)

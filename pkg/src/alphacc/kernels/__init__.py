"""Hot numeric kernels with two interchangeable backends.

The default backend compiles the inner loops with numba. Set
``ALPHACC_BACKEND=numpy`` to force the pure-numpy fallback (used on
machines without numba, and by the benchmark in benchmarks/).
Results are deterministic within a backend; the two backends agree to
machine precision but are not bit-identical on float kernels.
"""

import os

# The model's gemms are small (a few hundred rows); BLAS thread fan-out
# costs more than it saves and single-threaded BLAS keeps results
# deterministic under our own --threads parallelism.
try:
    import threadpoolctl
    threadpoolctl.threadpool_limits(limits=1, user_api="blas")
except ImportError:  # pragma: no cover
    pass

from . import _numpy

_FORCED = os.environ.get("ALPHACC_BACKEND", "").strip().lower()

if _FORCED not in ("", "numba", "numpy"):
    raise ValueError(
        f"ALPHACC_BACKEND={_FORCED!r} not recognized; use 'numba' or 'numpy'"
    )

if _FORCED == "numpy":
    _impl = _numpy
else:
    try:
        from . import _numba as _impl
    except ImportError:
        if _FORCED == "numba":
            raise
        _impl = _numpy

accumulate_index_scores = _impl.accumulate_index_scores
min_distances = _impl.min_distances
sgns_epoch = _impl.sgns_epoch
gelu_fwd = _impl.gelu_fwd
gelu_bwd = _impl.gelu_bwd
layernorm_fwd = _impl.layernorm_fwd
layernorm_bwd = _impl.layernorm_bwd
shared_row_softmax_fwd = _impl.shared_row_softmax_fwd
shared_row_softmax_bwd = _impl.shared_row_softmax_bwd


def backend_name() -> str:
    return "numpy" if _impl is _numpy else "numba"


def get_backend(name: str):
    """Explicit backend module, independent of the env selection."""
    if name == "numpy":
        return _numpy
    if name == "numba":
        from . import _numba
        return _numba
    raise ValueError(f"unknown kernel backend {name!r}")

"""Numba acceleration toggle.

Hot kernels (Bessel quadrature, plaquette winding, bilinear sampling) come in
two implementations: a numba ``@njit`` one and a vectorized pure-numpy one.
Which path runs is decided once at import time:

* ``NLOC_NUMBA=0`` in the environment forces the numpy path;
* otherwise numba is used when it imports cleanly.

``NLOC_THREADS`` caps the numba threading layer. ``benchmarks/bench_kernels.py``
times the two paths against each other.
"""

import os

NUMBA_ENABLED = os.environ.get("NLOC_NUMBA", "1") != "0"

if NUMBA_ENABLED:
    try:
        import numba
        from numba import njit, prange
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    _threads = os.environ.get("NLOC_THREADS")
    if _threads:
        try:
            numba.set_num_threads(max(1, int(_threads)))
        except ValueError:
            pass
else:  # pure-numpy stand-ins so kernels can still be decorated at import time

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap

    prange = range

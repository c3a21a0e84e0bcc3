"""Hot per-observation kernels with a compiled core and a numpy fallback.

The Cython extension is preferred when it imported cleanly; set
HYBRIDVO_KERNELS=numpy (or =native) to force a backend. Both expose the
same three functions and are compared by the parity tests and by
benchmarks/bench_kernels.py.
"""

import os

from . import numpy_impl

_forced = os.environ.get("HYBRIDVO_KERNELS", "").strip().lower()

_impl = None
if _forced in ("", "native"):
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = None
        if _forced == "native":
            raise ImportError(
                "HYBRIDVO_KERNELS=native but the compiled extension is missing; "
                "reinstall with Cython available"
            )
if _impl is None:
    _impl = numpy_impl

BACKEND = _impl.BACKEND_NAME

project_points = _impl.project_points
reproj_system = _impl.reproj_system
sampson_distances = _impl.sampson_distances

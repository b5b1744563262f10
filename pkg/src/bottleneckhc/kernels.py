"""Select the compiled or pure-Python kernels at import time.

The compiled extension is used when it was built; otherwise, or when
``BOTTLENECKHC_PURE_PYTHON=1`` is set, the numpy/scipy fallback is used.
Both expose ``Evaluator(tables)`` with the same call signature. The
compiled build also provides ``track_core``, a path-tracking loop over an
``Evaluator``; it is ``None`` in the fallback, where the tracker runs its
reference loop instead.
"""

import os

track_core = None

if os.environ.get("BOTTLENECKHC_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import IMPLEMENTATION, Evaluator
else:
    try:
        from ._kernels import IMPLEMENTATION, Evaluator, track_core
    except ImportError:  # extension not built
        from ._kernels_py import IMPLEMENTATION, Evaluator

__all__ = ["IMPLEMENTATION", "Evaluator", "track_core"]

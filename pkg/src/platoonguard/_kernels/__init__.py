"""Physics kernel backend selection.

The compiled extension (``_core``, built from ``_core.pyx`` at install time)
is preferred; the pure-Python mirror is the fallback when the build was
skipped or the import fails.  Both produce byte-identical trajectories — see
benchmarks/bench_kernels.py for the speed comparison and the equality check.

Set PLATOONGUARD_PURE=1 to force the pure backend.
"""

import os

from . import pure as _pure

if os.environ.get("PLATOONGUARD_PURE"):
    advance_interval = _pure.advance_interval
    BACKEND = "pure"
else:
    try:
        from ._core import advance_interval  # noqa: F401
        BACKEND = "compiled"
    except ImportError:
        advance_interval = _pure.advance_interval
        BACKEND = "pure"

pure_advance_interval = _pure.advance_interval

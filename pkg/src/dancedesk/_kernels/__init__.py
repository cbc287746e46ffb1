"""Forward-kinematics kernel selection.

Uses the compiled Cython kernel when built, otherwise the numpy fallback.
Set DANCEDESK_FORCE_NUMPY=1 to force the fallback (used by the benchmark
and the kernel-parity tests).
"""
import os

from . import fk_numpy

if os.environ.get("DANCEDESK_FORCE_NUMPY") == "1":
    _impl = fk_numpy
    KERNEL = "numpy"
else:
    try:
        from . import _fk_cy as _impl  # type: ignore[attr-defined]

        KERNEL = "cython"
    except ImportError:
        _impl = fk_numpy
        KERNEL = "numpy"

fk_positions = _impl.fk_positions

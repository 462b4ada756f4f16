"""Backend dispatch for the hot scan kernels.

Imports the compiled extension when available, otherwise the numpy fallback.
Set SIRDIFF_PURE_PYTHON=1 to force the fallback (used by the benchmark and by
the cross-backend equivalence tests).
"""
from __future__ import annotations

import os

if os.environ.get("SIRDIFF_PURE_PYTHON"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

first_hit = _impl.first_hit
occupation = _impl.occupation
covered_mask = _impl.covered_mask
covered_prob = _impl.covered_prob
exposure_sum = _impl.exposure_sum

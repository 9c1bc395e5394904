"""Backend dispatch for the numeric kernels.

The compiled extension is preferred when present; the NumPy fallback is
selected otherwise. Set ``BLURMOMENTS_FORCE_BACKEND`` to ``python`` or
``compiled`` to pin a backend (``compiled`` raises if the extension was
not built).
"""

import os

_requested = os.environ.get("BLURMOMENTS_FORCE_BACKEND", "").strip().lower()
if _requested not in ("", "python", "compiled"):
    raise ImportError(
        f"BLURMOMENTS_FORCE_BACKEND must be 'python' or 'compiled', "
        f"got {_requested!r}"
    )

if _requested == "python":
    from . import fallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import fallback as _impl

        BACKEND = "python"

moment_table = _impl.moment_table
mean_shifted = _impl.mean_shifted
mean_rotated = _impl.mean_rotated

__all__ = ["BACKEND", "moment_table", "mean_shifted", "mean_rotated"]

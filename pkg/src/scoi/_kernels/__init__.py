"""Flow-kernel backend selection.

The compiled kernel is preferred when its extension module built; the
pure-Python kernel is the fallback. ``SCOI_KERNEL`` overrides:

* ``auto`` (default) -- compiled if available, else pure
* ``compiled``       -- require the extension, raise if missing
* ``pure``           -- force the fallback
"""
import os

_requested = os.environ.get("SCOI_KERNEL", "auto")
if _requested not in ("auto", "compiled", "pure"):
    raise ImportError(f"SCOI_KERNEL must be auto|compiled|pure, got {_requested!r}")

if _requested in ("auto", "compiled"):
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _pure as _impl

        BACKEND = "pure"
else:
    from . import _pure as _impl

    BACKEND = "pure"

from . import _pure as pure_impl

max_flow = _impl.max_flow
min_cost_max_flow = _impl.min_cost_max_flow


def get_backend(name=None):
    """Return the kernel module for ``name`` (``None`` = the active one)."""
    if name is None or name == BACKEND:
        return _impl
    if name == "pure":
        return pure_impl
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown kernel backend {name!r}")

"""Kernel selection.

Imports the compiled kernels when the extension built, otherwise the pure
Python twins. ``CONTFIBER_KERNELS=python`` forces the fallback (useful for
cross-checking); ``IMPL`` records which one is live.
"""

import os

_choice = os.environ.get("CONTFIBER_KERNELS", "auto")

if _choice not in ("auto", "python", "cython"):
    raise ValueError(f"CONTFIBER_KERNELS must be auto, python or cython, got {_choice!r}")

if _choice == "python":
    from . import _pykernels as _impl

    IMPL = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        IMPL = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        from . import _pykernels as _impl

        IMPL = "python"

label_components = _impl.label_components
reach_mask = _impl.reach_mask
sides_linked = _impl.sides_linked
vertex_cut = _impl.vertex_cut

__all__ = ["IMPL", "label_components", "reach_mask", "sides_linked",
           "vertex_cut"]

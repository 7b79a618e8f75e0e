"""Select the similarity kernel backend at import time.

The compiled extension is used when present; setting LABELFORGE_PURE_PYTHON=1
forces the pure-Python fallback (useful for debugging and benchmarks).
"""

from __future__ import annotations

import os

from . import _kernel_py

if os.environ.get("LABELFORGE_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _ckernel as kernel  # type: ignore[attr-defined]
    except ImportError:
        kernel = _kernel_py
else:
    kernel = _kernel_py

BACKEND: str = kernel.BACKEND


def get_kernel(name: str | None = None):
    """Return a kernel module by name ('c' or 'python'); default is active."""
    if name is None:
        return kernel
    if name == "python":
        return _kernel_py
    if name == "c":
        from . import _ckernel  # type: ignore[attr-defined]

        return _ckernel
    raise ValueError(f"unknown kernel backend: {name!r}")


def available_backends() -> list[str]:
    out = ["python"]
    try:
        from . import _ckernel  # type: ignore[attr-defined]  # noqa: F401

        out.insert(0, "c")
    except ImportError:
        pass
    return out

"""Kernel backend selection.

The compiled extension is used when importable; ``NOVIKOV_PURE_PYTHON=1``
forces the NumPy fallback (used by the benchmark and the parity tests).
"""

from __future__ import annotations

import importlib
import os
from types import ModuleType

_NAMES = {"cython": "novikov._kernels", "python": "novikov._kernels_py"}


def load(name: str) -> ModuleType:
    """Import a backend by name (``"cython"`` or ``"python"``)."""
    try:
        module = _NAMES[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; expected one of {sorted(_NAMES)}") from None
    return importlib.import_module(module)


def available() -> list[str]:
    found = []
    for name in _NAMES:
        try:
            load(name)
        except ImportError:
            continue
        found.append(name)
    return found


def _select() -> tuple[str, ModuleType]:
    if os.environ.get("NOVIKOV_PURE_PYTHON", "") not in ("", "0"):
        return "python", load("python")
    try:
        return "cython", load("cython")
    except ImportError:
        return "python", load("python")


BACKEND, kernels = _select()

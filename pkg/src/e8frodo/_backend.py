"""Kernel selection: the compiled ``_core`` extension when importable, else numpy.

Set ``E8FRODO_BACKEND=python`` to force the fallback.
"""
import os

from . import _pyfallback

NAME = "python"
kernels = _pyfallback

if os.environ.get("E8FRODO_BACKEND", "").lower() != "python":
    try:
        from . import _core
    except ImportError:  # extension not built
        pass
    else:
        kernels = _core
        NAME = "cython"


def get(name=None):
    """Return the kernel module by name (``"cython"``/``"python"``), default the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _pyfallback
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")

"""Kernel selection.

The compiled core is used when it imports; otherwise (or when the
environment variable ``SHARPLIMIT_PURE_PYTHON`` is set to a non-empty value
other than ``0``) the numpy/scipy fallback is used.  ``BACKEND`` names the
active implementation.
"""
import os

from . import _fallback

_force_py = os.environ.get("SHARPLIMIT_PURE_PYTHON", "") not in ("", "0")

_compiled = None
if not _force_py:
    try:
        import importlib

        _compiled = importlib.import_module(__name__ + "._core")
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _fallback
BACKEND = "compiled" if _compiled is not None else "python"

thomas = _impl.thomas
psi_pair = _impl.psi_pair
phi_table = _impl.phi_table
kinetic_run = _impl.kinetic_run
pde_run = _impl.pde_run


def get_backend(name: str):
    """Return the kernel module for ``name`` in {"compiled", "python"}."""
    if name == "python":
        return _fallback
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


__all__ = ["BACKEND", "thomas", "psi_pair", "phi_table", "kinetic_run",
           "pde_run", "get_backend"]

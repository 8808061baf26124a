"""Pick the compiled kernels when available, else the pure-Python ones."""
import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if os.environ.get("ESDKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as kernels  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        pass


def get(name=None):
    """Return a kernel module by name ('cython' or 'python'), default active."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")

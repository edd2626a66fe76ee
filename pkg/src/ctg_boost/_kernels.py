"""Kernel backend selection.

The compiled module is used when it imports; ``CTG_BOOST_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

from . import _pykernels

try:
    if os.environ.get("CTG_BOOST_PURE_PYTHON") == "1":
        raise ImportError("pure python requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

default = _ckernels if _ckernels is not None else _pykernels
BACKEND = default.NAME


def get(name=None):
    """Kernel module by name ("cython", "python"), or the default."""
    if name is None:
        return default
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def available():
    return ["python"] + (["cython"] if _ckernels is not None else [])

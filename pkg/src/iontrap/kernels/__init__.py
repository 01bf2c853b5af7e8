"""Hot numerical loops.

Two interchangeable backends provide the same functions:

``_ext``
    Cython extension, built at install time when a compiler is available.
``_reference``
    Pure Python (numpy only), always importable.

The compiled backend is selected at import when present. ``BACKEND`` names
the active one and :func:`get_backend` returns either module explicitly,
which the equivalence tests and the benchmark use.
"""
from importlib import import_module

from . import _reference

try:
    from . import _ext
except ImportError:  # not built
    _ext = None

_active = _ext if _ext is not None else _reference
BACKEND = "compiled" if _ext is not None else "python"

mathieu_monodromy = _active.mathieu_monodromy
verlet_run = _active.verlet_run
MAX_EVENTS = _reference.MAX_EVENTS
UNIFORMS_PER_ION = _reference.UNIFORMS_PER_ION


def available_backends():
    return ["compiled", "python"] if _ext is not None else ["python"]


def get_backend(name: str):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    if name == "python":
        return _reference
    if name == "compiled":
        if _ext is None:
            raise ImportError("compiled kernels are not built")
        return import_module(__name__ + "._ext")
    raise ValueError(f"unknown backend {name!r}")

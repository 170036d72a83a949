"""Kernel backend selection: the compiled extension when importable, else numpy.

Set ``SIMPLEXFT_BACKEND=python`` to force the pure-numpy kernel.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled


def available():
    return sorted(_BACKENDS)


def get(name=None):
    """Kernel module by name; ``None`` picks the environment or the fastest one."""
    name = name or os.environ.get("SIMPLEXFT_BACKEND") or ("cython" if _compiled else "python")
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available()}") from None


default = get()

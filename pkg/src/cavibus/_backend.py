"""Select the propagation kernels at import time.

The compiled Cython kernels are used when the extension built; otherwise the
pure numpy fallback takes over.  CAVIBUS_KERNELS=python|compiled forces one
side (forcing "compiled" raises if the extension is unavailable).
"""
import os

from . import _kernels_py

_choice = os.environ.get("CAVIBUS_KERNELS", "").strip().lower()

if _choice == "python":
    _impl = _kernels_py
elif _choice == "compiled":
    from . import _kernels_cy as _impl
else:
    try:
        from . import _kernels_cy as _impl
    except ImportError:
        _impl = _kernels_py

evolve_product = _impl.evolve_product
lindblad_rk4 = _impl.lindblad_rk4


def backend_name() -> str:
    """Which kernel implementation is active: "compiled" or "python"."""
    return _impl.BACKEND


HAVE_COMPILED = _impl.BACKEND == "compiled"

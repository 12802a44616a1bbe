"""Tick-loop backends.

The compiled Cython loop is used when the extension was built; otherwise the
pure-Python loop is selected at import time. Both share one signature::

    run_ticks(load, irr, freq, tariff, plant, engine, fcols, icols, final)
"""

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

KERNELS = {"python": _pykernel.run_ticks}
if _ckernel is not None:
    KERNELS["cython"] = _ckernel.run_ticks

BACKEND = "cython" if _ckernel is not None else "python"


def get_kernel(name=None):
    """Return the tick loop called ``name``, or the default backend."""
    name = name or BACKEND
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available (have {sorted(KERNELS)})") from None

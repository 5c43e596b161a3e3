"""Kernel backend selection.

The compiled extension is used when it imported cleanly; set SVHMC_PURE=1
to force the pure-Python backend.  Callers should access the kernels as
module attributes (``_kernels.potential_energy(...)``) so that
``use_backend`` can swap them for benchmarks and tests.
"""

import os

from svhmc._kernels import pure

try:
    from svhmc._kernels import _core
except ImportError:
    _core = None

_KERNEL_NAMES = (
    "potential_energy",
    "potential_gradient",
    "leapfrog_trajectory",
    "metropolis_sweep",
)

BACKEND = ""


def available_backends():
    """Names of the usable backends, preferred first."""
    return ("compiled", "pure") if _core is not None else ("pure",)


def use_backend(name):
    """Point the module-level kernels at the named backend."""
    global BACKEND
    if name == "compiled":
        if _core is None:
            raise ValueError("compiled backend is not available")
        source = _core
    elif name == "pure":
        source = pure
    else:
        raise ValueError(f"unknown backend {name!r}")
    for kernel in _KERNEL_NAMES:
        globals()[kernel] = getattr(source, kernel)
    BACKEND = name


def _default_backend():
    if os.environ.get("SVHMC_PURE", "") not in ("", "0"):
        return "pure"
    return "compiled" if _core is not None else "pure"


use_backend(_default_backend())

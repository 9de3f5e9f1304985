"""Hot kernels with a compiled core and a pure-Python fallback.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy implementation in ``_pykernels`` is used. Set ``SBMGROWTH_PURE_PYTHON=1``
to force the fallback, or call :func:`use_backend` at runtime (benchmarks and
parity tests do this).

Callers must look functions up through this module at call time
(``_kernels.alias_build(...)``) so that switching backends takes effect.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_NAMES = ("triangle_decode", "weighted_degrees", "alias_build", "alias_draw", "enumerate_ratio")

BACKEND = "python"


def available_backends():
    return ("cython", "python") if _ckernels is not None else ("python",)


def use_backend(name):
    """Select ``"cython"`` or ``"python"`` kernels for subsequent calls."""
    global BACKEND
    if name == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not available in this build")
        mod = _ckernels
    elif name == "python":
        mod = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    g = globals()
    for fn in _NAMES:
        g[fn] = getattr(mod, fn)
    BACKEND = name


def backend_module(name):
    return _ckernels if name == "cython" else _pykernels


if _ckernels is not None and os.environ.get("SBMGROWTH_PURE_PYTHON", "") in ("", "0"):
    use_backend("cython")
else:
    use_backend("python")

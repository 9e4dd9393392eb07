"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting
``SEMICLASSICA_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _core_py

_compiled = None
if not os.environ.get("SEMICLASSICA_PURE_PYTHON"):
    try:
        from . import _core as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _core_py

_NAMES = ("window_gather", "window_scatter", "verlet_monomial", "verlet_radial",
          "weyl_shift_sum_1d", "weyl_shift_sum_2d")


def backend(name=None):
    """Return the kernel namespace ``name`` ('compiled' or 'python')."""
    if name is None:
        return _impl
    if name == "python":
        return _core_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(name)


window_gather = _impl.window_gather
window_scatter = _impl.window_scatter
verlet_monomial = _impl.verlet_monomial
verlet_radial = _impl.verlet_radial
weyl_shift_sum_1d = _impl.weyl_shift_sum_1d
weyl_shift_sum_2d = _impl.weyl_shift_sum_2d

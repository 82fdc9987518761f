"""Hot kernels with a compiled backend and a numpy fallback.

The compiled extension ``_ckernels`` is used when it imports; otherwise (or
when ``THINFILM_PURE_PYTHON=1``) the numpy versions in ``_pykernels`` are used.
Both expose the same functions, so callers only ever import from here.
"""
import os

from . import _pykernels as numpy_backend

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("THINFILM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    _impl = compiled_backend
else:
    _impl = numpy_backend

BACKEND = _impl.NAME

d1h = _impl.d1h
d2h = _impl.d2h
laplacian_h = _impl.laplacian_h
llg_velocity = _impl.llg_velocity
gl_energy_grad = _impl.gl_energy_grad

__all__ = [
    "BACKEND",
    "compiled_backend",
    "numpy_backend",
    "d1h",
    "d2h",
    "laplacian_h",
    "llg_velocity",
    "gl_energy_grad",
]

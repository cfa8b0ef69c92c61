"""Hot-loop kernels with a compiled core and a pure-NumPy fallback.

The compiled extension (Cython) and the fallback implement identical
arithmetic, so results are interchangeable. Set PATHBANK_PURE_PYTHON=1 to
force the fallback; the active backend is reported in ``BACKEND``.
"""

import os

from . import _pure

if os.environ.get("PATHBANK_PURE_PYTHON"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _compiled as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built; fallback is fully functional
        _impl = _pure
        BACKEND = "pure"

tri_tri_intersect = _impl.tri_tri_intersect
mesh_pair_intersect = _impl.mesh_pair_intersect
brute_force_intersect = _impl.brute_force_intersect
nearest_config = _impl.nearest_config


def available_backends() -> dict:
    """Importable backend modules keyed by name."""
    backends = {"pure": _pure}
    try:
        from . import _compiled

        backends["compiled"] = _compiled
    except ImportError:
        pass
    return backends

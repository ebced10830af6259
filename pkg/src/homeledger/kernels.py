"""Hot-loop kernels with the backend picked at import.

The compiled ``_core`` extension is preferred; if it was not built the
pure-Python ``_fallback`` is used. ``backends()`` lists every importable
implementation and ``use_backend`` switches the active one (tests and
benchmarks run both).
"""

from __future__ import annotations

from types import ModuleType

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None


def backends() -> dict[str, ModuleType]:
    found = {"python": _fallback}
    if _core is not None:
        found["cython"] = _core
    return found


def use_backend(name: str) -> None:
    global BACKEND, mine_nonce, kalman_series, grid_argmin
    impl = backends()[name]
    BACKEND = name
    mine_nonce = impl.mine_nonce
    kalman_series = impl.kalman_series
    grid_argmin = impl.grid_argmin


use_backend("cython" if _core is not None else "python")

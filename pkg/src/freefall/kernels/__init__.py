"""Hot-kernel backend selection.

The compiled extension (``freefall.kernels._native``, built from
``_native.pyx``) is preferred; the pure numpy module is the fallback and the
reference. Set ``FREEFALL_BACKEND=python`` or ``native`` to force a choice.
"""

from __future__ import annotations

import os

from . import pure

BACKEND_ENV = "FREEFALL_BACKEND"


def _select():
    choice = os.environ.get(BACKEND_ENV, "auto").lower()
    if choice not in ("auto", "native", "python"):
        raise ValueError(f"{BACKEND_ENV} must be auto, native or python, got {choice!r}")
    if choice == "python":
        return pure, "python"
    try:
        from . import _native  # type: ignore[attr-defined]
    except ImportError:
        if choice == "native":
            raise ImportError(
                "FREEFALL_BACKEND=native but the compiled extension is not available; "
                "reinstall the package with a C compiler present"
            ) from None
        return pure, "python"
    return _native, "native"


_impl, BACKEND = _select()

N_SEG = pure.N_SEG
N_JNT = pure.N_JNT
GRAVITY = pure.GRAVITY

fk = _impl.fk
fk_with_rates = _impl.fk_with_rates
mass_properties = _impl.mass_properties
aero_wrench = _impl.aero_wrench
rk4_step = _impl.rk4_step


def backend_name() -> str:
    return BACKEND


def get_backend(name: str):
    """Return a specific backend module (for tests and the benchmark)."""
    if name == "python":
        return pure
    if name == "native":
        from . import _native  # type: ignore[attr-defined]

        return _native
    raise ValueError(name)

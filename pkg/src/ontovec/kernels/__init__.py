"""Numeric kernels with a compiled core and a pure-Python fallback.

The compiled backend (``_ckernels``, Cython) and the numpy backend
(``_pykernels``) export the same functions with the same array
contracts.  At import time the compiled one is preferred; set
``ONTOVEC_KERNELS=python`` or ``ONTOVEC_KERNELS=c`` to force a choice.

``active`` is the selected module, ``BACKEND`` its name.  Code that
wants a specific backend (tests, benchmarks) can import ``py_backend``
and ``c_backend`` directly; ``c_backend`` is ``None`` when the
extension has not been built.
"""

from __future__ import annotations

import os
import warnings

from . import _pykernels as py_backend

try:
    from . import _ckernels as c_backend  # type: ignore[attr-defined]
except ImportError:
    c_backend = None  # type: ignore[assignment]

_choice = os.environ.get("ONTOVEC_KERNELS", "auto").lower()
if _choice == "python":
    active = py_backend
elif _choice in ("c", "cython"):
    if c_backend is None:
        raise ImportError(
            "ONTOVEC_KERNELS=c requested but the compiled kernel extension "
            "is not built; run `pip install -e . --no-build-isolation`"
        )
    active = c_backend
else:
    if c_backend is None:
        warnings.warn(
            "compiled kernels unavailable; using the pure-Python backend "
            "(slower, identical results)",
            RuntimeWarning,
            stacklevel=2,
        )
    active = c_backend if c_backend is not None else py_backend

BACKEND = "cython" if active is c_backend and c_backend is not None else "python"

"""Backend selection for the simulator event loop.

The compiled ``_ckernel`` is preferred. Setting ``OHCA_PURE_PYTHON=1`` in
the environment forces the pure-Python loop.
"""

import os

from . import _pykernel

if os.environ.get("OHCA_PURE_PYTHON", "") not in ("", "0"):
    _ckernel = None
else:
    try:
        from . import _ckernel
    except ImportError:
        _ckernel = None

BACKEND = "cython" if _ckernel is not None else "python"


def simulate_calls(arrival_time, cell, holding, capacity, pool, horizon, record=None):
    if record is not None or _ckernel is None:
        return _pykernel.simulate_calls(
            arrival_time, cell, holding, capacity, pool, horizon, record=record
        )
    return _ckernel.simulate_calls(arrival_time, cell, holding, capacity, pool, horizon)

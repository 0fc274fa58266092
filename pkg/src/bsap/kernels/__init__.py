"""Backend selection for the hot statevector kernels.

Two interchangeable implementations live here:

* :mod:`bsap.kernels.numpy_backend` — vectorized NumPy, always available.
* :mod:`bsap.kernels.numba_backend` — ``@njit`` bitmask/stride loops.

The active backend is chosen once at import time from the ``BSAP_KERNELS``
environment variable:

* ``auto`` (default): use numba when it imports cleanly, else NumPy.
* ``numba``: require numba, raise if unavailable.
* ``numpy``: force the pure-NumPy path.

Both backends expose the same three functions with identical semantics
(amplitudes in, fresh amplitudes out; the bit of index ``i`` at position
``q`` is the state of qubit ``q``):

* ``apply_matrix(amps, mat, targets, num_qubits)``
* ``apply_diag_phase(amps, phase)``
* ``apply_pauli_sum(amps, flips, sign_masks, weights)``
"""

from __future__ import annotations

import os

_CHOICES = ("auto", "numba", "numpy")
_requested = os.environ.get("BSAP_KERNELS", "auto").strip().lower()
if _requested not in _CHOICES:
    raise RuntimeError(
        f"BSAP_KERNELS must be one of {_CHOICES}, got {_requested!r}"
    )

if _requested == "numpy":
    from . import numpy_backend as _active

    backend_name = "numpy"
else:
    try:
        from . import numba_backend as _active  # type: ignore[no-redef]

        backend_name = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import numpy_backend as _active  # type: ignore[no-redef]

        backend_name = "numpy"

apply_matrix = _active.apply_matrix
apply_diag_phase = _active.apply_diag_phase
apply_pauli_sum = _active.apply_pauli_sum


def active_backend():
    """Return the module object currently bound as the kernel backend."""
    return _active

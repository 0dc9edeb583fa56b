"""Numeric tolerances and desk-scale resource caps.

Everything here is a plain value; nothing reads global state except
:func:`max_qubits`, which honors the ``DECOLAB_MAX_QUBITS`` environment
variable (default 10, hard ceiling 12 = one dense 4096x4096 state).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

MAX_QUBITS_ENV = "DECOLAB_MAX_QUBITS"
DEFAULT_MAX_QUBITS = 10
HARD_MAX_QUBITS = 12

#: subsets are enumerated exhaustively; 2**10 reduced states per level is the limit
ENUMERATION_CAP = 10

#: assembled layer channels refuse to materialize more Kraus terms than this
KRAUS_TERM_CAP = 256

#: |trace - 1| beyond this after a channel application is treated as a bug, not drift
TRACE_RENORM_LIMIT = 1e-6

#: slack allowed on all inequality checks in reports (accumulated eigensolver error)
REPORT_SLACK = 1e-8


@dataclass(frozen=True)
class Tolerances:
    """Validation tolerances for states and channels.

    Defaults assume double precision and at most ~10^3 arithmetic layers,
    which keeps drift well below every threshold here.
    """

    herm: float = 1e-9
    trace: float = 1e-9
    psd: float = 1e-8
    eig: float = 1e-9
    kraus: float = 1e-9
    unitary: float = 1e-9


DEFAULT_TOLERANCES = Tolerances()


class ResourceLimitError(RuntimeError):
    """A desk-scale cap (qubit count, Kraus terms, enumeration size) was exceeded."""


def max_qubits() -> int:
    """Widest register any state or circuit may use.

    ``DECOLAB_MAX_QUBITS`` overrides the default of 10; values above the
    hard maximum of 12 are clamped, values below 1 rejected.
    """
    raw = os.environ.get(MAX_QUBITS_ENV)
    if raw is None:
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{MAX_QUBITS_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{MAX_QUBITS_ENV} must be >= 1, got {value}")
    return min(value, HARD_MAX_QUBITS)

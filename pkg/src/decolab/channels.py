"""Quantum operations in Kraus form and the depolarizing noise model.

A channel maps ``in_qubits`` to ``out_qubits`` via ``rho -> sum_j K_j rho
K_j^dagger`` with ``sum_j K_j^dagger K_j = I``; Kraus operators are stored
as ``2**out x 2**in`` matrices.  Fan-in-0 preparations and fan-out-0
trace-outs are ordinary channels here, so registers may grow and shrink.

Depolarization itself is applied in its affine form
``(1-eta) rho + eta tr(rho) I/dim`` one qubit at a time, which preserves the
trace exactly and never inflates a Kraus set; the equivalent four-operator
Pauli form exists only as a cross-check (:func:`depolarizing_kraus_channel`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import (
    DEFAULT_TOLERANCES,
    HARD_MAX_QUBITS,
    KRAUS_TERM_CAP,
    ResourceLimitError,
    Tolerances,
)
from .linalg import DensityMatrix, ValidationReport, settle, tensor

__all__ = [
    "GATES",
    "QuantumChannel",
    "channel_apply",
    "channel_from_unitary",
    "channel_tensor",
    "channel_validate",
    "depolarize_all",
    "depolarize_qubit",
    "depolarizing_kraus_channel",
    "identity_channel",
    "prep_channel",
    "random_channel",
]


def _log2_dim(dim: int, what: str) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"{what} dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True, repr=False)
class QuantumChannel:
    """A CPTP map given by its Kraus operators.

    Complete positivity is automatic in this representation; the one thing
    worth checking numerically is trace preservation, see
    :func:`channel_validate`.
    """

    in_qubits: int
    out_qubits: int
    kraus: tuple[np.ndarray, ...]
    label: str = ""

    def __post_init__(self) -> None:
        if not self.kraus:
            raise ValueError("a channel needs at least one Kraus operator")
        rows, cols = 2**self.out_qubits, 2**self.in_qubits
        ops = []
        for op in self.kraus:
            arr = np.asarray(op, dtype=np.complex128)
            if arr.shape != (rows, cols):
                raise ValueError(
                    f"Kraus operator shape {arr.shape} != ({rows}, {cols})"
                )
            arr = arr.copy()
            arr.setflags(write=False)
            ops.append(arr)
        object.__setattr__(self, "kraus", tuple(ops))

    def __repr__(self) -> str:
        name = self.label or "channel"
        return (
            f"QuantumChannel({name!r}, in={self.in_qubits}, out={self.out_qubits}, "
            f"terms={len(self.kraus)})"
        )


def channel_from_unitary(u: np.ndarray, label: str = "") -> QuantumChannel:
    """Wrap a unitary as the single-Kraus channel ``rho -> U rho U^dagger``."""
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary must be square, got {u.shape}")
    n = _log2_dim(u.shape[0], "unitary")
    residual = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if residual > DEFAULT_TOLERANCES.unitary:
        raise ValueError(f"matrix is not unitary (residual {residual:.3e})")
    return QuantumChannel(n, n, (u,), label=label)


def identity_channel(qubits: int) -> QuantumChannel:
    return QuantumChannel(
        qubits, qubits, (np.eye(2**qubits, dtype=np.complex128),), label="I" * max(qubits, 1)
    )


_KET0 = np.array([[1.0], [0.0]], dtype=np.complex128)
_KET1 = np.array([[0.0], [1.0]], dtype=np.complex128)
_KETP = np.array([[1.0], [1.0]], dtype=np.complex128) / math.sqrt(2)

_PREP_STATES = {"PREP0": _KET0, "PREP1": _KET1, "PREP_PLUS": _KETP}


def prep_channel(label: str) -> QuantumChannel:
    """Fan-in-0 gate adjoining one fresh qubit in a named pure state."""
    try:
        ket = _PREP_STATES[label]
    except KeyError:
        raise ValueError(
            f"unknown preparation {label!r}; expected one of {sorted(_PREP_STATES)}"
        ) from None
    return QuantumChannel(0, 1, (ket,), label=label)


def channel_apply(t: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    """Apply the channel to a whole register (``rho.qubits == t.in_qubits``)."""
    if rho.qubits != t.in_qubits:
        raise ValueError(
            f"channel expects {t.in_qubits} qubits, state has {rho.qubits}"
        )
    dim_out = 2**t.out_qubits
    out = np.zeros((dim_out, dim_out), dtype=np.complex128)
    for k in t.kraus:
        out += k @ rho.mat @ k.conj().T
    return DensityMatrix(t.out_qubits, settle(out))


def channel_validate(
    t: QuantumChannel, tol: Tolerances = DEFAULT_TOLERANCES
) -> ValidationReport:
    """Check Kraus completeness ``sum K^dagger K = I`` within ``tol.kraus``."""
    dim_in = 2**t.in_qubits
    acc = np.zeros((dim_in, dim_in), dtype=np.complex128)
    for k in t.kraus:
        acc += k.conj().T @ k
    residual = float(np.max(np.abs(acc - np.eye(dim_in))))
    if residual > tol.kraus:
        return ValidationReport((("completeness", residual),))
    return ValidationReport(())


def channel_tensor(parts: Sequence[QuantumChannel], label: str = "") -> QuantumChannel:
    """Combine channels acting on disjoint registers into one channel.

    The Kraus set is every tensor combination of the parts' operators, so the
    term count multiplies; assemblies beyond the configured cap are refused
    (apply the parts one at a time instead, the semantics are identical).
    """
    if not parts:
        raise ValueError("channel_tensor needs at least one part")
    terms = 1
    for p in parts:
        terms *= len(p.kraus)
    if terms > KRAUS_TERM_CAP:
        raise ResourceLimitError(
            f"assembled channel would need {terms} Kraus terms (cap {KRAUS_TERM_CAP})"
        )
    in_qubits = sum(p.in_qubits for p in parts)
    out_qubits = sum(p.out_qubits for p in parts)
    if max(in_qubits, out_qubits) > HARD_MAX_QUBITS:
        raise ResourceLimitError(
            f"assembled channel spans {max(in_qubits, out_qubits)} qubits "
            f"(cap {HARD_MAX_QUBITS})"
        )
    kraus = []
    for combo in itertools.product(*(p.kraus for p in parts)):
        op = combo[0]
        for k in combo[1:]:
            op = tensor(op, k)
        kraus.append(op)
    return QuantumChannel(in_qubits, out_qubits, tuple(kraus), label=label)


def depolarize_qubit(rho: DensityMatrix, q: int, eta: float) -> DensityMatrix:
    """Depolarize one qubit: with probability ``eta`` replace it by I/2.

    Affine evaluation of ``(1-eta) rho + eta (tr_q rho) (x) I/2`` with the
    fresh factor reinserted at position ``q``; the trace is preserved to
    floating point exactly.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    n = rho.qubits
    if not 0 <= q < n:
        raise ValueError(f"qubit {q} out of range for {n}-qubit state")
    t = rho.mat.reshape((2,) * (2 * n))
    t2 = np.moveaxis(t, (q, n + q), (0, 1))
    reduced = t2[0, 0] + t2[1, 1]
    out = (1.0 - eta) * t2
    out[0, 0] += (eta / 2.0) * reduced
    out[1, 1] += (eta / 2.0) * reduced
    mat = np.moveaxis(out, (0, 1), (q, n + q)).reshape(rho.dim, rho.dim)
    return DensityMatrix(n, mat)


def depolarize_all(rho: DensityMatrix, eta: float) -> DensityMatrix:
    """One noise round: independent depolarization of every qubit.

    Single-qubit depolarizers on distinct qubits commute, so the sweep order
    is irrelevant (and property-tested).
    """
    out = rho
    for q in range(rho.qubits):
        out = depolarize_qubit(out, q, eta)
    return out


def depolarizing_kraus_channel(eta: float) -> QuantumChannel:
    """Single-qubit depolarizer in four-operator Pauli form.

    Algebraically identical to :func:`depolarize_qubit`; kept as an
    independent route for cross-checking, not used by the simulator.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    i, x, y, z = (_PAULI[name] for name in ("I", "X", "Y", "Z"))
    return QuantumChannel(
        1,
        1,
        (
            math.sqrt(1.0 - 3.0 * eta / 4.0) * i,
            math.sqrt(eta / 4.0) * x,
            math.sqrt(eta / 4.0) * y,
            math.sqrt(eta / 4.0) * z,
        ),
        label=f"DEPOL({eta})",
    )


def random_channel(
    in_qubits: int,
    out_qubits: int,
    terms: int,
    rng: np.random.Generator,
) -> QuantumChannel:
    """Random CPTP map via a Haar-ish Stinespring isometry.

    Needs ``terms * 2**out_qubits >= 2**in_qubits`` so the isometry exists.
    """
    din, dout = 2**in_qubits, 2**out_qubits
    if terms * dout < din:
        raise ValueError("not enough Kraus terms for an isometry of this shape")
    a = rng.standard_normal((terms * dout, din)) + 1j * rng.standard_normal(
        (terms * dout, din)
    )
    q, _ = np.linalg.qr(a)
    kraus = tuple(q[j * dout : (j + 1) * dout, :] for j in range(terms))
    return QuantumChannel(in_qubits, out_qubits, kraus, label="RANDOM")


_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
_S = np.diag([1.0, 1j]).astype(np.complex128)
_T = np.diag([1.0, np.exp(1j * math.pi / 4)]).astype(np.complex128)

# two-qubit gates with qubit 0 as the more significant (left) factor
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)
_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(np.complex128)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)
_TOFFOLI = np.eye(8, dtype=np.complex128)
_TOFFOLI[[6, 7], :] = _TOFFOLI[[7, 6], :]


def _library() -> dict[str, QuantumChannel]:
    lib = {
        name: channel_from_unitary(_PAULI[name], label=name) for name in "IXYZ"
    }
    lib["H"] = channel_from_unitary(_H, label="H")
    lib["S"] = channel_from_unitary(_S, label="S")
    lib["T"] = channel_from_unitary(_T, label="T")
    lib["CNOT"] = channel_from_unitary(_CNOT, label="CNOT")
    lib["CZ"] = channel_from_unitary(_CZ, label="CZ")
    lib["SWAP"] = channel_from_unitary(_SWAP, label="SWAP")
    lib["TOFFOLI"] = channel_from_unitary(_TOFFOLI, label="TOFFOLI")
    lib["PREP0"] = prep_channel("PREP0")
    lib["PREP1"] = prep_channel("PREP1")
    lib["PREP_PLUS"] = prep_channel("PREP_PLUS")
    # trace-out discards its qubit; measurement-as-a-gate keeps the register
    # but kills the coherences, so everything stays inside the channel picture
    lib["TRACEOUT"] = QuantumChannel(
        1, 0, (_KET0.conj().T, _KET1.conj().T), label="TRACEOUT"
    )
    lib["DEPHASE"] = QuantumChannel(
        1, 1, (_KET0 @ _KET0.conj().T, _KET1 @ _KET1.conj().T), label="DEPHASE"
    )
    return lib


#: named gate library; keys are the exact, case-sensitive circuit-file names
GATES: dict[str, QuantumChannel] = _library()

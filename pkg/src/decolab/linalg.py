"""Dense complex linear algebra for qubit registers.

States are density matrices (Hermitian, PSD, trace 1) stored dense; qubit 0
is the most significant tensor factor, so basis index ``b`` encodes the bit
string ``b_0 b_1 ... b_{n-1}`` read left to right.  All functions are pure
and all values are treated as immutable (matrix buffers are write-locked).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import (
    DEFAULT_TOLERANCES,
    HARD_MAX_QUBITS,
    TRACE_RENORM_LIMIT,
    ResourceLimitError,
    Tolerances,
)

__all__ = [
    "DensityMatrix",
    "ValidationReport",
    "check_subset",
    "haar_unitary",
    "hermitian_eigenvalues",
    "hermitian_part",
    "partial_trace",
    "permutation_unitary",
    "permute_qubits",
    "random_density",
    "random_pure_state",
    "settle",
    "tensor",
    "tensor_all",
    "trace_distance",
    "validate_density",
]


def _as_square(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be square, got shape {m.shape}")
    return m


def _qubits_for_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def _frozen(m: np.ndarray) -> np.ndarray:
    out = np.array(m, dtype=np.complex128)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, repr=False)
class DensityMatrix:
    """An ``n``-qubit mixed state: Hermitian, PSD, trace-1 matrix of dim ``2**n``.

    The zero-qubit state is the 1x1 matrix ``[[1]]`` (a scalar register),
    which is what fan-in-0 preparation gates consume.
    """

    qubits: int
    mat: np.ndarray

    def __post_init__(self) -> None:
        m = _as_square(self.mat, "state matrix")
        if self.qubits < 0 or m.shape[0] != 2**self.qubits:
            raise ValueError(
                f"state with {self.qubits} qubits needs dim {2**max(self.qubits, 0)}, "
                f"got {m.shape[0]}"
            )
        object.__setattr__(self, "mat", _frozen(m))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __repr__(self) -> str:  # matrices are noise in tracebacks
        return f"DensityMatrix(qubits={self.qubits})"

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "DensityMatrix":
        m = _as_square(mat, "state matrix")
        return cls(_qubits_for_dim(m.shape[0]), m)

    @classmethod
    def basis_state(cls, qubits: int, index: int) -> "DensityMatrix":
        """|index><index| on the computational basis, index read as the bit string."""
        dim = 2**qubits
        if not 0 <= index < dim:
            raise ValueError(f"basis index {index} out of range for {qubits} qubits")
        m = np.zeros((dim, dim), dtype=np.complex128)
        m[index, index] = 1.0
        return cls(qubits, m)

    @classmethod
    def pure(cls, amplitudes: Sequence[complex]) -> "DensityMatrix":
        v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("zero vector is not a state")
        v = v / norm
        return cls(_qubits_for_dim(v.size), np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, qubits: int) -> "DensityMatrix":
        dim = 2**qubits
        return cls(qubits, np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def scalar(cls) -> "DensityMatrix":
        return cls(0, np.ones((1, 1), dtype=np.complex128))


@dataclass(frozen=True)
class ValidationReport:
    """Violated invariants with their measured residuals; empty means valid."""

    violations: tuple[tuple[str, float], ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def residual(self, name: str) -> float | None:
        for key, value in self.violations:
            if key == name:
                return value
        return None


def check_subset(indices: Iterable[int], qubits: int) -> tuple[int, ...]:
    """Validate a qubit subset: strictly increasing, all in ``range(qubits)``."""
    idx = tuple(int(i) for i in indices)
    for a, b in zip(idx, idx[1:]):
        if a >= b:
            raise ValueError(f"subset {idx} must be strictly increasing")
    if idx and (idx[0] < 0 or idx[-1] >= qubits):
        raise ValueError(f"subset {idx} out of range for {qubits} qubits")
    return idx


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the desk-scale dimension cap enforced.

    The left factor owns the more significant qubits.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    out_rows = a.shape[0] * b.shape[0]
    out_cols = (a.shape[1] if a.ndim == 2 else 1) * (b.shape[1] if b.ndim == 2 else 1)
    cap = 2**HARD_MAX_QUBITS
    if max(out_rows, out_cols) > cap:
        raise ResourceLimitError(
            f"tensor result {out_rows}x{out_cols} exceeds the {cap} dimension cap"
        )
    return np.kron(a, b)


def tensor_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    if not mats:
        return np.ones((1, 1), dtype=np.complex128)
    out = np.asarray(mats[0], dtype=np.complex128)
    for m in mats[1:]:
        out = tensor(out, m)
    return out


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def settle(mat: np.ndarray) -> np.ndarray:
    """Damp floating-point drift after a channel application.

    Re-symmetrizes to the Hermitian part and renormalizes the trace, but only
    if the drift is small (|trace - 1| <= 1e-6); larger drift signals a real
    bug and raises instead of being masked.
    """
    m = hermitian_part(np.asarray(mat, dtype=np.complex128))
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > TRACE_RENORM_LIMIT:
        raise ArithmeticError(f"state trace drifted to {tr!r}; refusing to renormalize")
    return m / tr


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on ``keep``, tracing out every other qubit.

    The result's qubit ``j`` is the input's ``keep[j]``; ``keep`` must be
    strictly increasing.  Keeping everything returns the state unchanged and
    keeping nothing yields the scalar state.
    """
    keep_idx = check_subset(keep, rho.qubits)
    n = rho.qubits
    if len(keep_idx) == n:
        return rho
    t = rho.mat.reshape((2,) * (2 * n))
    row = list(range(n))
    col = list(range(n, 2 * n))
    for q in range(n):
        if q not in keep_idx:
            col[q] = row[q]  # tie row/col index => sum the diagonal
    out_sub = [row[q] for q in keep_idx] + [col[q] for q in keep_idx]
    red = np.einsum(t, row + col, out_sub)
    d = 2 ** len(keep_idx)
    return DensityMatrix(len(keep_idx), red.reshape(d, d))


def hermitian_eigenvalues(
    m: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, ascending.

    Rejects inputs whose anti-Hermitian part exceeds ``tol.herm``; the solve
    itself runs on the symmetrized matrix.  Raises
    ``numpy.linalg.LinAlgError`` if the solver fails to converge.
    """
    m = _as_square(m)
    residual = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if residual > tol.herm:
        raise ValueError(f"matrix is not Hermitian (residual {residual:.3e})")
    return np.linalg.eigvalsh(hermitian_part(m))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the trace norm of ``rho - sigma``: the best distinguishing advantage."""
    if rho.qubits != sigma.qubits:
        raise ValueError(
            f"qubit count mismatch: {rho.qubits} vs {sigma.qubits}"
        )
    ev = hermitian_eigenvalues(rho.mat - sigma.mat)
    return 0.5 * float(np.sum(np.abs(ev)))


def validate_density(
    m: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES
) -> ValidationReport:
    """Check the density-matrix invariants; violations come back as data.

    Residuals: ``hermitian`` is the largest entry of ``m - m^dagger``,
    ``trace`` is ``|tr(m) - 1|``, ``psd`` is how far the lowest eigenvalue
    dips below zero.
    """
    m = _as_square(m, "density matrix candidate")
    violations: list[tuple[str, float]] = []
    herm_res = float(np.max(np.abs(m - m.conj().T)))
    if herm_res > tol.herm:
        violations.append(("hermitian", herm_res))
    trace_res = float(abs(np.trace(m) - 1.0))
    if trace_res > tol.trace:
        violations.append(("trace", trace_res))
    min_eig = float(np.linalg.eigvalsh(hermitian_part(m))[0])
    if min_eig < -tol.psd:
        violations.append(("psd", -min_eig))
    return ValidationReport(tuple(violations))


def _index_permutation(perm: Sequence[int]) -> np.ndarray:
    """Basis-index gather realizing the qubit relabeling ``new j = old perm[j]``."""
    n = len(perm)
    ar = np.arange(1 << n)
    src = np.zeros(1 << n, dtype=np.intp)
    for j, p in enumerate(perm):
        src |= ((ar >> (n - 1 - j)) & 1) << (n - 1 - p)
    return src


def _check_perm(perm: Sequence[int]) -> tuple[int, ...]:
    p = tuple(int(x) for x in perm)
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"{p} is not a permutation of 0..{len(p) - 1}")
    return p


def permutation_unitary(perm: Sequence[int]) -> np.ndarray:
    """Explicit unitary ``P`` with ``P rho P^dagger = permute_qubits(rho, perm)``."""
    p = _check_perm(perm)
    src = _index_permutation(p)
    dim = 1 << len(p)
    u = np.zeros((dim, dim), dtype=np.complex128)
    u[np.arange(dim), src] = 1.0
    return u


def permute_matrix(mat: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Conjugate by the qubit permutation unitary, evaluated as an index gather."""
    p = _check_perm(perm)
    src = _index_permutation(p)
    return mat[np.ix_(src, src)]


def permute_qubits(rho: DensityMatrix, perm: Sequence[int]) -> DensityMatrix:
    """Relabel qubits so the result's qubit ``j`` is the input's ``perm[j]``."""
    if len(perm) != rho.qubits:
        raise ValueError("permutation length must equal the qubit count")
    return DensityMatrix(rho.qubits, permute_matrix(rho.mat, perm))


def haar_unitary(qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary: QR of a complex Gaussian with phases fixed."""
    dim = 2**qubits
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    phases = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * phases


def random_pure_state(qubits: int, rng: np.random.Generator) -> DensityMatrix:
    dim = 2**qubits
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return DensityMatrix.pure(v)


def random_density(qubits: int, rng: np.random.Generator) -> DensityMatrix:
    """Full-rank random mixed state: normalized Wishart matrix M M^dagger / tr."""
    dim = 2**qubits
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = m @ m.conj().T
    return DensityMatrix(qubits, rho / np.trace(rho).real)

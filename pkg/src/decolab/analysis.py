"""Quantitative collapse analysis for noisy layered circuits.

Two ingredients meet here.  On the empirical side, ``d(i, n)`` is the
largest trace distance between any matching reduced states of at most ``n``
qubits at level ``i`` of two runs; it is computed exactly by enumerating
every qubit subset.  On the analytic side, the scalar recursion

    f_0 = 0,    f_{i+1} = (eta + (1 - eta) * f_i) ** k

yields the guarantee ``d <= 1 - f_j ** n`` once ``j`` noise rounds have
mixed the register, with ``theta = k * (1 - eta)`` governing the decay
``1 - f_j <= theta ** j`` whenever ``eta`` exceeds the threshold
``1 - 1/k``.  A level-``i`` state has seen ``max(i - 1, 0)`` noise rounds
(the first layer acts before any noise), and a single-qubit identity wire
saturates the aligned bound exactly, so the alignment is tight.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .channels import depolarize_all
from .circuit import Circuit, run_noisy
from .config import ENUMERATION_CAP, ResourceLimitError
from .linalg import (
    DensityMatrix,
    check_subset,
    partial_trace,
    permute_matrix,
    random_pure_state,
    tensor,
    trace_distance,
)

__all__ = [
    "BoundSeries",
    "DistanceReport",
    "ReportRow",
    "ThresholdInfo",
    "analytic_bound",
    "check_noise_action",
    "distance_profile",
    "distance_report",
    "empirical_d",
    "f_series",
    "gate_only_step_bound",
    "make_probes",
    "min_worthless_depth",
    "noise_rounds_at_level",
    "pairwise_profiles",
    "practically_worthless",
    "recursion_step_bound",
    "theta_and_threshold",
    "worthless",
]


# ---------------------------------------------------------------------------
# the scalar recursion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundSeries:
    """The recursion state: fan-in ``k``, rate ``eta``, coefficients ``f_0..f_t``."""

    k: int
    eta: float
    f: tuple[float, ...]

    @property
    def theta(self) -> float:
        return self.k * (1.0 - self.eta)

    @property
    def depth(self) -> int:
        return len(self.f) - 1


def f_series(k: int, eta: float, t: int) -> BoundSeries:
    """Iterate ``f_0 = 0, f_{i+1} = (eta + (1-eta) f_i)^k`` for ``t`` steps."""
    if k < 1:
        raise ValueError(f"fan-in k must be >= 1, got {k}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if t < 0:
        raise ValueError(f"depth must be >= 0, got {t}")
    f = [0.0]
    for _ in range(t):
        f.append((eta + (1.0 - eta) * f[-1]) ** k)
    return BoundSeries(k=k, eta=eta, f=tuple(f))


def analytic_bound(series: BoundSeries, i: int, n: int) -> float:
    """The guarantee ``1 - f_i ** n`` (with ``0 ** 0 = 1``) after ``i`` noise rounds."""
    if not 0 <= i <= series.depth:
        raise ValueError(f"round index {i} outside series of depth {series.depth}")
    if n < 0:
        raise ValueError(f"subset size must be >= 0, got {n}")
    return 1.0 - series.f[i] ** n


class ThresholdInfo(NamedTuple):
    theta: float
    threshold: float
    above: bool


def theta_and_threshold(k: int, eta: float) -> ThresholdInfo:
    """Contraction factor ``k (1 - eta)`` and the collapse threshold ``1 - 1/k``."""
    if k < 1:
        raise ValueError(f"fan-in k must be >= 1, got {k}")
    threshold = 1.0 - 1.0 / k
    return ThresholdInfo(theta=k * (1.0 - eta), threshold=threshold, above=eta > threshold)


#: distinct non-failure outcomes of the depth search
BELOW_THRESHOLD = "below-threshold"
NEVER_WITHIN_CAP = "never-within-cap"


def min_worthless_depth(
    k: int, eta: float, n: int, eps: float, max_depth: int = 10**6
) -> int | str:
    """Depth at which the recursion certifies collapse of every ``n``-qubit readout.

    Returns the smallest ``t`` with ``1 - f_t <= eps / n**2``, at which point
    the ``n``-qubit guarantee ``1 - f_t**n`` has dropped to roughly ``eps/n``;
    above the threshold this grows like ``2 ln(n) / ln(1/theta)``.  Noise at
    or below the threshold is a legitimate answer, not an error, and comes
    back as the string ``"below-threshold"``; searches exceeding ``max_depth``
    come back as ``"never-within-cap"``.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if n < 1:
        raise ValueError(f"readout size must be >= 1, got {n}")
    info = theta_and_threshold(k, eta)
    if not info.above:
        return BELOW_THRESHOLD
    target = eps / (n * n)
    f, t = 0.0, 0
    while 1.0 - f > target:
        f = (eta + (1.0 - eta) * f) ** k
        t += 1
        if t > max_depth:
            return NEVER_WITHIN_CAP
    return t


def recursion_step_bound(
    prev_profile: Sequence[float], k: int, eta: float, n: int
) -> float:
    """One noisy step: mix the previous level's profile binomially.

    Evaluates ``sum_m C(kn, m) eta^(kn-m) (1-eta)^m d_m`` where ``d_m`` is the
    previous level's distance profile, saturated at full register size.
    """
    last = len(prev_profile) - 1
    kn = k * n
    total = 0.0
    for m in range(kn + 1):
        w = math.comb(kn, m) * eta ** (kn - m) * (1.0 - eta) ** m
        if w:
            total += w * prev_profile[min(m, last)]
    return total


def gate_only_step_bound(prev_profile: Sequence[float], k: int, n: int) -> float:
    """One noiseless step: ``n`` output qubits depend on at most ``kn`` inputs."""
    last = len(prev_profile) - 1
    return prev_profile[min(k * n, last)]


def noise_rounds_at_level(level: int, depth: int, extra_noise_round: bool = False) -> int:
    """Noise rounds absorbed by the state recorded at ``level``.

    Level 0 is the input and level 1 the first layer's output, which no noise
    has touched yet; with the optional extra rounds the count shifts by the
    prepended round and the final level also absorbs the appended one.
    """
    if not extra_noise_round:
        return max(level - 1, 0)
    rounds = level
    if level == depth and depth > 0:
        rounds += 1
    return rounds


# ---------------------------------------------------------------------------
# exhaustive subset distances
# ---------------------------------------------------------------------------


def _require_enumerable(qubits: int) -> None:
    if qubits > ENUMERATION_CAP:
        raise ResourceLimitError(
            f"subset enumeration over {qubits} qubits exceeds the cap "
            f"{ENUMERATION_CAP}"
        )


def _subsets(qubits: int):
    """All subsets, sizes ascending and lexicographic within a size."""
    for size in range(qubits + 1):
        yield from itertools.combinations(range(qubits), size)


def _batched_reduce(stack: np.ndarray, qubits: int, keep: tuple[int, ...]) -> np.ndarray:
    """Partial trace of a stack of states down to ``keep``, batched."""
    t = stack.reshape((stack.shape[0],) + (2,) * (2 * qubits))
    row = [1 + q for q in range(qubits)]
    col = [1 + qubits + q for q in range(qubits)]
    for q in range(qubits):
        if q not in keep:
            col[q] = row[q]
    out = [0] + [row[q] for q in keep] + [col[q] for q in keep]
    red = np.einsum(t, [0] + row + col, out)
    d = 2 ** len(keep)
    return red.reshape(stack.shape[0], d, d)


_PAIR_CHUNK = 512


def pairwise_profiles(states: Sequence[DensityMatrix]) -> np.ndarray:
    """Distance profiles for every unordered pair of states.

    Returns an array ``p`` of shape ``(n_pairs, qubits + 1)`` where
    ``p[j, n]`` is the exact maximum trace distance between matching reduced
    states over all qubit subsets of size at most ``n``, for the pair ``j``
    in ``itertools.combinations`` order.  Sharing the reductions across pairs
    is what makes sweeping all basis-state pairs affordable.
    """
    if not states:
        return np.zeros((0, 1))
    qubits = states[0].qubits
    for s in states:
        if s.qubits != qubits:
            raise ValueError("all states must share one qubit count")
    _require_enumerable(qubits)
    count = len(states)
    iu, ju = np.triu_indices(count, 1)
    n_pairs = iu.size
    per_size = np.zeros((n_pairs, qubits + 1))
    if n_pairs == 0:
        return per_size
    stack = np.stack([s.mat for s in states])
    for keep in _subsets(qubits):
        if not keep:
            continue  # scalar reductions are all equal
        red = _batched_reduce(stack, qubits, keep)
        size = len(keep)
        for start in range(0, n_pairs, _PAIR_CHUNK):
            sl = slice(start, start + _PAIR_CHUNK)
            diff = red[iu[sl]] - red[ju[sl]]
            ev = np.linalg.eigvalsh(diff)
            dist = 0.5 * np.abs(ev).sum(axis=-1)
            np.maximum(per_size[sl, size], dist, out=per_size[sl, size])
    return np.maximum.accumulate(per_size, axis=1)


def distance_profile(rho: DensityMatrix, sigma: DensityMatrix) -> np.ndarray:
    """Profile ``p[n] = max over subsets of size <= n`` for one pair of states."""
    if rho.qubits != sigma.qubits:
        raise ValueError(f"qubit count mismatch: {rho.qubits} vs {sigma.qubits}")
    return pairwise_profiles([rho, sigma])[0]


def empirical_d(rho: DensityMatrix, sigma: DensityMatrix, n: int) -> float:
    """Exact ``max_{|A| <= n} D(rho|_A, sigma|_A)`` by full enumeration.

    The empty subset contributes 0 and the maximum saturates once ``n``
    reaches the register size.
    """
    if n < 0:
        raise ValueError(f"subset size must be >= 0, got {n}")
    profile = distance_profile(rho, sigma)
    return float(profile[min(n, rho.qubits)])


# ---------------------------------------------------------------------------
# the noise-action identity
# ---------------------------------------------------------------------------


def check_noise_action(rho: DensityMatrix, b: Sequence[int], eta: float) -> float:
    """Residual of the depolarize-then-restrict identity on subset ``b``.

    Compares the reduced state of the noised register against the binomial
    mixture ``sum_{A subset of b} eta^(|b|-|A|) (1-eta)^|A| (rho|_A (x)
    (I/2)^(|b|-|A|))`` with factors reassembled in ``b``'s index order, and
    returns the largest entrywise deviation.
    """
    b_idx = check_subset(b, rho.qubits)
    _require_enumerable(len(b_idx))
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    lhs = partial_trace(depolarize_all(rho, eta), b_idx).mat
    size = len(b_idx)
    rhs = np.zeros_like(lhs)
    for a_positions in _subsets(size):
        weight = eta ** (size - len(a_positions)) * (1.0 - eta) ** len(a_positions)
        if weight == 0.0:
            continue
        a_idx = tuple(b_idx[p] for p in a_positions)
        reduced = partial_trace(rho, a_idx).mat
        pad = size - len(a_positions)
        term = tensor(reduced, np.eye(2**pad, dtype=np.complex128) / 2**pad)
        blocks = list(a_positions) + [p for p in range(size) if p not in a_positions]
        perm = [blocks.index(j) for j in range(size)]
        rhs += weight * permute_matrix(term, perm)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# worthlessness detectors
# ---------------------------------------------------------------------------

DEFAULT_EPS = 0.01
_BASIS_PROBE_LIMIT = 6
_RANDOM_PROBE_COUNT = 32


def make_probes(spec: str, qubits: int, seed: int = 0) -> list[DensityMatrix]:
    """Build an input-state set from a probe spec.

    ``basis`` enumerates every computational basis state (register of at most
    6 qubits), ``pair:i,j`` picks two basis states, ``random:<count>`` draws
    seeded Haar-ish pure states.
    """
    if spec == "basis":
        if qubits > _BASIS_PROBE_LIMIT:
            raise ValueError(
                f"basis probes need at most {_BASIS_PROBE_LIMIT} qubits, got {qubits}"
            )
        return [DensityMatrix.basis_state(qubits, b) for b in range(2**qubits)]
    if spec.startswith("pair:"):
        parts = spec[len("pair:") :].split(",")
        if len(parts) != 2:
            raise ValueError(f"expected 'pair:i,j', got {spec!r}")
        try:
            i, j = (int(p) for p in parts)
        except ValueError:
            raise ValueError(f"expected 'pair:i,j', got {spec!r}") from None
        return [
            DensityMatrix.basis_state(qubits, i),
            DensityMatrix.basis_state(qubits, j),
        ]
    if spec.startswith("random:"):
        try:
            count = int(spec[len("random:") :])
        except ValueError:
            raise ValueError(f"expected 'random:<count>', got {spec!r}") from None
        if count < 1:
            raise ValueError("random probe count must be >= 1")
        rng = np.random.default_rng(seed)
        return [random_pure_state(qubits, rng) for _ in range(count)]
    raise ValueError(f"unknown probe spec {spec!r}")


def default_probes(qubits: int, seed: int = 0) -> list[DensityMatrix]:
    if qubits <= _BASIS_PROBE_LIMIT:
        return make_probes("basis", qubits, seed)
    return make_probes(f"random:{_RANDOM_PROBE_COUNT}", qubits, seed)


def _final_states(
    circuit: Circuit,
    eta: float,
    probes: Sequence[DensityMatrix],
    extra_noise_round: bool = False,
) -> list[DensityMatrix]:
    return [
        run_noisy(circuit, eta, p, extra_noise_round=extra_noise_round).levels[-1]
        for p in probes
    ]


def practically_worthless(
    circuit: Circuit,
    eta: float,
    eps: float = DEFAULT_EPS,
    probes: Sequence[DensityMatrix] | None = None,
    seed: int = 0,
) -> tuple[bool, float]:
    """Probe-set check that all inputs have become indistinguishable.

    Runs the noisy circuit on every probe and returns whether the largest
    pairwise output distance stays within ``eps``, along with that maximum.
    A distance above ``eps`` soundly witnesses that the circuit still
    computes something; a distance within ``eps`` certifies collapse only on
    the probe set (no maximization over all input states is attempted).
    """
    if probes is None:
        probes = default_probes(circuit.in_width, seed)
    finals = _final_states(circuit, eta, probes)
    worst = 0.0
    for a, b in itertools.combinations(finals, 2):
        worst = max(worst, trace_distance(a, b))
    return worst <= eps, worst


def worthless(
    circuit: Circuit,
    eta: float,
    eps: float = DEFAULT_EPS,
    probes: Sequence[DensityMatrix] | None = None,
    seed: int = 0,
) -> tuple[bool, float]:
    """Probe-set check that every output sits at the maximally mixed state.

    Same probe semantics as :func:`practically_worthless`; by the triangle
    inequality this implies the pairwise notion at twice the tolerance.
    """
    if probes is None:
        probes = default_probes(circuit.in_width, seed)
    finals = _final_states(circuit, eta, probes)
    worst = 0.0
    for state in finals:
        mixed = DensityMatrix.maximally_mixed(state.qubits)
        worst = max(worst, trace_distance(state, mixed))
    return worst <= eps, worst


# ---------------------------------------------------------------------------
# per-level report
# ---------------------------------------------------------------------------


class ReportRow(NamedTuple):
    level: int
    i_width: int
    n: int
    empirical_d: float
    bound: float
    slack: float


@dataclass(frozen=True)
class DistanceReport:
    """Per-level, per-subset-size distances against the analytic guarantee.

    ``empirical_d`` in each row is the maximum over all probe pairs; the
    bound column uses the noise rounds actually absorbed by that level.
    """

    k: int
    eta: float
    eps: float
    rows: tuple[ReportRow, ...]
    final_max_distance: float
    practically_worthless: bool

    def min_slack(self) -> float:
        return min((r.slack for r in self.rows), default=0.0)


def distance_report(
    circuit: Circuit,
    eta: float,
    probes: Sequence[DensityMatrix],
    eps: float = DEFAULT_EPS,
    extra_noise_round: bool = False,
) -> DistanceReport:
    """Run all probes and tabulate empirical vs analytic per (level, size)."""
    if len(probes) < 2:
        raise ValueError("a distance report needs at least two probe states")
    trajectories = [
        run_noisy(circuit, eta, p, extra_noise_round=extra_noise_round) for p in probes
    ]
    depth = circuit.depth
    series = f_series(circuit.k, eta, max(noise_rounds_at_level(depth, depth, extra_noise_round), 0))
    rows: list[ReportRow] = []
    final_max = 0.0
    for level in range(depth + 1):
        states = [t.levels[level] for t in trajectories]
        width = states[0].qubits
        profiles = pairwise_profiles(states)
        rounds = noise_rounds_at_level(level, depth, extra_noise_round)
        for n in range(width + 1):
            emp = float(profiles[:, n].max()) if profiles.size else 0.0
            bound = analytic_bound(series, rounds, n)
            rows.append(
                ReportRow(
                    level=level,
                    i_width=width,
                    n=n,
                    empirical_d=emp,
                    bound=bound,
                    slack=bound - emp,
                )
            )
        if level == depth and profiles.size:
            final_max = float(profiles[:, width].max())
    return DistanceReport(
        k=circuit.k,
        eta=eta,
        eps=eps,
        rows=tuple(rows),
        final_max_distance=final_max,
        practically_worthless=final_max <= eps,
    )

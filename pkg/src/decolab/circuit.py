"""Layered circuits over partition-respecting gates, plus a text format.

A circuit is a chain of layers; layer ``i`` maps an ``n_i``-qubit register to
an ``n_{i+1}``-qubit one.  Within a layer the gate input sets partition
``[n_i]`` exactly and the output sets partition ``[n_{i+1}]`` exactly, so a
layer is one big tensor product of channels.  Noisy execution interlaces a
round of per-qubit depolarization strictly *between* layers: the first layer
acts on the pristine input and no noise follows the last layer.

Text format (line oriented, ``#`` comments)::

    k 2
    width 2
    layer
    gate H [0] -> [0]
    layer width 3
    gate PREP0 [] -> [2]
    gate CNOT [0,1] -> [0,1]
    layer
    unitary 1+0i 0+0i 0+0i 1+0i [1] -> [1]

The header declares the maximum fan-in ``k`` and the input width ``n_0``.
``layer`` opens a block (output width defaults to the current width); each
gate names a library channel or spells out a unitary row-major with ``a+bi``
entries.  Qubits left unmentioned in a width-preserving layer get implicit
identity wires; width-changing layers must account for every index
explicitly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channels import GATES, QuantumChannel, channel_from_unitary, depolarize_all
from .config import ResourceLimitError, max_qubits
from .linalg import (
    DensityMatrix,
    check_subset,
    haar_unitary,
    permute_matrix,
    settle,
)

__all__ = [
    "Circuit",
    "CircuitError",
    "CircuitParseError",
    "CircuitLayer",
    "PlacedGate",
    "Trajectory",
    "apply_layer",
    "export_trajectory",
    "format_complex",
    "parse_circuit",
    "parse_circuit_file",
    "random_circuit",
    "run_ideal",
    "run_noisy",
    "serialize_circuit",
]


class CircuitError(ValueError):
    """A structural problem with a circuit (bad partition, widths, fan-in)."""


class CircuitParseError(CircuitError):
    """Malformed circuit text; carries the 1-based source line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, eq=False)
class PlacedGate:
    """A channel wired to explicit input and output qubit indices."""

    channel: QuantumChannel
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(int(i) for i in self.inputs))
        object.__setattr__(self, "outputs", tuple(int(i) for i in self.outputs))
        if len(self.inputs) != self.channel.in_qubits:
            raise CircuitError(
                f"gate {self.channel.label or '?'} takes {self.channel.in_qubits} "
                f"qubits but is wired to inputs {self.inputs}"
            )
        if len(self.outputs) != self.channel.out_qubits:
            raise CircuitError(
                f"gate {self.channel.label or '?'} emits {self.channel.out_qubits} "
                f"qubits but is wired to outputs {self.outputs}"
            )


def _check_partition(sets: Iterable[tuple[int, ...]], width: int, what: str) -> None:
    seen: dict[int, int] = {}
    for s in sets:
        for q in s:
            if not 0 <= q < width:
                raise CircuitError(f"{what} index {q} out of range for width {width}")
            if q in seen:
                raise CircuitError(f"{what} qubit {q} is claimed by two gates")
            seen[q] = 1
    missing = [q for q in range(width) if q not in seen]
    if missing:
        raise CircuitError(f"{what} qubit(s) {missing} are not covered by any gate")


@dataclass(frozen=True, eq=False)
class CircuitLayer:
    in_width: int
    out_width: int
    gates: tuple[PlacedGate, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            try:
                check_subset(g.inputs, self.in_width)
                check_subset(g.outputs, self.out_width)
            except CircuitError:
                raise
            except ValueError as exc:
                raise CircuitError(str(exc)) from None
        _check_partition((g.inputs for g in self.gates), self.in_width, "input")
        _check_partition((g.outputs for g in self.gates), self.out_width, "output")


@dataclass(frozen=True, eq=False)
class Circuit:
    """A depth-``t`` circuit: widths ``n_0 .. n_t`` chained through layers."""

    k: int
    in_width: int
    layers: tuple[CircuitLayer, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.k < 1:
            raise CircuitError(f"fan-in bound k must be >= 1, got {self.k}")
        width = self.in_width
        for i, layer in enumerate(self.layers):
            if layer.in_width != width:
                raise CircuitError(
                    f"layer {i} expects width {layer.in_width} but receives {width}"
                )
            for g in layer.gates:
                if g.channel.in_qubits > self.k:
                    raise CircuitError(
                        f"layer {i}: gate {g.channel.label or '?'} has fan-in "
                        f"{g.channel.in_qubits} > declared k={self.k}"
                    )
            width = layer.out_width

    @property
    def widths(self) -> tuple[int, ...]:
        out = [self.in_width]
        for layer in self.layers:
            out.append(layer.out_width)
        return tuple(out)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def width(self) -> int:
        return max(self.widths)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Per-level states of one run.

    ``levels[i]`` is the register after the first ``i`` layers, recorded
    before the noise round that precedes the next layer; ``levels[0]`` is
    the input and ``levels[-1]`` the final output.
    """

    levels: tuple[DensityMatrix, ...]
    eta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(self.levels))


def _apply_kraus_block(
    mat: np.ndarray,
    kraus: Sequence[np.ndarray],
    pre: int,
    din: int,
    dout: int,
    suf: int,
) -> np.ndarray:
    """Apply a channel to the middle factor of a pre (x) in (x) suf register."""
    t = mat.reshape(pre, din, suf, pre, din, suf)
    out = np.zeros((pre, dout, suf, pre, dout, suf), dtype=np.complex128)
    for k in kraus:
        out += np.einsum("ob,abcdef,pe->aocdpf", k, t, k.conj(), optimize=True)
    new_dim = pre * dout * suf
    return out.reshape(new_dim, new_dim)


def apply_layer(layer: CircuitLayer, rho: DensityMatrix) -> DensityMatrix:
    """One layer: permute into block order, apply each gate, permute back.

    Gates are applied to contiguous blocks one at a time; because they act on
    disjoint factors this equals materializing the full tensor-product
    channel, without ever inflating the Kraus set.
    """
    if rho.qubits != layer.in_width:
        raise CircuitError(
            f"layer expects {layer.in_width} qubits, state has {rho.qubits}"
        )
    in_order = [q for g in layer.gates for q in g.inputs]
    mat = permute_matrix(rho.mat, in_order) if in_order else rho.mat
    in_sizes = [g.channel.in_qubits for g in layer.gates]
    out_sizes = [g.channel.out_qubits for g in layer.gates]
    for idx, g in enumerate(layer.gates):
        pre = 2 ** sum(out_sizes[:idx])
        suf = 2 ** sum(in_sizes[idx + 1 :])
        mat = _apply_kraus_block(
            mat, g.channel.kraus, pre, 2 ** in_sizes[idx], 2 ** out_sizes[idx], suf
        )
    out_order = [q for g in layer.gates for q in g.outputs]
    if out_order:
        inverse = [0] * len(out_order)
        for pos, q in enumerate(out_order):
            inverse[q] = pos
        mat = permute_matrix(mat, inverse)
    return DensityMatrix(layer.out_width, settle(mat))


def run_ideal(circuit: Circuit, rho0: DensityMatrix) -> Trajectory:
    """Noiseless execution; records the state after every layer."""
    if rho0.qubits != circuit.in_width:
        raise CircuitError(
            f"circuit expects {circuit.in_width} input qubits, got {rho0.qubits}"
        )
    levels = [rho0]
    for layer in circuit.layers:
        levels.append(apply_layer(layer, levels[-1]))
    return Trajectory(tuple(levels), eta=0.0)


def run_noisy(
    circuit: Circuit,
    eta: float,
    rho0: DensityMatrix,
    extra_noise_round: bool = False,
) -> Trajectory:
    """Execution with a depolarization round between consecutive layers.

    The first layer sees the input unperturbed and no noise follows the last
    layer; ``extra_noise_round`` adds one round before the first layer and
    one after the last (a sensitivity knob, off by default).  Recorded level
    ``i`` is the state before the noise round feeding layer ``i``.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if rho0.qubits != circuit.in_width:
        raise CircuitError(
            f"circuit expects {circuit.in_width} input qubits, got {rho0.qubits}"
        )
    levels = [rho0]
    cur = rho0
    for i, layer in enumerate(circuit.layers):
        if i >= 1 or extra_noise_round:
            cur = depolarize_all(cur, eta)
        cur = apply_layer(layer, cur)
        levels.append(cur)
    if extra_noise_round and circuit.depth > 0:
        levels[-1] = depolarize_all(levels[-1], eta)
    return Trajectory(tuple(levels), eta=eta)


def random_circuit(k: int, width: int, depth: int, seed: int) -> Circuit:
    """Seeded random circuit: per layer, a random partition into blocks of
    size <= k, each block carrying a Haar-ish random unitary."""
    if k not in (1, 2, 3):
        raise ValueError(f"random circuits support k in {{1, 2, 3}}, got {k}")
    if width > max_qubits():
        raise ResourceLimitError(
            f"width {width} exceeds the configured cap {max_qubits()}"
        )
    rng = np.random.default_rng(seed)
    layers = []
    for _ in range(depth):
        remaining = list(rng.permutation(width))
        gates = []
        while remaining:
            size = int(rng.integers(1, min(k, len(remaining)) + 1))
            block = tuple(sorted(int(q) for q in remaining[:size]))
            remaining = remaining[size:]
            u = haar_unitary(size, rng)
            gates.append(PlacedGate(channel_from_unitary(u, label=f"U{size}"), block, block))
        gates.sort(key=lambda g: g.inputs[0])
        layers.append(CircuitLayer(width, width, tuple(gates)))
    return Circuit(k=k, in_width=width, layers=tuple(layers))


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_INDEX_RE = re.compile(r"\[([^\]]*)\]\s*->\s*\[([^\]]*)\]\s*$")


def format_complex(z: complex) -> str:
    """Full-precision ``a+bi`` rendering used by circuit files and state dumps.

    Components use the shortest decimal form that round-trips the double
    exactly, so parsing the text reproduces the value bit for bit.
    """
    z = complex(z)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{float(z.real)!r}{sign}{abs(float(z.imag))!r}i"


def _parse_complex(token: str, line: int) -> complex:
    try:
        return complex(token.replace("i", "j"))
    except ValueError:
        raise CircuitParseError(line, f"bad complex entry {token!r}") from None


def _parse_indices(text: str, line: int) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise CircuitParseError(line, f"bad index list [{text}]") from None


def _split_gate_line(rest: str, line: int) -> tuple[str, tuple[int, ...], tuple[int, ...]]:
    m = _INDEX_RE.search(rest)
    if m is None:
        raise CircuitParseError(line, "expected '[in indices] -> [out indices]'")
    head = rest[: m.start()].strip()
    return head, _parse_indices(m.group(1), line), _parse_indices(m.group(2), line)


class _LayerBuilder:
    def __init__(self, in_width: int, out_width: int, line: int):
        self.in_width = in_width
        self.out_width = out_width
        self.line = line
        self.gates: list[PlacedGate] = []

    def finish(self) -> CircuitLayer:
        # implicit identity wires only when they are unambiguous: the layer
        # keeps its width and the untouched index sets coincide
        used_in = {q for g in self.gates for q in g.inputs}
        used_out = {q for g in self.gates for q in g.outputs}
        missing_in = sorted(set(range(self.in_width)) - used_in)
        missing_out = sorted(set(range(self.out_width)) - used_out)
        gates = list(self.gates)
        if self.in_width == self.out_width and missing_in and missing_in == missing_out:
            for q in missing_in:
                gates.append(PlacedGate(GATES["I"], (q,), (q,)))
        gates.sort(key=lambda g: g.outputs[0] if g.outputs else (g.inputs[0] if g.inputs else -1))
        try:
            return CircuitLayer(self.in_width, self.out_width, tuple(gates))
        except CircuitError as exc:
            raise CircuitParseError(self.line, str(exc)) from None


def parse_circuit(text: str) -> Circuit:
    """Parse the line-oriented circuit format; see the module docstring."""
    k: int | None = None
    in_width: int | None = None
    width: int | None = None
    layers: list[CircuitLayer] = []
    builder: _LayerBuilder | None = None

    def close_builder() -> None:
        nonlocal builder
        if builder is not None:
            layers.append(builder.finish())
            builder = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        tokens = stripped.split()
        keyword = tokens[0]
        if keyword == "k":
            if k is not None:
                raise CircuitParseError(lineno, "duplicate 'k' header")
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise CircuitParseError(lineno, "expected 'k <int>'")
            k = int(tokens[1])
        elif keyword == "width" and in_width is None:
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise CircuitParseError(lineno, "expected 'width <int>'")
            in_width = int(tokens[1])
            width = in_width
            if in_width > max_qubits():
                raise ResourceLimitError(
                    f"line {lineno}: width {in_width} exceeds the cap {max_qubits()}"
                )
        elif keyword == "layer":
            if k is None or width is None:
                raise CircuitParseError(lineno, "'k' and 'width' headers must come first")
            close_builder()
            out_width = width
            if len(tokens) == 3 and tokens[1] == "width" and tokens[2].isdigit():
                out_width = int(tokens[2])
            elif len(tokens) != 1:
                raise CircuitParseError(lineno, "expected 'layer' or 'layer width <int>'")
            if out_width > max_qubits():
                raise ResourceLimitError(
                    f"line {lineno}: width {out_width} exceeds the cap {max_qubits()}"
                )
            builder = _LayerBuilder(width, out_width, lineno)
            width = out_width
        elif keyword == "gate":
            if builder is None:
                raise CircuitParseError(lineno, "'gate' outside of a layer block")
            head, ins, outs = _split_gate_line(stripped[len("gate") :], lineno)
            if head not in GATES:
                raise CircuitParseError(lineno, f"unknown gate {head!r}")
            channel = GATES[head]
            if channel.in_qubits > (k or 0):
                raise CircuitParseError(
                    lineno, f"gate {head} has fan-in {channel.in_qubits} > declared k={k}"
                )
            try:
                builder.gates.append(PlacedGate(channel, ins, outs))
            except CircuitError as exc:
                raise CircuitParseError(lineno, str(exc)) from None
        elif keyword == "unitary":
            if builder is None:
                raise CircuitParseError(lineno, "'unitary' outside of a layer block")
            head, ins, outs = _split_gate_line(stripped[len("unitary") :], lineno)
            entries = [_parse_complex(tok, lineno) for tok in head.split()]
            m = len(ins)
            if len(outs) != m:
                raise CircuitParseError(lineno, "unitary gates need |in| == |out|")
            if m > (k or 0):
                raise CircuitParseError(
                    lineno, f"unitary has fan-in {m} > declared k={k}"
                )
            dim = 2**m
            if len(entries) != dim * dim:
                raise CircuitParseError(
                    lineno,
                    f"unitary on {m} qubit(s) needs {dim * dim} entries, got {len(entries)}",
                )
            u = np.array(entries, dtype=np.complex128).reshape(dim, dim)
            try:
                channel = channel_from_unitary(u)
            except ValueError as exc:
                raise CircuitParseError(lineno, str(exc)) from None
            try:
                builder.gates.append(PlacedGate(channel, ins, outs))
            except CircuitError as exc:
                raise CircuitParseError(lineno, str(exc)) from None
        elif keyword == "width":
            raise CircuitParseError(
                lineno, "misplaced 'width' header (use 'layer width <int>' per layer)"
            )
        else:
            raise CircuitParseError(lineno, f"unrecognized directive {keyword!r}")
    close_builder()
    if k is None or in_width is None:
        raise CircuitParseError(0, "missing 'k' and/or 'width' header")
    try:
        return Circuit(k=k, in_width=in_width, layers=tuple(layers))
    except CircuitError as exc:
        raise CircuitParseError(0, str(exc)) from None


def parse_circuit_file(path: str) -> Circuit:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_circuit(fh.read())


def serialize_circuit(circuit: Circuit) -> str:
    """Canonical text for a circuit; parsing it back reproduces the circuit.

    Library gates print by name; anything else must be a single-Kraus square
    channel and prints as a full-precision ``unitary`` line.
    """
    lines = [f"k {circuit.k}", f"width {circuit.in_width}"]
    for layer in circuit.layers:
        if layer.out_width == layer.in_width:
            lines.append("layer")
        else:
            lines.append(f"layer width {layer.out_width}")
        for g in layer.gates:
            ins = ",".join(str(q) for q in g.inputs)
            outs = ",".join(str(q) for q in g.outputs)
            if g.channel.label in GATES:
                lines.append(f"gate {g.channel.label} [{ins}] -> [{outs}]")
            elif len(g.channel.kraus) == 1 and g.channel.in_qubits == g.channel.out_qubits:
                entries = " ".join(format_complex(z) for z in g.channel.kraus[0].flat)
                lines.append(f"unitary {entries} [{ins}] -> [{outs}]")
            else:
                raise CircuitError(
                    f"channel {g.channel.label!r} has no text form (not a library "
                    "gate or plain unitary)"
                )
    return "\n".join(lines) + "\n"


def export_trajectory(
    traj: Trajectory, csv_path: str, states_path: str | None = None
) -> None:
    """Write the per-level summary CSV and, optionally, the full states.

    The CSV has columns ``level,n_i``; the side file holds one line per level
    with the state's row-major entries in full-precision ``a+bi`` form.
    """
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("level,n_i\n")
        for i, level in enumerate(traj.levels):
            fh.write(f"{i},{level.qubits}\n")
    if states_path is not None:
        with open(states_path, "w", encoding="utf-8", newline="\n") as fh:
            for level in traj.levels:
                fh.write(" ".join(format_complex(z) for z in level.mat.flat))
                fh.write("\n")

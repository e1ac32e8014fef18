"""
Exact evaluation of compiled circuits, and an independent oracle that
contracts diagrams directly from dense word tensors.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np

from .ansatz import AnsatzConfig, CircuitIR, box_signature, qubit_width
from .diagram import CAP, CUP, WORD, Box, Diagram, SimpleType
from .errors import DegenerateDistribution, SizeCapExceeded, UnboundSymbol, ZeroPostselection
from .params import ParamStore, Symbol

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

# squared norm below which a post-selected vector counts as zero
ZERO_NORM = 1e-28


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def crz(theta: float) -> np.ndarray:
    return np.diag([1, 1, np.exp(-0.5j * theta), np.exp(0.5j * theta)])


class CircuitProgram:
    """
    A circuit prepared for repeated evaluation.  Parameters are looked up by
    position in a value vector; ``amplitudes`` accepts a batch of vectors
    with shape ``(B, P)`` and evaluates them together.
    """

    def __init__(self, c: CircuitIR, index: Mapping[Symbol, int]):
        self.circuit = c
        self.n = c.qubit_count
        ops = []
        for g in c.gates:
            if isinstance(g.param, Symbol):
                if g.param not in index:
                    raise UnboundSymbol(g.param)
                ref = ("sym", index[g.param])
            else:
                ref = ("const", 0.0 if g.param is None else float(g.param))
            ops.append((g.name, g.qubits, ref))
        self.ops = ops
        self._param_index = np.array(sorted({r[1] for _, _, r in ops if r[0] == "sym"}), dtype=int)

    def _angles(self, ref, values: np.ndarray) -> np.ndarray:
        kind, val = ref
        if kind == "sym":
            return values[:, val]
        return np.full(values.shape[0], val)

    def state(self, values: np.ndarray) -> np.ndarray:
        """Full pre-contraction state, shape ``(B, 2, ..., 2)``."""
        values = np.atleast_2d(np.asarray(values, dtype=float))
        batch, n = values.shape[0], self.n
        state = np.zeros((batch,) + (2,) * n, dtype=complex)
        state[(slice(None),) + (0,) * n] = 1.0
        for name, qubits, ref in self.ops:
            if name == "H":
                ax = qubits[0] + 1
                state = np.moveaxis(np.tensordot(H, state, axes=([1], [ax])), 0, ax)
                continue
            half = 0.5 * self._angles(ref, values)
            if name == "Rx":
                ax = qubits[0] + 1
                shape = (batch,) + (1,) * n
                c, s = np.cos(half).reshape(shape), np.sin(half).reshape(shape)
                state = c * state - 1j * s * np.flip(state, axis=ax)
            elif name == "Rz":
                shape = [batch] + [1] * n
                shape[qubits[0] + 1] = 2
                phase = np.stack([np.exp(-1j * half), np.exp(1j * half)], axis=1)
                state = state * phase.reshape(shape)
            elif name == "CRz":
                q0, q1 = qubits
                shape = [batch] + [1] * n
                shape[q0 + 1] = shape[q1 + 1] = 2
                phase = np.ones((batch, 2, 2), dtype=complex)
                phase[:, 1, 0] = np.exp(-1j * half)
                phase[:, 1, 1] = np.exp(1j * half)
                if q0 > q1:
                    phase = phase.transpose(0, 2, 1)
                state = state * phase.reshape(shape)
        return state

    def amplitudes(self, values: np.ndarray) -> np.ndarray:
        """Post-selected amplitudes on the open wires, shape ``(B, 2**len(open))``."""
        state = self.state(values)
        labels = list(range(self.n))
        for block_a, block_b in self.circuit.contractions:
            for qa, qb in zip(block_a, block_b):
                ia, ib = labels.index(qa), labels.index(qb)
                state = np.trace(state, axis1=ia + 1, axis2=ib + 1)
                labels = [q for q in labels if q not in (qa, qb)]
        order = [labels.index(q) + 1 for q in self.circuit.open_wires]
        if len(order) != len(labels):
            raise ValueError("circuit leaves qubits neither open nor contracted")
        state = state.transpose([0] + order)
        return state.reshape(state.shape[0], -1)


def _values_for(c: CircuitIR, params: ParamStore) -> tuple[dict[Symbol, int], np.ndarray]:
    symbols = c.symbols
    for s in symbols:
        if s not in params:
            raise UnboundSymbol(s)
    index = {s: i for i, s in enumerate(symbols)}
    return index, np.array([[params[s] for s in symbols]], dtype=float).reshape(1, -1)


def evaluate_state(c: CircuitIR, params: ParamStore) -> np.ndarray:
    index, values = _values_for(c, params)
    return CircuitProgram(c, index).state(values)[0].reshape(-1)


def evaluate_amplitudes(c: CircuitIR, params: ParamStore) -> np.ndarray:
    index, values = _values_for(c, params)
    amps = CircuitProgram(c, index).amplitudes(values)[0]
    check_postselection(amps)
    return amps


def check_postselection(amps: np.ndarray) -> None:
    if not np.all(np.isfinite(amps)):
        raise ZeroPostselection("non-finite amplitudes")
    if float(np.sum(np.abs(amps) ** 2)) <= ZERO_NORM:
        raise ZeroPostselection("post-selection annihilates the state")


def distribution(amps: np.ndarray, k: int) -> np.ndarray:
    """Born probabilities of the first ``k`` outcomes, renormalised."""
    if amps.shape[-1] < k:
        raise ValueError(f"{amps.shape[-1]} outcomes cannot encode k={k} topics")
    check_postselection(amps)
    weights = np.abs(amps[:k]) ** 2
    total = float(weights.sum())
    if total <= ZERO_NORM:
        raise DegenerateDistribution(f"all of the first {k} amplitudes vanish")
    return weights / total


def probabilities(c: CircuitIR, params: ParamStore, k: int) -> np.ndarray:
    return distribution(evaluate_amplitudes(c, params), k)


# -- independent oracle -------------------------------------------------------

def _embed(op: np.ndarray, qubit: int, width: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for q in range(width):
        out = np.kron(out, op if q == qubit else np.eye(2))
    return out


def _controlled_rz(theta: float, control: int, target: int, width: int) -> np.ndarray:
    diag = np.ones(2 ** width, dtype=complex)
    for basis in range(2 ** width):
        bits = [(basis >> (width - 1 - q)) & 1 for q in range(width)]
        if bits[control]:
            diag[basis] = np.exp(-0.5j * theta) if bits[target] == 0 else np.exp(0.5j * theta)
    return np.diag(diag)


def word_unitary(box: Box, cfg: AnsatzConfig, params: ParamStore) -> np.ndarray:
    """Dense ``2^w x 2^w`` matrix of a word's ansatz circuit, built with Kronecker products."""
    w = max(qubit_width(box.dom, cfg), qubit_width(box.cod, cfg))
    sig = box_signature(box)

    def theta(i):
        return params[Symbol(box.name, sig, i)]

    if w == 1:
        return rx(theta(2)) @ rz(theta(1)) @ rx(theta(0))
    h_row = np.array([[1.0 + 0j]])
    for _ in range(w):
        h_row = np.kron(h_row, H)
    u = np.eye(2 ** w, dtype=complex)
    i = 0
    for _ in range(cfg.depth):
        u = h_row @ u
        for q in range(w - 1):
            u = _controlled_rz(theta(i), q, q + 1, w) @ u
            i += 1
    return h_row @ u


def word_tensor(box: Box, cfg: AnsatzConfig, params: ParamStore) -> np.ndarray:
    """Word tensor with axes ``cod wires..., dom wires...`` (one axis per wire)."""
    base = box.dagger() if box.is_dagger else box
    w_in, w_out = qubit_width(base.dom, cfg), qubit_width(base.cod, cfg)
    if w_in > w_out:
        raise ValueError(f"word {box.name!r} has more inputs than outputs")
    u = word_unitary(base, cfg, params)
    # columns with the fresh qubits in |0>
    mat = u.reshape(2 ** w_out, 2 ** w_in, 2 ** (w_out - w_in))[:, :, 0]
    shape = [2 ** cfg.width(t.base) for t in base.cod] + [2 ** cfg.width(t.base) for t in base.dom]
    tensor = mat.reshape(shape)
    if box.is_dagger:
        n_out = len(base.cod)
        axes = list(range(n_out, len(shape))) + list(range(n_out))
        tensor = tensor.conj().transpose(axes)
    return tensor


def contract_diagram(d: Diagram, box_tensor: Callable[[Box], np.ndarray],
                     dim: Callable[[SimpleType], int]) -> np.ndarray:
    """
    Dense tensor of a diagram with axes ``dom wires..., cod wires...``.

    Word boxes get ``box_tensor(box)`` (axes ``cod..., dom...``); cups and caps
    are identity matrices.  Layers are applied one at a time by summing over
    the wires each box consumes.
    """
    n_in = len(d.dom)
    tensor = np.array(1.0 + 0j)
    for t in d.dom:
        tensor = np.multiply.outer(tensor, np.eye(dim(t)))
    # interleaved (in0, out0, in1, out1, ...) -> (in..., out...)
    tensor = tensor.transpose(list(range(0, 2 * n_in, 2)) + list(range(1, 2 * n_in, 2)))
    for offset, box in d.layers:
        if box.kind == WORD:
            bt = box_tensor(box)
        else:
            pair = box.dom if box.kind == CUP else box.cod
            bt = np.eye(dim(pair[0]), dtype=complex)
        n_cod, n_dom = len(box.cod), len(box.dom)
        start = n_in + offset
        if n_dom:
            tensor = np.tensordot(tensor, bt, axes=(list(range(start, start + n_dom)),
                                                    list(range(n_cod, n_cod + n_dom))))
        else:
            tensor = np.multiply.outer(tensor, bt)
        # new axes sit at the end; move them to the box position
        total = tensor.ndim
        new_axes = list(range(total - n_cod, total))
        tensor = np.moveaxis(tensor, new_axes, list(range(start, start + n_cod)))
    return tensor


def total_qubits(d: Diagram, cfg: AnsatzConfig) -> int:
    return sum(max(qubit_width(b.dom, cfg), qubit_width(b.cod, cfg)) for b in d.words)


def brute_force_contract(d: Diagram, cfg: AnsatzConfig, params: ParamStore,
                         max_qubits: int = 14) -> np.ndarray:
    size = total_qubits(d, cfg)
    if size > max_qubits:
        raise SizeCapExceeded(f"{size} qubits exceed the oracle cap of {max_qubits}")

    def dim(t: SimpleType) -> int:
        return 2 ** cfg.width(t.base)

    tensors = {}

    def box_tensor(box: Box) -> np.ndarray:
        if box not in tensors:
            tensors[box] = word_tensor(box, cfg, params)
        return tensors[box]

    return contract_diagram(d, box_tensor, dim).reshape(-1)

"""
IQP ansatz: lowering simplified diagrams to parameterised circuits.

Each wire of base type ``n`` gets ``q_n`` qubits and each ``s`` wire gets
``q_s = ceil(log2 k)`` qubits.  A word box of width one receives an
Rx-Rz-Rx rotation; wider boxes receive ``depth`` layers of Hadamards and a
ladder of controlled-Rz rotations, closed by a final Hadamard row.  Cups
become post-selection (Bell effect) annotations on the paired qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .diagram import CAP, CUP, WORD, Box, Diagram, Ty
from .errors import CompileError
from .params import ParamStore, Symbol

GATES = ("H", "Rx", "Rz", "CRz")


@dataclass(frozen=True)
class AnsatzConfig:
    k: int = 2
    q_n: int = 1
    depth: int = 2

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"need at least two topics, got k={self.k}")
        if self.q_n < 1 or self.depth < 1:
            raise ValueError("q_n and depth must be at least 1")

    @property
    def q_s(self) -> int:
        return max(1, math.ceil(math.log2(self.k)))

    def width(self, base: str) -> int:
        if base == "n":
            return self.q_n
        if base == "s":
            return self.q_s
        raise CompileError(f"no qubit assignment for base type {base!r}")

    def header(self, seed: int) -> dict[str, int]:
        return {"k": self.k, "qn": self.q_n, "qs": self.q_s, "depth": self.depth, "seed": seed}


def qubit_width(ty: Ty, cfg: AnsatzConfig) -> int:
    return sum(cfg.width(t.base) for t in ty)


class Gate(NamedTuple):
    name: str
    qubits: tuple[int, ...]
    param: Symbol | float | None = None


@dataclass(frozen=True)
class CircuitIR:
    qubit_count: int
    gates: tuple[Gate, ...]
    contractions: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = ()
    open_wires: tuple[int, ...] = ()

    def __post_init__(self):
        for g in self.gates:
            if g.name not in GATES:
                raise CompileError(f"unknown gate {g.name!r}")
            if any(not 0 <= q < self.qubit_count for q in g.qubits):
                raise CompileError(f"gate {g} acts outside {self.qubit_count} qubits")
            if len(g.qubits) != (2 if g.name == "CRz" else 1) or len(set(g.qubits)) != len(g.qubits):
                raise CompileError(f"bad operands for {g}")
        seen = set(self.open_wires)
        for a, b in self.contractions:
            if len(a) != len(b):
                raise CompileError(f"contraction between unequal blocks {a} and {b}")
            for q in a + b:
                if q in seen:
                    raise CompileError(f"qubit {q} contracted twice or also open")
                seen.add(q)

    @property
    def symbols(self) -> tuple[Symbol, ...]:
        out = []
        for g in self.gates:
            if isinstance(g.param, Symbol) and g.param not in out:
                out.append(g.param)
        return tuple(out)


def box_signature(box: Box) -> str:
    if len(box.dom):
        return f"{box.dom.expr()}->{box.cod.expr()}"
    return box.cod.expr()


def parameter_count(width: int, depth: int) -> int:
    return 3 if width == 1 else depth * (width - 1)


def compile_word_box(box: Box, cfg: AnsatzConfig, store: ParamStore,
                     register: bool = True) -> CircuitIR:
    """
    Circuit for one word on local qubits ``0..w-1``, ``w = max(|dom|, |cod|)``.

    Inputs occupy the first qubits; the rest start in ``|0>``.  Outputs are
    the first ``|cod|`` qubits.  With ``register=False`` every symbol must
    already be in ``store`` (prediction), else :class:`UnknownWord`.
    """
    if box.kind != WORD:
        raise CompileError(f"cannot compile {box.kind} box as a word")
    if box.is_dagger:
        raise CompileError(f"daggered word {box.name!r} is not supported by the ansatz")
    w_in, w_out = qubit_width(box.dom, cfg), qubit_width(box.cod, cfg)
    if w_in > w_out:
        raise CompileError(f"word {box.name!r} has more inputs than outputs ({box.dom} -> {box.cod})")
    w = max(w_in, w_out)
    sig = box_signature(box)
    get = store.intern if register else store.require

    def sym(i: int) -> Symbol:
        return get(Symbol(box.name, sig, i))

    gates: list[Gate] = []
    if w == 1:
        gates = [Gate("Rx", (0,), sym(0)), Gate("Rz", (0,), sym(1)), Gate("Rx", (0,), sym(2))]
    elif w > 1:
        idx = 0
        for _ in range(cfg.depth):
            gates += [Gate("H", (q,)) for q in range(w)]
            for q in range(w - 1):
                gates.append(Gate("CRz", (q, q + 1), sym(idx)))
                idx += 1
        gates += [Gate("H", (q,)) for q in range(w)]
    return CircuitIR(w, tuple(gates), (), tuple(range(w_out)))


def compile_diagram(d: Diagram, cfg: AnsatzConfig, store: ParamStore,
                    register: bool = True) -> CircuitIR:
    if d.dom != Ty() or d.cod != Ty("s"):
        raise CompileError(f"expected a sentence diagram I -> s, got {d.dom} -> {d.cod}")
    n_qubits = 0
    wires: list[tuple[int, ...]] = []
    gates: list[Gate] = []
    contractions = []
    for offset, box in d.layers:
        consumed = wires[offset:offset + len(box.dom)]
        if box.kind == CUP:
            contractions.append((consumed[0], consumed[1]))
            del wires[offset:offset + 2]
            continue
        if box.kind == CAP:
            raise CompileError("cap survived simplification; cannot compile")
        frag = compile_word_box(box, cfg, store, register)
        inputs = [q for block in consumed for q in block]
        fresh = list(range(n_qubits, n_qubits + frag.qubit_count - len(inputs)))
        n_qubits += len(fresh)
        qmap = inputs + fresh
        gates += [Gate(g.name, tuple(qmap[q] for q in g.qubits), g.param) for g in frag.gates]
        outs, pos = [], 0
        for t in box.cod:
            width = cfg.width(t.base)
            outs.append(tuple(qmap[pos:pos + width]))
            pos += width
        wires[offset:offset + len(box.dom)] = outs
    (open_wires,) = wires
    return CircuitIR(n_qubits, tuple(gates), tuple(contractions), open_wires)


def to_qasm(c: CircuitIR, store: ParamStore) -> str:
    """OPENQASM 2.0 text with parameters bound; cups appear as comments."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{c.qubit_count}];"]
    for g in c.gates:
        if isinstance(g.param, Symbol):
            arg = f"({store[g.param]!r})"
        elif g.param is not None:
            arg = f"({float(g.param)!r})"
        else:
            arg = ""
        operands = ",".join(f"q[{q}]" for q in g.qubits)
        lines.append(f"{g.name.lower()}{arg} {operands};")
    for a, b in c.contractions:
        for qa, qb in zip(a, b):
            lines.append(f"// postselect q[{qa}] == q[{qb}]")
    lines.append("// output " + " ".join(f"q[{q}]" for q in c.open_wires))
    return "\n".join(lines) + "\n"

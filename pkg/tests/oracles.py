"""
Independent reference implementations used by the tests.

Nothing here reuses the package's search, simulation or gate code: planar
matchings are enumerated exhaustively, word circuits are built from matrix
exponentials of Pauli generators, and diagram semantics use random tensors.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy.linalg import expm

from vqtc.ansatz import box_signature
from vqtc.diagram import CAP, CUP, WORD, Box, Diagram, SimpleType, Ty, cap_box, cup_box
from vqtc.params import Symbol
from vqtc.sim import contract_diagram

# -- planar matchings ---------------------------------------------------------


def _pairs_ok(a: SimpleType, b: SimpleType) -> bool:
    return a.base == b.base and b.z - a.z == 1


def planar_matchings(flat, target) -> set[frozenset]:
    """
    Every non-crossing set of contractible pairs over ``flat`` whose unmatched
    elements spell ``target`` and are not nested under any pair.
    """
    flat = list(flat)
    target = list(target)

    @functools.lru_cache(maxsize=None)
    def full(i: int, j: int) -> tuple[frozenset, ...]:
        # perfect planar matchings of flat[i:j]
        if i == j:
            return (frozenset(),)
        out = []
        for m in range(i + 1, j, 2):
            if _pairs_ok(flat[i], flat[m]):
                for a in full(i + 1, m):
                    for b in full(m + 1, j):
                        out.append(a | b | {(i, m)})
        return tuple(out)

    @functools.lru_cache(maxsize=None)
    def top(i: int) -> tuple[tuple[frozenset, tuple[int, ...]], ...]:
        if i == len(flat):
            return ((frozenset(), ()),)
        out = [(p, (i,) + s) for p, s in top(i + 1)]
        for m in range(i + 1, len(flat), 2):
            if _pairs_ok(flat[i], flat[m]):
                for a in full(i + 1, m):
                    for p, s in top(m + 1):
                        out.append((a | p | {(i, m)}, s))
        return tuple(out)

    return {p for p, s in top(0) if [flat[k] for k in s] == target}


# -- random diagrams ----------------------------------------------------------

BASES = ("n", "s")


def random_simple(rng: np.random.Generator) -> SimpleType:
    return SimpleType(str(rng.choice(BASES)), int(rng.integers(-2, 3)))


def random_type(rng: np.random.Generator, lo: int = 0, hi: int = 2) -> Ty:
    return Ty(*(random_simple(rng) for _ in range(int(rng.integers(lo, hi + 1)))))


def random_diagram(rng: np.random.Generator, dom: Ty | None = None, steps: int | None = None,
                   max_width: int = 5) -> Diagram:
    """
    A well-typed diagram grown layer by layer from ``dom``: word boxes on
    random slices, free cups and caps, and inserted snakes (cap then cup in
    either orientation).
    """
    wires = list(dom if dom is not None else random_type(rng))
    start = Ty(*wires)
    layers: list[tuple[int, Box]] = []
    steps = int(rng.integers(0, 7)) if steps is None else steps

    def push(offset: int, box: Box) -> None:
        layers.append((offset, box))
        wires[offset:offset + len(box.dom)] = box.cod.items

    for _ in range(steps):
        roll = rng.random()
        cups = [i for i in range(len(wires) - 1) if wires[i + 1] == wires[i].r]
        room = max_width - len(wires)
        if roll < 0.2 and cups:
            i = int(rng.choice(cups))
            push(i, cup_box(wires[i]))
        elif roll < 0.35 and room >= 2:
            push(int(rng.integers(0, len(wires) + 1)), cap_box(random_simple(rng)))
        elif roll < 0.55 and wires and room >= 2:
            i = int(rng.integers(0, len(wires)))
            x = wires[i]
            if rng.random() < 0.5:
                push(i, cap_box(x))        # x x.l x
                push(i + 1, cup_box(x.l))
            else:
                push(i + 1, cap_box(x.r))  # x x.r x
                push(i, cup_box(x))
        else:
            width = int(rng.integers(0, min(2, len(wires)) + 1))
            i = int(rng.integers(0, len(wires) - width + 1))
            dom_ty = Ty(*wires[i:i + width])
            cod_ty = random_type(rng, 0, min(2, room + width))
            name = f"f{int(rng.integers(0, 4))}"
            if rng.random() < 0.2:
                box = Box(name, cod_ty, dom_ty, WORD).dagger()
            else:
                box = Box(name, dom_ty, cod_ty, WORD)
            push(i, box)
    return Diagram(start, Ty(*wires), tuple(layers))


def snake(x: SimpleType, orientation: int) -> Diagram:
    if orientation == 0:
        layers = ((0, cap_box(x)), (1, cup_box(x.l)))
    else:
        layers = ((1, cap_box(x.r)), (0, cup_box(x)))
    return Diagram(Ty(x), Ty(x), layers)


# -- diagram semantics with random tensors ------------------------------------


class RandomSemantics:
    """Assigns each word box a fixed random complex tensor of dimension 2 per wire."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._cache: dict[Box, np.ndarray] = {}

    def _base(self, box: Box) -> np.ndarray:
        if box not in self._cache:
            key = sum(ord(c) * 131 ** i for i, c in enumerate(str(box))) % 2 ** 32
            rng = np.random.default_rng([self.seed, key])
            shape = (2,) * (len(box.cod) + len(box.dom))
            self._cache[box] = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        return self._cache[box]

    def tensor(self, box: Box) -> np.ndarray:
        if not box.is_dagger:
            return self._base(box)
        base = box.dagger()
        t = self._base(base)
        n_out = len(base.cod)
        return t.conj().transpose(list(range(n_out, t.ndim)) + list(range(n_out)))

    def matrix(self, d: Diagram) -> np.ndarray:
        """Rows index the domain wires, columns the codomain wires."""
        t = contract_diagram(d, self.tensor, lambda _: 2)
        return t.reshape(2 ** len(d.dom), 2 ** len(d.cod))


def count_kind(d: Diagram, kind: str) -> int:
    return sum(1 for b in d.boxes if b.kind == kind)


def count_caps(d: Diagram) -> int:
    return count_kind(d, CAP)


def count_cups(d: Diagram) -> int:
    return count_kind(d, CUP)


# -- dense word circuits from Pauli generators --------------------------------

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_HAD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def _kron_all(ops) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def iqp_unitary(box: Box, width: int, depth: int, values) -> np.ndarray:
    """
    Word circuit on ``width`` qubits (qubit 0 most significant).  One qubit:
    ``Rx Rz Rx``; otherwise ``depth`` rounds of Hadamards and a CRz ladder,
    closed by a Hadamard row.  ``values`` maps symbols to angles.
    """
    sig = box_signature(box)

    def theta(i: int) -> float:
        return values[Symbol(box.name, sig, i)]

    if width == 1:
        rx = [expm(-0.5j * theta(i) * _X) for i in (0, 2)]
        rz = expm(-0.5j * theta(1) * _Z)
        return rx[1] @ rz @ rx[0]
    h_row = _kron_all([_HAD] * width)
    u = np.eye(2 ** width, dtype=complex)
    i = 0
    for _ in range(depth):
        u = h_row @ u
        for q in range(width - 1):
            ops = [np.eye(2)] * width
            ops = ops[:q] + [_P1, _Z] + ops[q + 2:]
            u = expm(-0.5j * theta(i) * _kron_all(ops)) @ u
            i += 1
    return h_row @ u

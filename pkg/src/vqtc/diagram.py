"""
Pregroup types and planar string diagrams.

A diagram is a domain, a codomain and a list of layers ``(offset, box)``:
each layer replaces ``box.dom`` in the running wire list, starting at
``offset``, by ``box.cod``.  Diagrams are immutable values; ``>>`` composes
in sequence and ``@`` in parallel.

>>> n, s = Ty("n"), Ty("s")
>>> parse_type("n.r s n.l")
Ty('n.r s n.l')
>>> (Diagram.id(n) @ Diagram.id(s)) == Diagram.id(n @ s)
True
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import CompositionError, DiagramError, TypeSyntaxError

ATOMIC_TYPES: set[str] = {"n", "s"}

WORD, CUP, CAP = "word", "cup", "cap"

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)((?:\.[lr])*)$")


def register_atomic_type(name: str) -> None:
    """Extend the set of admissible base types (default ``{n, s}``)."""
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        raise TypeSyntaxError(f"invalid atomic type name {name!r}")
    ATOMIC_TYPES.add(name)


@dataclass(frozen=True, order=True)
class SimpleType:
    """An atomic type with adjoint order ``z`` (negative: left, positive: right)."""

    base: str
    z: int = 0

    def __post_init__(self):
        if self.base not in ATOMIC_TYPES:
            raise TypeSyntaxError(f"unknown base type {self.base!r}")

    @property
    def l(self) -> SimpleType:
        return SimpleType(self.base, self.z - 1)

    @property
    def r(self) -> SimpleType:
        return SimpleType(self.base, self.z + 1)

    def __str__(self) -> str:
        suffix = ".l" * -self.z if self.z < 0 else ".r" * self.z
        return self.base + suffix

    def __repr__(self) -> str:
        return f"SimpleType({str(self)!r})"


class Ty:
    """A pregroup type: a finite sequence of simple types, ``Ty()`` is the unit."""

    __slots__ = ("items",)

    def __init__(self, *items: SimpleType | str):
        object.__setattr__(self, "items", tuple(
            SimpleType(x) if isinstance(x, str) else x for x in items))

    def __setattr__(self, name, value):
        raise AttributeError("Ty is immutable")

    def __matmul__(self, other: Ty) -> Ty:
        return Ty(*self.items, *other.items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[SimpleType]:
        return iter(self.items)

    def __getitem__(self, key):
        if isinstance(key, slice):
            return Ty(*self.items[key])
        return self.items[key]

    def __eq__(self, other) -> bool:
        return isinstance(other, Ty) and self.items == other.items

    def __hash__(self) -> int:
        return hash(self.items)

    def __str__(self) -> str:
        return " ".join(map(str, self.items)) if self.items else "I"

    def __repr__(self) -> str:
        return f"Ty({' '.join(map(str, self.items))!r})"

    @property
    def l(self) -> Ty:
        return adjoint(self, "left")

    @property
    def r(self) -> Ty:
        return adjoint(self, "right")

    def expr(self) -> str:
        """Type-expression form accepted by :func:`parse_type` (unit is ``""``)."""
        return " ".join(map(str, self.items))


def parse_type(text: str) -> Ty:
    items = []
    for pos, token in enumerate(text.split()):
        match = _TOKEN.match(token)
        if match is None:
            raise TypeSyntaxError(f"malformed type token {token!r} at position {pos}")
        base, suffixes = match.groups()
        if base not in ATOMIC_TYPES:
            raise TypeSyntaxError(f"unknown base type {base!r} at position {pos}")
        z = suffixes.count(".r") - suffixes.count(".l")
        items.append(SimpleType(base, z))
    return Ty(*items)


def adjoint(ty: Ty, side: str) -> Ty:
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    step = -1 if side == "left" else 1
    return Ty(*(SimpleType(t.base, t.z + step) for t in reversed(ty.items)))


def _bendable(pair: Ty) -> bool:
    # Caps and daggered cups may come in either orientation; see cup_cap.
    return (len(pair) == 2 and pair[0].base == pair[1].base
            and abs(pair[0].z - pair[1].z) == 1)


@dataclass(frozen=True)
class Box:
    name: str
    dom: Ty
    cod: Ty
    kind: str = WORD
    is_dagger: bool = False

    def __post_init__(self):
        if self.kind not in (WORD, CUP, CAP):
            raise DiagramError(f"unknown box kind {self.kind!r}")
        if self.kind == CUP and (len(self.cod) or not _bendable(self.dom)):
            raise DiagramError(f"cup must map an adjoint pair to I, got {self.dom} -> {self.cod}")
        if self.kind == CAP and (len(self.dom) or not _bendable(self.cod)):
            raise DiagramError(f"cap must map I to an adjoint pair, got {self.dom} -> {self.cod}")

    def dagger(self) -> Box:
        kind = {WORD: WORD, CUP: CAP, CAP: CUP}[self.kind]
        flip = (not self.is_dagger) if self.kind == WORD else False
        return Box(self.name, self.cod, self.dom, kind, flip)

    def __str__(self) -> str:
        dag = "†" if self.is_dagger else ""
        return f"{self.name}{dag}: {self.dom} -> {self.cod}"


def _apply_layers(dom: Ty, layers: Iterable[tuple[int, Box]]) -> list[SimpleType]:
    wires = list(dom.items)
    for i, (offset, box) in enumerate(layers):
        width = len(box.dom)
        if offset < 0 or offset + width > len(wires) or tuple(wires[offset:offset + width]) != box.dom.items:
            raise DiagramError(
                f"layer {i} ({box}) does not fit wires {Ty(*wires)} at offset {offset}")
        wires[offset:offset + width] = box.cod.items
    return wires


@dataclass(frozen=True)
class Diagram:
    dom: Ty
    cod: Ty
    layers: tuple[tuple[int, Box], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple((int(o), b) for o, b in self.layers))
        wires = _apply_layers(self.dom, self.layers)
        if tuple(wires) != self.cod.items:
            raise DiagramError(f"layers end on {Ty(*wires)}, expected cod {self.cod}")

    @staticmethod
    def id(ty: Ty = Ty()) -> Diagram:
        return Diagram(ty, ty, ())

    @staticmethod
    def from_box(box: Box) -> Diagram:
        return Diagram(box.dom, box.cod, ((0, box),))

    def then(self, other: Diagram) -> Diagram:
        if self.cod != other.dom:
            raise CompositionError(self.cod, other.dom)
        return Diagram(self.dom, other.cod, self.layers + other.layers)

    def tensor(self, other: Diagram) -> Diagram:
        shift = len(self.cod)
        layers = self.layers + tuple((o + shift, b) for o, b in other.layers)
        return Diagram(self.dom @ other.dom, self.cod @ other.cod, layers)

    def dagger(self) -> Diagram:
        return Diagram(self.cod, self.dom,
                       tuple((o, b.dagger()) for o, b in reversed(self.layers)))

    __rshift__ = then
    __matmul__ = tensor

    def __lshift__(self, other: Diagram) -> Diagram:
        return other.then(self)

    @property
    def boxes(self) -> tuple[Box, ...]:
        return tuple(b for _, b in self.layers)

    @property
    def words(self) -> tuple[Box, ...]:
        return tuple(b for _, b in self.layers if b.kind == WORD)

    def running_wires(self) -> list[Ty]:
        """Wire list before each layer, followed by the final one."""
        out, wires = [], list(self.dom.items)
        for offset, box in self.layers:
            out.append(Ty(*wires))
            wires[offset:offset + len(box.dom)] = box.cod.items
        out.append(Ty(*wires))
        return out

    def render(self) -> str:
        """One line per layer: the wires left of the box, the box, the wires right of it."""
        lines = [f"dom: {self.dom}"]
        for (offset, box), wires in zip(self.layers, self.running_wires()):
            left = " ".join(map(str, wires[:offset].items))
            right = " ".join(map(str, wires[offset + len(box.dom):].items))
            label = box.kind.upper() if box.kind != WORD else box.name
            if box.is_dagger:
                label += "†"
            cell = f"[{label}: {box.dom} -> {box.cod}]"
            lines.append(" | ".join(x for x in (left, cell, right) if x))
        lines.append(f"cod: {self.cod}")
        return "\n".join(lines)

    def to_dot(self, name: str = "diagram") -> str:
        net = WireNet(self)
        out = [f"digraph {name} {{", "  rankdir=TB;", '  node [shape=box];']
        out.append('  dom [shape=point]; cod [shape=point];')
        for k, (_, box, _, _) in enumerate(net.layers):
            shape = "box" if box.kind == WORD else "plaintext"
            label = box.name if box.kind == WORD else box.kind
            out.append(f'  b{k} [label="{label}", shape={shape}];')
        src = {w: "dom" for w in net.dom_ids}
        for k, layer in enumerate(net.layers):
            for w in layer[3]:
                src[w] = f"b{k}"
        for k, layer in enumerate(net.layers):
            for w in layer[2]:
                out.append(f'  {src[w]} -> b{k} [label="{net.types[w]}"];')
        for w in net.out_ids:
            out.append(f'  {src[w]} -> cod [label="{net.types[w]}"];')
        out.append("}")
        return "\n".join(out)


Id = Diagram.id


def identity(ty: Ty) -> Diagram:
    return Diagram.id(ty)


def then(d1: Diagram, d2: Diagram) -> Diagram:
    return d1.then(d2)


def tensor(d1: Diagram, d2: Diagram) -> Diagram:
    return d1.tensor(d2)


def dagger(d: Diagram) -> Diagram:
    return d.dagger()


def cup_box(p: SimpleType) -> Box:
    return Box("cup", Ty(p, p.r), Ty(), CUP)


def cap_box(p: SimpleType) -> Box:
    return Box("cap", Ty(), Ty(p, p.l), CAP)


def cup_cap(p: SimpleType, which: str) -> Diagram:
    """
    ``cup``: ``p @ p.r -> I``; ``cap``: ``I -> p @ p.l``.

    Both are the pregroup contraction/expansion for ``p``.  Daggers swap the
    two, so a cap over ``p @ p.r`` (the dagger of a cup) is also admitted.
    """
    if which == "cup":
        return Diagram.from_box(cup_box(p))
    if which == "cap":
        return Diagram.from_box(cap_box(p))
    raise ValueError(f"which must be 'cup' or 'cap', got {which!r}")


class WireNet:
    """
    Mutable working copy of a diagram in which every wire segment has a
    persistent integer id, so layers can be interchanged and removed without
    losing track of connectivity.  Each layer is ``[offset, box, ins, outs]``.
    """

    def __init__(self, d: Diagram):
        self.dom = d.dom
        self.types: dict[int, SimpleType] = {}
        wires = []
        for t in d.dom:
            wires.append(self._fresh(t))
        self.dom_ids = tuple(wires)
        self.layers: list[list] = []
        for offset, box in d.layers:
            ins = tuple(wires[offset:offset + len(box.dom)])
            outs = tuple(self._fresh(t) for t in box.cod)
            wires[offset:offset + len(box.dom)] = outs
            self.layers.append([offset, box, ins, outs])
        self.out_ids = list(wires)

    def _fresh(self, t: SimpleType) -> int:
        wid = len(self.types)
        self.types[wid] = t
        return wid

    def copy(self) -> WireNet:
        new = object.__new__(WireNet)
        new.dom, new.types, new.dom_ids = self.dom, dict(self.types), self.dom_ids
        new.layers = [list(layer) for layer in self.layers]
        new.out_ids = list(self.out_ids)
        return new

    def to_diagram(self) -> Diagram:
        cod = Ty(*(self.types[w] for w in self.out_ids))
        return Diagram(self.dom, cod, tuple((o, b) for o, b, _, _ in self.layers))

    def consumer(self, wire: int) -> int | None:
        for k, layer in enumerate(self.layers):
            if wire in layer[2]:
                return k
        return None

    def producer(self, wire: int) -> int | None:
        for k, layer in enumerate(self.layers):
            if wire in layer[3]:
                return k
        return None

    def swap(self, k: int) -> bool:
        """Interchange layers ``k`` and ``k + 1`` if they act on disjoint wires."""
        a, box_a = self.layers[k][:2]
        b, box_b = self.layers[k + 1][:2]
        if b + len(box_b.dom) <= a:
            new_b, new_a = b, a - len(box_b.dom) + len(box_b.cod)
        elif b >= a + len(box_a.cod):
            new_b, new_a = b - len(box_a.cod) + len(box_a.dom), a
        else:
            return False
        first, second = self.layers[k + 1], self.layers[k]
        first[0], second[0] = new_b, new_a
        self.layers[k], self.layers[k + 1] = first, second
        return True

    def substitute(self, old: int, new: int) -> None:
        for layer in self.layers:
            if old in layer[2]:
                layer[2] = tuple(new if w == old else w for w in layer[2])
        self.out_ids = [new if w == old else w for w in self.out_ids]

    def bring_together(self, lo: int, hi: int, movable_hi=None) -> tuple[int, int]:
        """
        Interchange layers so that layer ``lo`` moves down and layer ``hi``
        moves up until they are adjacent or both are blocked.  Returns their
        new indices.
        """
        while True:
            moved = False
            while lo + 1 < hi and self.swap(lo):
                lo += 1
                moved = True
            while hi - 1 > lo and self.swap(hi - 1):
                hi -= 1
                moved = True
            if hi == lo + 1 or not moved:
                return lo, hi


def _yank_once(net: WireNet) -> WireNet | None:
    for k, (_, box, _, outs) in enumerate(net.layers):
        if box.kind != CAP:
            continue
        u, v = outs
        for keep, bent in ((u, v), (v, u)):
            j = net.consumer(bent)
            if j is None or net.layers[j][1].kind != CUP:
                continue
            ins = net.layers[j][2]
            # keep-side wire must stay outside the cup: bent sits on the inner end
            if keep in ins:
                continue
            if bent == v and ins[0] != v or bent == u and ins[1] != u:
                continue
            other = ins[1] if bent == v else ins[0]
            if net.types[other] != net.types[keep]:
                continue
            trial = net.copy()
            lo, hi = trial.bring_together(k, j)
            if hi != lo + 1:
                continue
            del trial.layers[hi]
            del trial.layers[lo]
            trial.substitute(keep, other)
            return trial
    return None


def normal_form(d: Diagram) -> Diagram:
    """Remove cap-cup zigzags (snake equations) until none can be yanked."""
    net = WireNet(d)
    while (nxt := _yank_once(net)) is not None:
        net = nxt
    return net.to_diagram()


def word(name: str, cod: Ty | str, dom: Ty | str = Ty()) -> Box:
    if isinstance(cod, str):
        cod = parse_type(cod)
    if isinstance(dom, str):
        dom = parse_type(dom)
    return Box(name, dom, cod, WORD)


def states(boxes: Sequence[Box]) -> Diagram:
    """Tensor product of word states, left to right."""
    out = Diagram.id()
    for box in boxes:
        out = out @ Diagram.from_box(box)
    return out

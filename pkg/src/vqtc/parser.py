"""
Lexicalised pregroup parsing over a controlled fragment of English.

Every token is looked up in a :class:`Lexicon`, the candidate types are
concatenated, and :func:`reduce` searches for a planar set of cups that
leaves exactly the target type (``s``) uncontracted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .diagram import CUP, Box, Diagram, SimpleType, Ty, cup_box, parse_type, states, word
from .errors import LexiconError, NoReduction, TypeSyntaxError, UnknownWord

GENDERS = ("f", "m", "x")
NUMBERS = ("sg", "pl")
SENTENCE = Ty("s")


@dataclass(frozen=True)
class Features:
    gender: str
    number: str


@dataclass
class Lexicon:
    entries: dict[str, list[Ty]] = field(default_factory=dict)
    features: dict[str, Features] = field(default_factory=dict)

    def key(self, token: str) -> str | None:
        """Lexicon key for ``token``: exact match first, then lowercased."""
        if token in self.entries:
            return token
        low = token.lower()
        return low if low in self.entries else None

    def lookup(self, token: str, position: int | None = None) -> tuple[str, list[Ty]]:
        key = self.key(token)
        if key is None:
            raise UnknownWord(token, position)
        return key, self.entries[key]

    def __contains__(self, token: str) -> bool:
        return self.key(token) is not None


def load_lexicon(source: str) -> Lexicon:
    """
    Parse lexicon text: ``word<TAB>type-expression[<TAB>gender,number]``,
    one entry per line, ``#`` starts a comment line.
    """
    lex = Lexicon()
    for lineno, raw in enumerate(source.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (2, 3) or not fields[0] or not fields[1].strip():
            raise LexiconError(f"line {lineno}: expected word<TAB>type[<TAB>features], got {line!r}")
        name = fields[0]
        try:
            ty = parse_type(fields[1])
        except TypeSyntaxError as err:
            raise LexiconError(f"line {lineno}: {err}") from None
        if not len(ty):
            raise LexiconError(f"line {lineno}: empty type for {name!r}")
        types = lex.entries.setdefault(name, [])
        if ty not in types:
            types.append(ty)
        if len(fields) == 3:
            codes = [c.strip() for c in fields[2].split(",")]
            if len(codes) != 2 or codes[0] not in GENDERS or codes[1] not in NUMBERS:
                raise LexiconError(f"line {lineno}: bad feature codes {fields[2]!r}")
            lex.features[name] = Features(*codes)
    if not lex.entries:
        raise LexiconError("empty lexicon")
    return lex


def default_lexicon() -> Lexicon:
    """The lexicon shipped with the package, covering every generated corpus."""
    text = resources.files("vqtc").joinpath("data/lexicon.tsv").read_text(encoding="utf-8")
    return load_lexicon(text)


def read_lexicon(path: str | Path | None) -> Lexicon:
    if path is None:
        return default_lexicon()
    return load_lexicon(Path(path).read_text(encoding="utf-8"))


def tokenize(sentence: str | Sequence[str]) -> tuple[str, ...]:
    """Whitespace split with terminal punctuation stripped; sequences pass through."""
    if not isinstance(sentence, str):
        return tuple(sentence)
    tokens = sentence.split()
    if tokens:
        last = tokens[-1].rstrip(".!?;,")
        tokens = tokens[:-1] + ([last] if last else [])
    return tuple(t.strip(",;") for t in tokens if t.strip(",;"))


@dataclass(frozen=True)
class CupPattern:
    pairs: frozenset[tuple[int, int]]
    survivors: tuple[int, ...]

    def ordered_pairs(self) -> list[tuple[int, int]]:
        """Pairs in an order in which each cup acts on adjacent wires."""
        return sorted(self.pairs, key=lambda p: (p[1] - p[0], p[0]))


def contractible(left: SimpleType, right: SimpleType) -> bool:
    return left.base == right.base and right.z == left.z + 1


def _flatten(types: Sequence[Ty]) -> list[SimpleType]:
    return [t for ty in types for t in ty]


def reduce(types: Sequence[Ty], target: Ty = SENTENCE) -> CupPattern:
    """
    First planar cup pattern, in leftmost-innermost order, whose uncontracted
    types equal ``target``.

    The flattened sequence is scanned left to right with a stack of open
    types.  At each position the search prefers, in order: contracting with
    the innermost open type, keeping the type as an output (only at top level,
    where an output wire cannot cross a cup), and leaving it open.
    """
    if not types:
        raise ValueError("reduce needs at least one type")
    flat = _flatten(types)
    goal = target.items
    failed: set = set()

    def search(i: int, stack: tuple[int, ...], kept: tuple[int, ...]):
        if i == len(flat):
            return ((), kept) if not stack and len(kept) == len(goal) else None
        memo = (i, tuple(flat[j] for j in stack), len(kept))
        if memo in failed:
            return None
        t = flat[i]
        if stack and contractible(flat[stack[-1]], t):
            found = search(i + 1, stack[:-1], kept)
            if found is not None:
                return (((stack[-1], i),) + found[0], found[1])
        if not stack and len(kept) < len(goal) and t == goal[len(kept)]:
            found = search(i + 1, stack, kept + (i,))
            if found is not None:
                return found
        found = search(i + 1, stack + (i,), kept)
        if found is not None:
            return found
        failed.add(memo)
        return None

    found = search(0, (), ())
    if found is None:
        raise NoReduction(flat)
    pairs, kept = found
    return CupPattern(frozenset(pairs), kept)


def pattern_to_diagram(boxes: Sequence[Box], pattern: CupPattern) -> Diagram:
    """Word states side by side, followed by one cup layer per pair."""
    diagram = states(boxes)
    alive = list(range(len(diagram.cod)))
    flat = list(diagram.cod)
    layers = list(diagram.layers)
    for i, j in pattern.ordered_pairs():
        pos = alive.index(i)
        if alive[pos + 1] != j:
            raise NoReduction(flat)
        layers.append((pos, cup_box(flat[i])))
        del alive[pos:pos + 2]
    cod = Ty(*(flat[i] for i in alive))
    return Diagram(Ty(), cod, tuple(layers))


def sentence_to_diagram(sentence: str | Sequence[str], lexicon: Lexicon,
                        target: Ty = SENTENCE) -> Diagram:
    tokens = tokenize(sentence)
    if not tokens:
        raise NoReduction([])
    looked_up = [lexicon.lookup(tok, pos) for pos, tok in enumerate(tokens)]
    names = [name for name, _ in looked_up]
    flat_first: list[SimpleType] = []
    for combo in itertools.product(*(types for _, types in looked_up)):
        try:
            pattern = reduce(combo, target)
        except NoReduction as err:
            flat_first = flat_first or list(err.types)
            continue
        boxes = [word(name, ty) for name, ty in zip(names, combo)]
        return pattern_to_diagram(boxes, pattern)
    raise NoReduction(flat_first)


def word_count(diagram: Diagram) -> int:
    return len(diagram.words)


def cup_count(diagram: Diagram) -> int:
    return sum(1 for b in diagram.boxes if b.kind == CUP)

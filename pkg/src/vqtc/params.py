"""Shared circuit parameters: symbols, the value store, and checkpoints."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import UnboundSymbol, UnknownWord, VqtcError


@dataclass(frozen=True, order=True)
class Symbol:
    """One rotation angle of one word, e.g. ``walks__n.r s__0``."""

    word: str
    signature: str
    index: int

    @property
    def name(self) -> str:
        return f"{self.word}__{self.signature}__{self.index}"

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, name: str) -> Symbol:
        parts = name.rsplit("__", 2)
        if len(parts) != 3 or not parts[2].isdigit():
            raise ValueError(f"not a symbol name: {name!r}")
        return cls(parts[0], parts[1], int(parts[2]))


class ParamStore:
    """
    Symbol table mapping every compiled symbol to a real value.

    Interning is the only mutation performed during compilation and is
    guarded by a lock; symbols are ordered by name, so the parameter vector
    layout does not depend on the order sentences were compiled in.
    """

    def __init__(self, values: Mapping[Symbol, float] | None = None,
                 rng_seed: int | None = None, iteration: int = 0):
        self._values: dict[Symbol, float] = dict(values or {})
        self.rng_seed = rng_seed
        self.iteration = iteration
        self._lock = threading.Lock()
        self._order: tuple[Symbol, ...] | None = None

    def intern(self, symbol: Symbol) -> Symbol:
        with self._lock:
            if symbol not in self._values:
                self._values[symbol] = 0.0
                self._order = None
        return symbol

    def require(self, symbol: Symbol) -> Symbol:
        if symbol not in self._values:
            raise UnknownWord(symbol.word)
        return symbol

    def __contains__(self, symbol: Symbol) -> bool:
        return symbol in self._values

    def __getitem__(self, symbol: Symbol) -> float:
        try:
            return self._values[symbol]
        except KeyError:
            raise UnboundSymbol(symbol) from None

    def __len__(self) -> int:
        return len(self._values)

    @property
    def symbols(self) -> tuple[Symbol, ...]:
        if self._order is None:
            self._order = tuple(sorted(self._values))
        return self._order

    def index(self) -> dict[Symbol, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def vector(self) -> np.ndarray:
        return np.array([self._values[s] for s in self.symbols], dtype=float)

    def with_vector(self, theta: np.ndarray, iteration: int | None = None) -> ParamStore:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (len(self),):
            raise ValueError(f"expected {len(self)} values, got shape {theta.shape}")
        values = {s: float(v) for s, v in zip(self.symbols, theta)}
        it = self.iteration if iteration is None else iteration
        return ParamStore(values, self.rng_seed, it)

    def initialize(self, seed: int) -> ParamStore:
        """Uniform draws in ``[0, 2π)``, one per symbol in name order."""
        rng = np.random.default_rng(seed)
        theta = rng.uniform(0.0, 2 * np.pi, size=len(self))
        return ParamStore(dict(zip(self.symbols, theta.tolist())), seed, 0)

    def items(self) -> Iterable[tuple[Symbol, float]]:
        return ((s, self._values[s]) for s in self.symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, ParamStore) and self._values == other._values

    def __repr__(self) -> str:
        return f"ParamStore({len(self)} symbols, iteration={self.iteration})"


HEADER_KEYS = ("k", "qn", "qs", "depth", "seed")


def format_value(x: float) -> str:
    return format(float(x), ".17g")


def dump_checkpoint(store: ParamStore, header: Mapping[str, object],
                    logits: Iterable[Iterable[float]] | None = None) -> str:
    lines = [f"#{key}={header[key]}" for key in HEADER_KEYS]
    for j, row in enumerate(logits or ()):
        lines.append(f"#logits[{j}]=" + ",".join(format_value(v) for v in row))
    lines += [f"{s.name}\t{format_value(v)}" for s, v in store.items()]
    return "\n".join(lines) + "\n"


def parse_checkpoint(text: str) -> tuple[ParamStore, dict[str, int], list[list[float]]]:
    header: dict[str, int] = {}
    logits: list[list[float]] = []
    values: dict[Symbol, float] = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            if key.startswith("logits["):
                logits.append([float(v) for v in val.split(",") if v])
            elif key in HEADER_KEYS:
                header[key] = int(val)
            continue
        name, sep, val = line.partition("\t")
        if not sep:
            raise VqtcError(f"checkpoint line {lineno}: expected symbol<TAB>value")
        values[Symbol.parse(name)] = float(val)
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise VqtcError(f"checkpoint missing header fields: {', '.join(missing)}")
    return ParamStore(values, header["seed"]), header, logits


def save_checkpoint(path: str | Path, store: ParamStore, header: Mapping[str, object],
                    logits=None) -> None:
    Path(path).write_bytes(dump_checkpoint(store, header, logits).encode("utf-8"))


def load_checkpoint(path: str | Path):
    return parse_checkpoint(Path(path).read_text(encoding="utf-8"))

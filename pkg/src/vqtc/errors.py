"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class VqtcError(Exception):
    """Base class; the CLI prints ``ClassName: message`` for these."""


class TypeSyntaxError(VqtcError, ValueError):
    pass


class DiagramError(VqtcError, ValueError):
    """A layer does not fit the running wire list."""


class CompositionError(DiagramError):
    def __init__(self, left, right):
        super().__init__(f"cannot compose: cod {left} != dom {right}")
        self.left, self.right = left, right


class LexiconError(VqtcError, ValueError):
    pass


class UnknownWord(VqtcError, KeyError):
    def __init__(self, token: str, position: int | None = None):
        where = "" if position is None else f" at position {position}"
        super().__init__(f"unknown word {token!r}{where}")
        self.token, self.position = token, position

    def __str__(self) -> str:
        return self.args[0]


class NoReduction(VqtcError, ValueError):
    def __init__(self, types):
        flat = " ".join(str(t) for t in types)
        super().__init__(f"no pregroup reduction to the target for: {flat}")
        self.types = tuple(types)


class CompileError(VqtcError, ValueError):
    pass


class UnboundSymbol(VqtcError, KeyError):
    def __init__(self, symbol):
        super().__init__(f"symbol {symbol} has no value")
        self.symbol = symbol

    def __str__(self) -> str:
        return self.args[0]


class ZeroPostselection(VqtcError, ArithmeticError):
    pass


class DegenerateDistribution(VqtcError, ArithmeticError):
    pass


class SizeCapExceeded(VqtcError, ValueError):
    pass


class UnresolvedPronoun(VqtcError, ValueError):
    def __init__(self, sentence: str, token: str):
        super().__init__(f"no antecedent for {token!r} in {sentence!r}")
        self.sentence, self.token = sentence, token


class CorpusError(VqtcError, ValueError):
    pass

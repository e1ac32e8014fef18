"""
Rewrite rules that shrink parsed diagrams before compilation.

Parameter accounting for "John walks in the park" after :func:`simplify`
with one qubit per wire and two IQP layers: John 3, walks 2, in 2, park 3,
so 10 in total.  A count of 11 only arises if "walks" is given three
parameters like a one-qubit word; under the width rule its ``n.r s`` state
spans two qubits and gets ``depth * (width - 1) = 2`` CRz angles.
"""

from __future__ import annotations

from .diagram import CUP, WORD, Box, Diagram, Ty, WireNet, cap_box, normal_form

DETERMINERS = frozenset({"the", "a", "an"})

_N = Ty("n")


class RewriteRule:
    """A named rule; calling it on a diagram applies it everywhere it matches."""

    name = "rule"

    def matches(self, box: Box) -> bool:
        raise NotImplementedError

    def __call__(self, d: Diagram) -> Diagram:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<RewriteRule {self.name}>"


class DeterminerRule(RewriteRule):
    """Replace each determiner state ``I -> n n.l`` by a cap over ``n``."""

    name = "determiner"

    def matches(self, box: Box) -> bool:
        return (box.kind == WORD and not box.is_dagger and box.name.lower() in DETERMINERS
                and box.dom == Ty() and box.cod == _N @ _N.l)

    def __call__(self, d: Diagram) -> Diagram:
        cap = cap_box(_N[0])
        layers = tuple((o, cap if self.matches(b) else b) for o, b in d.layers)
        return Diagram(d.dom, d.cod, layers)


class PrepositionalPhraseRule(RewriteRule):
    """
    Turn a preposition state ``I -> x.r x n.l`` into a box ``n -> x.r x`` fed
    by the noun its ``n.l`` wire was cupped with; the cup disappears.
    """

    name = "prepositional_phrase"

    def matches(self, box: Box) -> bool:
        if box.kind != WORD or box.is_dagger or box.dom != Ty() or len(box.cod) != 3:
            return False
        xr, x, nl = box.cod
        return (x.z == 0 and x.base in ("n", "s") and xr == x.r and nl == _N[0].l)

    def _apply_once(self, net: WireNet, done: set[int]) -> WireNet | None:
        for k, (_, box, _, outs) in enumerate(net.layers):
            if k in done or not self.matches(box):
                continue
            j = net.consumer(outs[2])
            if j is None or net.layers[j][1].kind != CUP or net.layers[j][2][0] != outs[2]:
                continue
            obj = net.layers[j][2][1]
            trial = net.copy()
            lo, hi = trial.bring_together(k, j)
            # the object noun may be produced between the two: move it above
            p = trial.producer(obj)
            while hi != lo + 1 and p is not None and lo < p < hi and trial.swap(p - 1):
                p -= 1
                if p == lo:
                    lo += 1
                lo, hi = trial.bring_together(lo, hi)
                p = trial.producer(obj)
            if hi != lo + 1:
                continue
            offset, _, _, (r, m, _) = trial.layers[lo]
            new_box = Box(box.name, _N, box.cod[:2], WORD)
            trial.layers[lo:hi + 1] = [[offset, new_box, (obj,), (r, m)]]
            return trial
        return None

    def __call__(self, d: Diagram) -> Diagram:
        net = WireNet(d)
        while (nxt := self._apply_once(net, set())) is not None:
            net = nxt
        return net.to_diagram()


determiner = DeterminerRule()
prepositional_phrase = PrepositionalPhraseRule()
RULES = {r.name: r for r in (determiner, prepositional_phrase)}


def rewrite(d: Diagram, rule: RewriteRule | str) -> Diagram:
    if isinstance(rule, str):
        rule = RULES[rule]
    return rule(d)


def simplify(d: Diagram) -> Diagram:
    # normal_form after determiners so prepositions see directly wired nouns
    d = normal_form(determiner(d))
    return normal_form(prepositional_phrase(d))

"""
Text classification on top of sentence circuits.

A text is a bag of independent sentences, each with a trainable weight
(softmax of per-group logits, so the weights of a group sum to one).
Pronouns are first replaced by their antecedents using lexicon features.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ansatz import AnsatzConfig
from .errors import UnresolvedPronoun, VqtcError
from .params import ParamStore
from .parser import Lexicon, tokenize
from .spsa import SpsaConfig, spsa_update
from .trainer import EPS, Evaluator, HistoryRow, Pipeline, sentence_distribution

log = logging.getLogger(__name__)

# the logit block draws its perturbations from a separate stream
LOGIT_SEED_OFFSET = 7919

# pronoun -> (gender or None for any, number)
PRONOUNS = {
    "he": ("m", "sg"), "him": ("m", "sg"),
    "she": ("f", "sg"), "her": ("f", "sg"),
    "it": ("x", "sg"),
    "they": (None, "pl"), "them": (None, "pl"),
}


@dataclass(frozen=True)
class Mention:
    token: str
    gender: str
    number: str
    sentence: int


@dataclass
class EntityRegistry:
    mentions: list[Mention] = field(default_factory=list)

    def add_sentence(self, tokens: Sequence[str], index: int, lexicon: Lexicon) -> None:
        for tok in tokens:
            key = lexicon.key(tok)
            if key is not None and key in lexicon.features:
                f = lexicon.features[key]
                self.mentions.append(Mention(tok, f.gender, f.number, index))

    def antecedent(self, pronoun: str) -> Mention | None:
        gender, number = PRONOUNS[pronoun.lower()]
        for m in reversed(self.mentions):
            if m.number == number and (gender is None or m.gender == gender):
                return m
        return None


def resolve_coreferences(text: Sequence[str], lexicon: Lexicon) -> list[str]:
    """
    Replace each pronoun by the most recent earlier mention that agrees in
    gender and number.  Sentences without pronouns are returned unchanged.
    """
    registry = EntityRegistry()
    out = []
    for i, sentence in enumerate(text):
        words = sentence.split()
        changed = False
        for w, raw in enumerate(words):
            core = raw.rstrip(".!?,;")
            if core.lower() not in PRONOUNS:
                continue
            found = registry.antecedent(core)
            if found is None:
                raise UnresolvedPronoun(sentence, core)
            words[w] = found.token + raw[len(core):]
            changed = True
        resolved = " ".join(words) if changed else sentence
        registry.add_sentence(tokenize(resolved), i, lexicon)
        out.append(resolved)
    return out


def softmax(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    e = np.exp(v - v.max())
    return e / e.sum()


@dataclass
class TextGroup:
    index: int
    sentences: list[tuple[str, ...]]
    label: int
    weight_logits: np.ndarray | None = None

    def __post_init__(self):
        self.sentences = [tokenize(s) for s in self.sentences]
        if not self.sentences:
            raise VqtcError(f"text group {self.index} has no sentences")
        if self.weight_logits is None:
            self.weight_logits = np.zeros(len(self.sentences))
        self.weight_logits = np.asarray(self.weight_logits, dtype=float)
        if self.weight_logits.shape != (len(self.sentences),):
            raise VqtcError(f"group {self.index}: one logit per sentence required")

    @property
    def weights(self) -> np.ndarray:
        return softmax(self.weight_logits)


def make_groups(texts: Sequence[Sequence[str]], labels: Sequence[int], lexicon: Lexicon | None = None,
                resolve: bool = False) -> list[TextGroup]:
    groups = []
    for j, (text, label) in enumerate(zip(texts, labels)):
        sentences = list(text)
        if resolve:
            if lexicon is None:
                raise VqtcError("coreference resolution needs a lexicon")
            sentences = resolve_coreferences(sentences, lexicon)
        groups.append(TextGroup(j, sentences, label))
    return groups


def _weighted(groups: Sequence[TextGroup], logits: Sequence[np.ndarray], probs: np.ndarray,
              which: Sequence[Sequence[int]]) -> float:
    terms = []
    for g, v, rows in zip(groups, logits, which):
        w = softmax(v)
        for weight, u in zip(w, rows):
            terms.append(-weight * math.log(max(float(probs[u, g.label]), EPS)))
    return math.fsum(terms)


def _unique(groups: Sequence[TextGroup]):
    keys, pos, which = [], {}, []
    for g in groups:
        rows = []
        for s in g.sentences:
            if s not in pos:
                pos[s] = len(keys)
                keys.append(s)
            rows.append(pos[s])
        which.append(rows)
    return keys, which


def weighted_text_loss(groups: Sequence[TextGroup], params: ParamStore, circuits,
                       k: int | None = None, workers: int = 1) -> float:
    """``-Σ_j Σ_S W_S log max(P(label_j | C_S), ε)`` with ``W = softmax(logits_j)``."""
    keys, which = _unique(groups)
    k = k or max(g.label for g in groups) + 1
    ev = Evaluator([circuits[s] for s in keys], params.symbols, k, workers)
    probs = ev(params.vector())[0]
    return _weighted(groups, [g.weight_logits for g in groups], probs, which)


class _TextObjective:
    def __init__(self, ev: Evaluator, groups, which, n_params: int):
        self.ev, self.groups, self.which, self.n_params = ev, groups, which, n_params
        sizes = [len(g.sentences) for g in groups]
        self.splits = np.cumsum(sizes)[:-1]

    def logits(self, x: np.ndarray) -> list[np.ndarray]:
        return np.split(x[self.n_params:], self.splits)

    def _loss(self, x: np.ndarray, probs: np.ndarray) -> float:
        return _weighted(self.groups, self.logits(x), probs, self.which)

    def __call__(self, x: np.ndarray) -> float:
        return self._loss(x, self.ev(x[:self.n_params])[0])

    def pair(self, plus: np.ndarray, minus: np.ndarray) -> tuple[float, float]:
        probs = self.ev(np.stack([plus[:self.n_params], minus[:self.n_params]]))
        return self._loss(plus, probs[0]), self._loss(minus, probs[1])

    def accuracy(self, probs: np.ndarray) -> float:
        hits = 0
        for g, rows in zip(self.groups, self.which):
            mixture = probs[rows].mean(axis=0)
            hits += int(np.argmax(mixture)) == g.label
        return hits / len(self.groups)


def fit_text(groups: Sequence[TextGroup], lexicon: Lexicon, cfg: AnsatzConfig, scfg: SpsaConfig,
             resolve: bool = False, workers: int = 1, logit_gain: float = 1.0):
    """
    Jointly train circuit parameters and per-group weight logits.

    Each iteration is two SPSA half-steps over disjoint blocks: the circuit
    angles with the logits fixed, then the logits with the angles fixed.
    Perturbing the blocks separately keeps the large angle gradients from
    drowning the small logit gradients in the shared finite difference.

    Returns ``(store, logits, history)`` where ``logits[j]`` holds the final
    logits of group ``j``.
    """
    if resolve:
        groups = [TextGroup(g.index, resolve_coreferences([" ".join(s) for s in g.sentences], lexicon),
                            g.label) for g in groups]
    for g in groups:
        if not 0 <= g.label < cfg.k:
            raise VqtcError(f"group {g.index}: label {g.label} out of range for k={cfg.k}")
    pipe = Pipeline(lexicon, cfg)
    keys, which = _unique(groups)
    circuits = [pipe.circuit(s) for s in keys]
    store = pipe.store.initialize(scfg.seed)
    n_params = len(store)
    ev = Evaluator(circuits, store.symbols, cfg.k, workers)
    objective = _TextObjective(ev, groups, which, n_params)
    x = np.concatenate([store.vector()] + [np.zeros(len(g.sentences)) for g in groups])
    history = [_record(0, x, objective)]
    logit_cfg = replace(scfg, seed=scfg.seed + LOGIT_SEED_OFFSET, a=scfg.a * logit_gain)
    for t in range(scfg.max_iters):
        theta, logits = x[:n_params], x[n_params:]
        theta = spsa_update(theta, _Block(objective, logits), t, scfg)
        probs = ev(theta)[0]
        logits = spsa_update(logits, lambda v: objective._loss(np.concatenate([theta, v]), probs),
                             t, logit_cfg)
        x = np.concatenate([theta, logits])
        if (t + 1) % scfg.eval_every == 0 or t + 1 == scfg.max_iters:
            history.append(_record(t + 1, x, objective))
    final = store.with_vector(x[:n_params], iteration=scfg.max_iters)
    return final, [np.array(v) for v in objective.logits(x)], history


class _Block:
    """The text loss as a function of the circuit angles with the logits held fixed."""

    def __init__(self, objective: _TextObjective, logits: np.ndarray):
        self.objective, self.logits = objective, logits

    def __call__(self, theta: np.ndarray) -> float:
        return self.objective(np.concatenate([theta, self.logits]))

    def pair(self, plus: np.ndarray, minus: np.ndarray) -> tuple[float, float]:
        return self.objective.pair(np.concatenate([plus, self.logits]),
                                   np.concatenate([minus, self.logits]))


def _record(t: int, x: np.ndarray, objective: _TextObjective) -> HistoryRow:
    probs = objective.ev(x[:objective.n_params])[0]
    row = HistoryRow(t, objective._loss(x, probs), objective.accuracy(probs))
    log.info("iter %d loss %.6f train_acc %.3f", *row)
    return row


def text_distribution(text: Sequence[str], params: ParamStore, cfg: AnsatzConfig,
                      lexicon: Lexicon, resolve: bool = False) -> np.ndarray:
    """Uniform mixture of the member sentences' distributions."""
    sentences = resolve_coreferences(list(text), lexicon) if resolve else list(text)
    if not sentences:
        raise VqtcError("empty text")
    dists = [sentence_distribution(s, params, cfg, lexicon) for s in sentences]
    return np.mean(dists, axis=0)


def predict_text(text: Sequence[str], params: ParamStore, cfg: AnsatzConfig, lexicon: Lexicon,
                 resolve: bool = False) -> int:
    return int(np.argmax(text_distribution(text, params, cfg, lexicon, resolve)))

"""
Variational quantum sentence classification: compile every sentence,
minimise the negative log-likelihood of the true topics with SPSA over the
shared parameters, and predict topics of unseen sentences.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .ansatz import AnsatzConfig, CircuitIR, compile_diagram
from .diagram import Diagram
from .errors import UnknownWord, VqtcError
from .params import ParamStore, Symbol, format_value
from .parser import Lexicon, sentence_to_diagram, tokenize
from .rewrite import simplify
from .sim import ZERO_NORM, CircuitProgram, distribution
from .spsa import SpsaConfig, spsa_update

log = logging.getLogger(__name__)

EPS = 1e-9

Tokens = tuple[str, ...]


@dataclass
class SentenceDataset:
    items: list[tuple[Tokens, int]]
    k: int

    def __post_init__(self):
        self.items = [(tokenize(s), int(y)) for s, y in self.items]
        for tokens, y in self.items:
            if not 0 <= y < self.k:
                raise VqtcError(f"label {y} out of range for k={self.k}: {' '.join(tokens)}")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def sentences(self) -> list[Tokens]:
        return [s for s, _ in self.items]

    @property
    def labels(self) -> np.ndarray:
        return np.array([y for _, y in self.items], dtype=int)

    def indicator(self) -> np.ndarray:
        """``L[i, j] = 1`` iff sentence ``j`` has topic ``i``."""
        out = np.zeros((self.k, len(self)), dtype=int)
        out[self.labels, np.arange(len(self))] = 1
        return out


class Pipeline:
    """Parse, simplify and compile sentences against one lexicon and store."""

    def __init__(self, lexicon: Lexicon, cfg: AnsatzConfig, store: ParamStore | None = None):
        self.lexicon = lexicon
        self.cfg = cfg
        self.store = ParamStore() if store is None else store
        self._diagrams: dict[Tokens, Diagram] = {}
        self._circuits: dict[tuple[Tokens, bool], CircuitIR] = {}

    def diagram(self, sentence) -> Diagram:
        tokens = tokenize(sentence)
        if tokens not in self._diagrams:
            self._diagrams[tokens] = simplify(sentence_to_diagram(tokens, self.lexicon))
        return self._diagrams[tokens]

    def circuit(self, sentence, register: bool = True) -> CircuitIR:
        key = (tokenize(sentence), register)
        if key not in self._circuits:
            self._circuits[key] = compile_diagram(self.diagram(key[0]), self.cfg, self.store, register)
        return self._circuits[key]


class Evaluator:
    """
    Batched distributions for a fixed list of circuits over one parameter
    layout.  Circuits whose post-selection fails yield an all-zero row.
    """

    def __init__(self, circuits: Sequence[CircuitIR], symbols: Sequence[Symbol], k: int,
                 workers: int = 1):
        index = {s: i for i, s in enumerate(symbols)}
        self.programs = [CircuitProgram(c, index) for c in circuits]
        self.k = k
        self.workers = workers
        self._warned: set[int] = set()

    def _one(self, i: int, values: np.ndarray) -> np.ndarray:
        amps = self.programs[i].amplitudes(values)
        out = np.zeros((values.shape[0], self.k))
        for b in range(values.shape[0]):
            try:
                out[b] = distribution(amps[b], self.k)
            except (ArithmeticError, VqtcError) as err:
                if i not in self._warned:
                    log.warning("circuit %d: %s; scored with the clamp value", i, err)
                    self._warned.add(i)
        return out

    def __call__(self, values: np.ndarray) -> np.ndarray:
        """Probabilities, shape ``(B, n_circuits, k)``."""
        values = np.atleast_2d(values)
        idx = range(len(self.programs))
        if self.workers > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                rows = list(pool.map(lambda i: self._one(i, values), idx))
        else:
            rows = [self._one(i, values) for i in idx]
        return np.stack(rows, axis=1)


def nll_terms(probs: np.ndarray, which: Sequence[int], labels: Sequence[int]) -> list[float]:
    return [-math.log(max(float(probs[u, y]), EPS)) for u, y in zip(which, labels)]


class _Problem:
    """Unique circuits of a dataset plus the item -> circuit mapping."""

    def __init__(self, pipe: Pipeline, sentences: Sequence[Tokens]):
        self.keys: list[Tokens] = []
        pos: dict[Tokens, int] = {}
        self.which = []
        for s in sentences:
            if s not in pos:
                pos[s] = len(self.keys)
                self.keys.append(s)
            self.which.append(pos[s])
        self.circuits = [pipe.circuit(s) for s in self.keys]


def nll_loss(data: SentenceDataset, params: ParamStore,
             circuits: Mapping[Tokens, CircuitIR], workers: int = 1) -> float:
    """``-Σ_S log max(P(label_S | C_S), ε)`` with ``ε = 1e-9``."""
    keys = list(dict.fromkeys(data.sentences))
    ev = Evaluator([circuits[s] for s in keys], params.symbols, data.k, workers)
    probs = ev(params.vector())[0]
    pos = {s: i for i, s in enumerate(keys)}
    terms = nll_terms(probs, [pos[s] for s in data.sentences], data.labels)
    return math.fsum(terms)


class HistoryRow(NamedTuple):
    iteration: int
    loss: float
    train_acc: float


class _Objective:
    """Loss over a parameter vector; ``pair`` evaluates both SPSA points in one batch."""

    def __init__(self, ev: Evaluator, which, labels):
        self.ev, self.which, self.labels = ev, list(which), list(labels)
        self.subset: list[int] | None = None

    def _loss(self, probs: np.ndarray) -> float:
        items = range(len(self.which)) if self.subset is None else self.subset
        return math.fsum(nll_terms(probs, [self.which[i] for i in items],
                                   [self.labels[i] for i in items]))

    def __call__(self, theta: np.ndarray) -> float:
        return self._loss(self.ev(theta)[0])

    def pair(self, plus: np.ndarray, minus: np.ndarray) -> tuple[float, float]:
        probs = self.ev(np.stack([plus, minus]))
        return self._loss(probs[0]), self._loss(probs[1])

    def accuracy(self, probs: np.ndarray) -> float:
        pred = np.argmax(probs, axis=-1)
        hits = sum(int(pred[u] == y) for u, y in zip(self.which, self.labels))
        return hits / len(self.labels)


def batch_subset(n: int, cfg: SpsaConfig, t: int) -> list[int] | None:
    if cfg.batch_size is None or cfg.batch_size >= n:
        return None
    rng = np.random.default_rng([cfg.seed, t, 1])
    return sorted(rng.permutation(n)[:cfg.batch_size].tolist())


def fit(data: SentenceDataset, lexicon: Lexicon, cfg: AnsatzConfig, scfg: SpsaConfig,
        workers: int = 1) -> tuple[ParamStore, list[HistoryRow]]:
    """Train all shared parameters with SPSA; returns the final store and history."""
    if data.k != cfg.k:
        raise VqtcError(f"dataset has k={data.k} but the ansatz was built for k={cfg.k}")
    pipe = Pipeline(lexicon, cfg)
    problem = _Problem(pipe, data.sentences)
    store = pipe.store.initialize(scfg.seed)
    ev = Evaluator(problem.circuits, store.symbols, cfg.k, workers)
    objective = _Objective(ev, problem.which, data.labels)
    theta = store.vector()
    history = [_record(0, theta, objective)]
    for t in range(scfg.max_iters):
        objective.subset = batch_subset(len(data), scfg, t)
        theta = spsa_update(theta, objective, t, scfg)
        objective.subset = None
        if (t + 1) % scfg.eval_every == 0 or t + 1 == scfg.max_iters:
            history.append(_record(t + 1, theta, objective))
    return store.with_vector(theta, iteration=scfg.max_iters), history


def _record(t: int, theta: np.ndarray, objective: _Objective) -> HistoryRow:
    probs = objective.ev(theta)[0]
    row = HistoryRow(t, objective._loss(probs), objective.accuracy(probs))
    log.info("iter %d loss %.6f train_acc %.3f", *row)
    return row


def sentence_distribution(sentence, params: ParamStore, cfg: AnsatzConfig,
                          lexicon: Lexicon) -> np.ndarray:
    circuit = Pipeline(lexicon, cfg, params).circuit(sentence, register=False)
    index = {s: i for i, s in enumerate(params.symbols)}
    amps = CircuitProgram(circuit, index).amplitudes(params.vector())[0]
    return distribution(amps, cfg.k)


def predict_from(probs: np.ndarray) -> int:
    return int(np.argmax(probs))


def predict(sentence, params: ParamStore, cfg: AnsatzConfig, lexicon: Lexicon) -> int:
    return predict_from(sentence_distribution(sentence, params, cfg, lexicon))


def accuracy(data: SentenceDataset, params: ParamStore, cfg: AnsatzConfig,
             lexicon: Lexicon) -> float:
    if not len(data):
        raise VqtcError("accuracy of an empty dataset is undefined")
    hits, unknown = 0, []
    for tokens, label in data.items:
        try:
            hits += predict(tokens, params, cfg, lexicon) == label
        except UnknownWord as err:
            unknown.append((" ".join(tokens), err.token))
    for sentence, token in unknown:
        log.warning("counted as wrong, unknown word %r in %r", token, sentence)
    return hits / len(data)


def write_metrics(path: str | Path, history: Iterable[HistoryRow]) -> None:
    lines = ["iter,loss,train_acc"]
    lines += [f"{r.iteration},{format_value(r.loss)},{format_value(r.train_acc)}" for r in history]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))

import logging
import math

import numpy as np
import pytest

from vqtc.ansatz import AnsatzConfig, CircuitIR, Gate
from vqtc.corpus import gen_records
from vqtc.errors import UnknownWord, VqtcError
from vqtc.params import ParamStore, Symbol
from vqtc.parser import tokenize
from vqtc.spsa import SpsaConfig
from vqtc.trainer import (
    EPS,
    Evaluator,
    Pipeline,
    SentenceDataset,
    accuracy,
    fit,
    nll_loss,
    nll_terms,
    predict,
    predict_from,
    sentence_distribution,
    write_metrics,
)

CFG = AnsatzConfig()
INTRANSITIVE = ["Alice sneezes", "Bob walks", "the man sleeps", "a dog walks"]


def compiled(sentences, lexicon, cfg=CFG):
    pipe = Pipeline(lexicon, cfg)
    circuits = {tokenize(s): pipe.circuit(s) for s in sentences}
    return pipe.store, circuits


def test_dataset_validation_and_indicator():
    data = SentenceDataset([("Alice sneezes", 1), ("Bob walks", 0)], 2)
    assert data.indicator().tolist() == [[0, 1], [1, 0]]
    with pytest.raises(VqtcError):
        SentenceDataset([("Alice sneezes", 2)], 2)


def test_uniform_predictions_give_n_ln2(lexicon):
    store, circuits = compiled(INTRANSITIVE, lexicon)
    data = SentenceDataset([(s, i % 2) for i, s in enumerate(INTRANSITIVE)], 2)
    assert nll_loss(data, store, circuits) == pytest.approx(len(INTRANSITIVE) * math.log(2), abs=1e-12)


def test_nll_terms_clamp():
    probs = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert nll_terms(probs, [0, 1], [0, 1]) == [0.0, 0.0]
    assert nll_terms(probs, [0], [1]) == [pytest.approx(-math.log(EPS))]
    assert -math.log(EPS) == pytest.approx(20.72, abs=0.01)


def test_failed_postselection_scores_as_clamp(caplog):
    sym = Symbol("x", "n", 0)
    bad = CircuitIR(3, (Gate("Rx", (0,), sym),), (((0,), (1,)),), (2,))
    ev = Evaluator([bad], [sym], 2)
    with caplog.at_level(logging.WARNING):
        probs = ev(np.array([math.pi]))[0]
    assert probs.tolist() == [[0.0, 0.0]]
    assert nll_terms(probs, [0], [0]) == [pytest.approx(-math.log(EPS))]
    assert any("clamp" in r.message for r in caplog.records)


def test_loss_is_order_invariant(lexicon):
    records = gen_records("food_it", 12, seed=3)
    items = [(r.payload, r.label) for r in records]
    store, circuits = compiled([s for s, _ in items], lexicon)
    store = store.initialize(5)
    forward = nll_loss(SentenceDataset(items, 2), store, circuits)
    backward = nll_loss(SentenceDataset(items[::-1], 2), store, circuits)
    assert forward == backward
    assert accuracy(SentenceDataset(items, 2), store, CFG, lexicon) == accuracy(
        SentenceDataset(items[::-1], 2), store, CFG, lexicon)


def test_worker_count_does_not_change_the_loss(lexicon):
    records = gen_records("four_topics", 16, seed=1)
    items = [(r.payload, r.label) for r in records]
    cfg = AnsatzConfig(k=4)
    store, circuits = compiled([s for s, _ in items], lexicon, cfg)
    store = store.initialize(0)
    data = SentenceDataset(items, 4)
    assert nll_loss(data, store, circuits, workers=1) == nll_loss(data, store, circuits, workers=4)


def test_shared_word_parameters(lexicon):
    sentences = ["Alice bites Bob", "Bob sneezes"]
    store, _ = compiled(sentences, lexicon)
    store = store.initialize(2)
    before = [sentence_distribution(s, store, CFG, lexicon) for s in sentences]
    bob = [s for s in store.symbols if s.word == "bob"][0]
    theta = store.vector()
    theta[store.index()[bob]] += 0.7
    moved = store.with_vector(theta)
    after = [sentence_distribution(s, moved, CFG, lexicon) for s in sentences]
    for b, a in zip(before, after):
        assert not np.allclose(a, b)


def test_fit_with_zero_iterations_returns_initial_parameters(lexicon):
    data = SentenceDataset([("Alice sneezes", 0), ("Bob walks", 1)], 2)
    store, history = fit(data, lexicon, CFG, SpsaConfig(max_iters=0, seed=4))
    pipe = Pipeline(lexicon, CFG)
    for s in data.sentences:
        pipe.circuit(s)
    assert store == pipe.store.initialize(4)
    assert [h.iteration for h in history] == [0]


def test_fit_is_deterministic_and_learns(lexicon):
    records = gen_records("food_it", 12, seed=0)
    data = SentenceDataset([(r.payload, r.label) for r in records], 2)
    scfg = SpsaConfig(max_iters=150, seed=1, eval_every=50)
    a_store, a_hist = fit(data, lexicon, CFG, scfg)
    b_store, b_hist = fit(data, lexicon, CFG, scfg)
    assert a_hist == b_hist
    assert np.array_equal(a_store.vector(), b_store.vector())
    assert [h.iteration for h in a_hist] == [0, 50, 100, 150]
    assert a_hist[-1].loss < a_hist[0].loss
    assert a_store.iteration == 150


def test_fit_with_mini_batches_is_deterministic(lexicon):
    records = gen_records("food_it", 10, seed=0)
    data = SentenceDataset([(r.payload, r.label) for r in records], 2)
    scfg = SpsaConfig(max_iters=30, seed=2, batch_size=4, eval_every=10)
    assert fit(data, lexicon, CFG, scfg)[1] == fit(data, lexicon, CFG, scfg)[1]


def test_fit_rejects_mismatched_topic_count(lexicon):
    data = SentenceDataset([("Alice sneezes", 0)], 3)
    with pytest.raises(VqtcError):
        fit(data, lexicon, CFG, SpsaConfig(max_iters=1))


def test_predict_argmax_and_ties():
    assert predict_from(np.array([0.9, 0.1])) == 0
    assert predict_from(np.array([0.5, 0.5])) == 0
    assert predict_from(np.array([0.2, 0.3, 0.5])) == 2


def test_predict_unknown_words(lexicon):
    store, _ = compiled(["Alice sneezes"], lexicon)
    with pytest.raises(UnknownWord):
        predict("zebra sneezes", store, CFG, lexicon)
    # known to the lexicon but never trained
    with pytest.raises(UnknownWord):
        predict("Bob sneezes", store, CFG, lexicon)


def test_accuracy(lexicon, caplog):
    # all-zero parameters predict topic 0 (a tie) for every intransitive sentence
    store, _ = compiled(INTRANSITIVE, lexicon)
    assert accuracy(SentenceDataset([(s, 0) for s in INTRANSITIVE], 2), store, CFG, lexicon) == 1.0
    half = SentenceDataset([("Alice sneezes", 0), ("Bob walks", 1)], 2)
    assert accuracy(half, store, CFG, lexicon) == 0.5
    with caplog.at_level(logging.WARNING):
        unknown = SentenceDataset([("Alice sneezes", 0), ("Mary sneezes", 0)], 2)
        assert accuracy(unknown, store, CFG, lexicon) == 0.5
    assert any("mary" in r.message.lower() for r in caplog.records)
    with pytest.raises(VqtcError):
        accuracy(SentenceDataset([], 2), store, CFG, lexicon)


def test_metrics_file(tmp_path, lexicon):
    data = SentenceDataset([("Alice sneezes", 0), ("Bob walks", 1)], 2)
    _, history = fit(data, lexicon, CFG, SpsaConfig(max_iters=3, eval_every=2))
    path = tmp_path / "m.csv"
    write_metrics(path, history)
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,loss,train_acc"
    assert [l.split(",")[0] for l in lines[1:]] == ["0", "2", "3"]
    assert float(lines[1].split(",")[1]) == history[0].loss

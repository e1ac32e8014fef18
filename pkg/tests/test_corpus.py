import hashlib
from collections import Counter

import pytest

from vqtc.corpus import (
    SEPARATOR,
    TASKS,
    CorpusRecord,
    dump_corpus,
    gen_corpus,
    gen_records,
    is_indicative,
    parse_corpus,
    read_corpus,
    topic_count,
)
from vqtc.errors import CorpusError


@pytest.mark.parametrize("task,mode,digest", [
    ("food_it", "sentence", "68ba628930e1e54397a36b404a2cdbcf177b528f0c19d5cf083e19a9cb695f66"),
    ("four_topics", "text", "63aa2face0ef9b74199d40c1f8c6300241851c8af98f3fc02e6976966cc1392f"),
    ("reviews", "text", "aad02aece2b23e5f7984a884a1c93db60c8257d5f3097c1a81bb1e6bd37b7728"),
])
def test_generated_bytes_are_stable(task, mode, digest):
    data = gen_corpus(task, 24, 7, mode)
    assert hashlib.sha256(data).hexdigest() == digest
    assert data == gen_corpus(task, 24, 7, mode)
    assert b"\r" not in data and data.endswith(b"\n")


@pytest.mark.parametrize("task", sorted(TASKS))
def test_labels_are_balanced(task):
    k = topic_count(task)
    counts = Counter(r.label for r in gen_records(task, 10 * k, seed=1))
    assert counts == {i: 10 for i in range(k)}


@pytest.mark.parametrize("task", sorted(TASKS))
def test_sentences_are_short_and_indicative(task):
    for r in gen_records(task, 40, seed=2):
        assert len(r.payload.split()) <= 6
        assert is_indicative(r.payload, task)


@pytest.mark.parametrize("task", sorted(TASKS))
def test_text_groups_have_one_indicative_member(task):
    for r in gen_records(task, 40, seed=3, mode="text"):
        assert 2 <= len(r.payload) <= 4
        assert sum(is_indicative(s, task) for s in r.payload) == 1


@pytest.mark.parametrize("task", sorted(TASKS))
def test_fillers_carry_no_label_information(task):
    k = topic_count(task)
    fillers = {i: Counter() for i in range(k)}
    for r in gen_records(task, 20 * k, seed=4, mode="text"):
        fillers[r.label].update(s for s in r.payload if not is_indicative(s, task))
    assert all(fillers[i] == fillers[0] for i in range(k))


@pytest.mark.parametrize("mode", ["sentence", "text"])
def test_round_trip(tmp_path, mode):
    records = gen_records("four_topics", 12, seed=5, mode=mode)
    path = tmp_path / "c.tsv"
    path.write_bytes(dump_corpus(records))
    assert read_corpus(path, mode) == records


def test_text_line_format():
    line = dump_corpus([CorpusRecord(1, ("the man walks", "a woman sleeps"))]).decode()
    assert line == f"1\tthe man walks{SEPARATOR}a woman sleeps\n"


def test_parse_skips_blank_and_comment_lines():
    records = parse_corpus("# comment\n\n0\tAlice sneezes\n1\tBob walks\n")
    assert [r.label for r in records] == [0, 1]


@pytest.mark.parametrize("text", ["0 Alice sneezes\n", "x\tAlice sneezes\n", "0\t\n"])
def test_malformed_lines(text):
    with pytest.raises(CorpusError, match="line 1"):
        parse_corpus(text)


def test_labels_must_be_dense():
    with pytest.raises(CorpusError):
        parse_corpus("0\tAlice sneezes\n2\tBob walks\n")


def test_generator_errors():
    with pytest.raises(CorpusError):
        gen_records("weather", 10, 0)
    with pytest.raises(CorpusError):
        gen_records("food_it", 1, 0)
    with pytest.raises(CorpusError):
        gen_records("food_it", 10, 0, mode="poem")

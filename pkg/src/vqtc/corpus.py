"""
Corpus files and a deterministic toy-corpus generator.

Sentence mode lines are ``label<TAB>sentence``; text mode lines are
``label<TAB>s1 ||| s2 ||| ...``.  Generated corpora only use words from the
shipped lexicon, so every sentence parses.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import CorpusError

SEPARATOR = " ||| "
MODES = ("sentence", "text")

_SUBJECTS = ("man", "woman", "person")

# per topic: verbs, objects, adjectives
_TOPICS = {
    "food": (("cooks", "prepares", "bakes"), ("meal", "dinner", "sauce", "bread"),
             ("tasty", "fresh", "delicious")),
    "it": (("runs", "debugs", "writes"), ("program", "application", "code", "software"),
           ("useful", "buggy", "fast")),
    "sport": (("kicks", "wins", "plays"), ("ball", "match", "game"), ("exciting", "rough")),
    "music": (("sings", "hums", "composes"), ("song", "melody", "tune"), ("loud", "beautiful")),
}

_TEMPLATES = (
    "{det} {subj} {verb} {det2} {obj}",
    "{subj} {verb} {adj} {obj}",
    "{det} {subj} {verb} {det2} {adj} {obj}",
    "{subj} {verb} {obj}",
)

_FILLER = (
    "the man walks",
    "a woman sleeps",
    "the person reads a book",
    "the man sees the dog",
    "a woman walks in the park",
    "the dog sleeps",
)

_REVIEW_ASPECTS = (("actors", "are"), ("cast", "is"), ("screenplay", "is"),
                   ("plot", "is"), ("dialogue", "is"))
_REVIEW_POLARITY = (("good", "great", "brilliant"), ("terrible", "awful", "boring"))
_REVIEW_FILLER = ("the directing is ok", "the film is long", "the directing is long",
                  "the film is ok")

TASKS = {
    "food_it": ("food", "it"),
    "four_topics": ("food", "it", "sport", "music"),
    "reviews": ("good", "poor"),
}


@dataclass(frozen=True)
class CorpusRecord:
    label: int
    payload: str | tuple[str, ...]


def topic_count(task: str) -> int:
    if task not in TASKS:
        raise CorpusError(f"unknown template {task!r}; choose from {', '.join(TASKS)}")
    return len(TASKS[task])


def _topic_sentence(rng: random.Random, task: str, label: int) -> str:
    if task == "reviews":
        aspect, copula = rng.choice(_REVIEW_ASPECTS)
        return f"the {aspect} {copula} {rng.choice(_REVIEW_POLARITY[label])}"
    verbs, objects, adjectives = _TOPICS[TASKS[task][label]]
    template = rng.choice(_TEMPLATES)
    return template.format(det=rng.choice(("the", "a")), det2=rng.choice(("the", "a")),
                           subj=rng.choice(_SUBJECTS), verb=rng.choice(verbs),
                           obj=rng.choice(objects), adj=rng.choice(adjectives))


def topic_words(task: str) -> frozenset[str]:
    """Words that only occur in topic-indicative sentences of ``task``."""
    topic_count(task)
    if task == "reviews":
        return frozenset(w for pol in _REVIEW_POLARITY for w in pol)
    return frozenset(w for t in TASKS[task] for group in _TOPICS[t] for w in group)


def is_indicative(sentence: str, task: str) -> bool:
    words = topic_words(task)
    return any(tok.lower() in words for tok in sentence.split())


def gen_records(task: str, size: int, seed: int, mode: str = "sentence") -> list[CorpusRecord]:
    k = topic_count(task)
    if mode not in MODES:
        raise CorpusError(f"unknown mode {mode!r}")
    if size < 2:
        raise CorpusError(f"corpus size must be at least 2, got {size}")
    rng = random.Random(seed)
    labels = [i % k for i in range(size)]
    rng.shuffle(labels)
    filler = _REVIEW_FILLER if task == "reviews" else _FILLER
    # the n-th group of every label shares one filler draw, so fillers carry
    # no label information
    rounds: list[list[str]] = []
    seen = [0] * k
    records = []
    for label in labels:
        sentence = _topic_sentence(rng, task, label)
        if mode == "sentence":
            records.append(CorpusRecord(label, sentence))
            continue
        n = seen[label]
        seen[label] += 1
        if n == len(rounds):
            rounds.append([rng.choice(filler) for _ in range(rng.randint(1, 3))])
        members = list(rounds[n])
        rng.shuffle(members)
        members.insert(rng.randint(0, len(members)), sentence)
        records.append(CorpusRecord(label, tuple(members)))
    return records


def dump_corpus(records: Sequence[CorpusRecord]) -> bytes:
    lines = []
    for r in records:
        payload = r.payload if isinstance(r.payload, str) else SEPARATOR.join(r.payload)
        lines.append(f"{r.label}\t{payload}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def gen_corpus(task: str, size: int, seed: int, mode: str = "sentence") -> bytes:
    return dump_corpus(gen_records(task, size, seed, mode))


def parse_corpus(data: bytes | str, mode: str = "sentence") -> list[CorpusRecord]:
    if mode not in MODES:
        raise CorpusError(f"unknown mode {mode!r}")
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    records = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        label, sep, payload = line.partition("\t")
        if not sep or not label.strip().isdigit() or not payload.strip():
            raise CorpusError(f"line {lineno}: expected label<TAB>payload")
        if mode == "text":
            members = tuple(p.strip() for p in payload.split("|||") if p.strip())
            records.append(CorpusRecord(int(label), members))
        else:
            records.append(CorpusRecord(int(label), payload.strip()))
    labels = {r.label for r in records}
    if records and labels != set(range(max(labels) + 1)):
        raise CorpusError(f"labels are not dense in 0..{max(labels)}: {sorted(labels)}")
    return records


def read_corpus(path: str | Path, mode: str = "sentence") -> list[CorpusRecord]:
    return parse_corpus(Path(path).read_bytes(), mode)

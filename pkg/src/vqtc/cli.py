"""Command line entry point: ``vqtc <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .ansatz import AnsatzConfig, compile_diagram, to_qasm
from .corpus import MODES, TASKS, gen_corpus, read_corpus, topic_count
from .errors import VqtcError
from .params import ParamStore, dump_checkpoint, load_checkpoint, save_checkpoint
from .parser import read_lexicon, sentence_to_diagram
from .rewrite import simplify
from .spsa import SpsaConfig
from .text import fit_text, make_groups, predict_text
from .trainer import SentenceDataset, accuracy, fit, predict, write_metrics


def _ansatz(args, k: int | None = None) -> AnsatzConfig:
    return AnsatzConfig(k=k or args.topics, q_n=args.qn, depth=args.layers)


def _from_checkpoint(path):
    store, header, logits = load_checkpoint(path)
    cfg = AnsatzConfig(k=header["k"], q_n=header["qn"], depth=header["depth"])
    return store, cfg


def cmd_parse(args, lexicon) -> None:
    print(sentence_to_diagram(args.sentence, lexicon).render())


def cmd_simplify(args, lexicon) -> None:
    print(simplify(sentence_to_diagram(args.sentence, lexicon)).render())


def cmd_compile(args, lexicon) -> None:
    if args.checkpoint:
        store, cfg = _from_checkpoint(args.checkpoint)
        register = False
    else:
        store, cfg, register = ParamStore(), _ansatz(args), True
    circuit = compile_diagram(simplify(sentence_to_diagram(args.sentence, lexicon)), cfg, store, register)
    if register:
        store = store.initialize(args.seed)
    sys.stdout.write(to_qasm(circuit, store))


def cmd_train(args, lexicon) -> None:
    records = read_corpus(args.corpus, args.mode)
    k = args.topics or max(r.label for r in records) + 1
    cfg = _ansatz(args, k)
    scfg = SpsaConfig(a=args.a, c=args.c, A=args.A, max_iters=args.iters, seed=args.seed,
                      batch_size=args.batch_size, eval_every=args.eval_every)
    logits = None
    if args.mode == "text":
        groups = make_groups([r.payload for r in records], [r.label for r in records])
        store, logits, history = fit_text(groups, lexicon, cfg, scfg, args.resolve_coref, args.workers)
    else:
        data = SentenceDataset([(r.payload, r.label) for r in records], k)
        store, history = fit(data, lexicon, cfg, scfg, args.workers)
    header = cfg.header(args.seed)
    if args.checkpoint:
        save_checkpoint(args.checkpoint, store, header, logits)
    else:
        sys.stdout.write(dump_checkpoint(store, header, logits))
    if args.metrics:
        write_metrics(args.metrics, history)
    last = history[-1]
    print(f"iter={last.iteration} loss={last.loss:.6f} train_acc={last.train_acc:.4f}", file=sys.stderr)


def cmd_eval(args, lexicon) -> None:
    store, cfg = _from_checkpoint(args.checkpoint)
    records = read_corpus(args.corpus, args.mode)
    if args.mode == "text":
        hits = sum(predict_text(r.payload, store, cfg, lexicon, args.resolve_coref) == r.label
                   for r in records)
        acc = hits / len(records)
    else:
        acc = accuracy(SentenceDataset([(r.payload, r.label) for r in records], cfg.k), store, cfg, lexicon)
    print(f"accuracy={acc:.6f}")


def cmd_predict(args, lexicon) -> None:
    store, cfg = _from_checkpoint(args.checkpoint)
    for item in args.sentence:
        if args.mode == "text":
            text = [s.strip() for s in item.split("|||") if s.strip()]
            print(predict_text(text, store, cfg, lexicon, args.resolve_coref))
        else:
            print(predict(item, store, cfg, lexicon))


def cmd_gen_corpus(args, lexicon) -> None:
    data = gen_corpus(args.task, args.size, args.seed, args.mode)
    if args.corpus:
        Path(args.corpus).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lexicon", help="lexicon TSV (default: the shipped lexicon)")
    common.add_argument("--mode", choices=MODES, default="sentence")
    common.add_argument("--topics", type=int, default=None, help="number of topics k")
    common.add_argument("--layers", type=int, default=2, help="IQP depth")
    common.add_argument("--qn", type=int, default=1, help="qubits per noun wire")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--iters", type=int, default=1000)
    common.add_argument("--resolve-coref", action="store_true")
    common.add_argument("--checkpoint")
    common.add_argument("--metrics")
    common.add_argument("--corpus")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="vqtc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("parse", "simplify", "compile"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("sentence")
    p = sub.add_parser("train", parents=[common])
    p.add_argument("--a", type=float, default=0.05)
    p.add_argument("--c", type=float, default=0.06)
    p.add_argument("--A", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--eval-every", type=int, default=10)
    sub.add_parser("eval", parents=[common])
    p = sub.add_parser("predict", parents=[common])
    p.add_argument("sentence", nargs="+", help="sentence, or 's1 ||| s2' in text mode")
    p = sub.add_parser("gen-corpus", parents=[common])
    p.add_argument("--task", choices=sorted(TASKS), default="food_it")
    p.add_argument("--size", type=int, default=40)
    return parser


COMMANDS = {
    "parse": cmd_parse, "simplify": cmd_simplify, "compile": cmd_compile, "train": cmd_train,
    "eval": cmd_eval, "predict": cmd_predict, "gen-corpus": cmd_gen_corpus,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("train", "eval") and not args.corpus:
            raise VqtcError("--corpus is required")
        if args.command in ("eval", "predict") and not args.checkpoint:
            raise VqtcError("--checkpoint is required")
        if args.command == "compile" and not args.checkpoint:
            args.topics = args.topics or 2
        if args.command == "gen-corpus":
            topic_count(args.task)
        COMMANDS[args.command](args, read_lexicon(args.lexicon))
    except (VqtcError, OSError, ValueError) as err:
        print(f"error: {type(err).__name__}: {str(err).splitlines()[0] if str(err) else ''}",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

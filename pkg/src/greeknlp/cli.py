"""Command-line interface.

Subcommands: annotate, g2g, train, evaluate, serve. Exit codes: 0 success,
1 usage error, 2 runtime error. ``annotate`` treats each input line as one
document; ``--format json-lines`` emits the canonical document JSON (one
per line), ``--format conllu`` emits CoNLL-U blocks.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import container as container_mod
from . import conllu as conllu_mod
from . import g2g as g2g_mod
from . import training as training_mod
from .charlm import train_charlm
from .doc import normalize
from .encoder import EncoderConfig
from .pipeline import Pipeline, default_models_dir, doc_to_json_str


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_GRID_ALIASES = {
    "lr": "learning_rate",
    "accum": "grad_accumulation_steps",
    "decay": "weight_decay",
}
_INT_AXES = {"grad_accumulation_steps"}


def _parse_grid(items: list[str]) -> dict[str, tuple]:
    grid: dict[str, tuple] = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"bad --grid item {item!r}: expected name=v1,v2,...")
        name, values = item.split("=", 1)
        name = _GRID_ALIASES.get(name, name)
        if name not in training_mod.DEFAULT_GRID:
            raise UsageError(f"unknown grid axis {name!r}; "
                             f"valid: {sorted(training_mod.DEFAULT_GRID)}")
        conv = int if name in _INT_AXES else float
        try:
            grid[name] = tuple(conv(v) for v in values.split(","))
        except ValueError as exc:
            raise UsageError(f"bad --grid value in {item!r}: {exc}") from None
    return grid


def build_parser() -> _Parser:
    parser = _Parser(prog="greeknlp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ann = sub.add_parser("annotate", help="annotate text from stdin or a file")
    ann.add_argument("--processors", default="pos,ner,dp")
    ann.add_argument("--models", default=None, help="model directory (default: $GREEKNLP_MODELS or ./models)")
    ann.add_argument("--decoder", choices=("greedy", "mst"), default="greedy")
    ann.add_argument("--format", choices=("conllu", "json-lines"), default="json-lines")
    ann.add_argument("--input", default=None, help="input file (default: stdin)")
    ann.add_argument("--output", default=None, help="output file (default: stdout)")

    g2g = sub.add_parser("g2g", help="transliterate Greeklish lines to Greek")
    g2g.add_argument("--models", default=None)
    g2g.add_argument("--input", default=None)
    g2g.add_argument("--output", default=None)

    train = sub.add_parser("train", help="grid-search a task model on CoNLL-U data")
    train.add_argument("--task", choices=("pos", "ner", "dp"), required=True)
    train.add_argument("--train", required=True, dest="train_file")
    train.add_argument("--dev", required=True, dest="dev_file")
    train.add_argument("--test", required=True, dest="test_file")
    train.add_argument("--grid", action="append", default=[],
                       help="axis=v1,v2 (repeatable); unspecified axes use the default grid")
    train.add_argument("--out", required=True, help="output model container path")
    train.add_argument("--report", default=None, help="write the grid table TSV here")
    train.add_argument("--epochs", type=int, default=30)
    train.add_argument("--batch-size", type=int, default=16)
    train.add_argument("--patience", type=int, default=5)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--enc-dim", type=int, default=64)
    train.add_argument("--enc-layers", type=int, default=1)

    ev = sub.add_parser("evaluate", help="evaluate a model container on CoNLL-U data")
    ev.add_argument("--task", choices=("pos", "ner", "dp"), required=True)
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--decoder", choices=("greedy", "mst"), default="greedy")

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--models", default=None)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--decoder", choices=("greedy", "mst"), default="greedy")

    train_g2g = sub.add_parser("train-g2g", help="build the g2g model from a Greek corpus")
    train_g2g.add_argument("--corpus", required=True, help="plain Greek text, one line per sentence")
    train_g2g.add_argument("--table", default=None, help="mapping table TSV (default: shipped table)")
    train_g2g.add_argument("--order", type=int, default=5)
    train_g2g.add_argument("--lm-weight", type=float, default=1.0)
    train_g2g.add_argument("--beam-width", type=int, default=8)
    train_g2g.add_argument("--out", required=True)
    return parser


def _read_lines(path):
    if path is None:
        return sys.stdin.read().splitlines()
    return Path(path).read_text(encoding="utf-8").splitlines()


def _write_text(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _cmd_annotate(args) -> int:
    pipeline = Pipeline(args.processors, models_dir=args.models, decoder=args.decoder)
    lines = [line for line in _read_lines(args.input) if line.strip()]
    docs = [pipeline.run(line) for line in lines]
    if args.format == "json-lines":
        text = "".join(doc_to_json_str(d) + "\n" for d in docs)
    else:
        text = conllu_mod.write_conllu(docs)
    _write_text(args.output, text)
    return 0


def _cmd_g2g(args) -> int:
    models_dir = Path(args.models) if args.models else default_models_dir()
    cont = container_mod.load_container(models_dir / "g2g.grnlp")
    table, lm, lm_weight, beam_width = container_mod.unpack_g2g(cont)
    out = [g2g_mod.g2g_decode(line, table, lm, beam_width=beam_width, lm_weight=lm_weight)
           for line in _read_lines(args.input)]
    _write_text(args.output, "".join(line + "\n" for line in out))
    return 0


def _load_sentences(path):
    docs = conllu_mod.read_conllu_file(path)
    return [sent for doc in docs for sent in doc.sentences]


def _cmd_train(args) -> int:
    base_hp = training_mod.HyperParams(
        epochs=args.epochs, seed=args.seed, batch_size=args.batch_size,
        patience=args.patience)
    enc_config = EncoderConfig(dim=args.enc_dim, layers=args.enc_layers, seed=args.seed)
    grid = _parse_grid(args.grid)
    model, report = training_mod.grid_search(
        args.task,
        _load_sentences(args.train_file),
        _load_sentences(args.dev_file),
        _load_sentences(args.test_file),
        grid=grid, base_hp=base_hp, enc_config=enc_config)
    if args.task == "pos":
        cont = container_mod.pack_tagger(model)
    elif args.task == "ner":
        cont = container_mod.pack_ner(model)
    else:
        cont = container_mod.pack_parser(model)
    container_mod.save_container(cont, args.out)
    if args.report:
        Path(args.report).write_text(training_mod.report_tsv(report), encoding="utf-8")
    sys.stdout.write(training_mod.format_report(report))
    return 0


def _cmd_evaluate(args) -> int:
    sentences = _load_sentences(args.data)
    cont = container_mod.load_container(args.model)
    if args.task == "pos":
        model = container_mod.unpack_tagger(cont)
        micro, macro = training_mod.eval_tagger(model, sentences)
        sys.stdout.write(f"upos_micro_f1\t{micro:.6f}\nupos_macro_f1\t{macro:.6f}\n")
    elif args.task == "ner":
        model = container_mod.unpack_ner(cont)
        rep = training_mod.eval_ner(model, sentences)
        for etype, prf in sorted(rep.per_type.items()):
            sys.stdout.write(f"{etype}\tP {prf.precision:.4f}\tR {prf.recall:.4f}\tF1 {prf.f1:.4f}\n")
        sys.stdout.write(f"entity_micro_f1\t{rep.micro.f1:.6f}\nentity_macro_f1\t{rep.macro_f1:.6f}\n")
    else:
        model = container_mod.unpack_parser(cont)
        uas, las = training_mod.eval_parser(model, sentences, decoder=args.decoder)
        sys.stdout.write(f"uas\t{uas:.6f}\nlas\t{las:.6f}\n")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(models_dir=args.models, host=args.host, port=args.port, decoder=args.decoder)
    return 0


def _cmd_train_g2g(args) -> int:
    corpus = [normalize(line) for line in _read_lines(args.corpus) if line.strip()]
    lm = train_charlm(corpus, order=args.order)
    table = g2g_mod.MappingTable.load(args.table) if args.table else g2g_mod.MappingTable.default()
    cont = container_mod.pack_g2g(table, lm, lm_weight=args.lm_weight, beam_width=args.beam_width)
    container_mod.save_container(cont, args.out)
    return 0


_COMMANDS = {
    "annotate": _cmd_annotate,
    "g2g": _cmd_g2g,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "serve": _cmd_serve,
    "train-g2g": _cmd_train_g2g,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except Exception as exc:  # runtime failure, deliberately broad at the boundary
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

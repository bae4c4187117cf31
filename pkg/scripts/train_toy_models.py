#!/usr/bin/env python3
"""Train the toy-corpus models and serialize them as model containers.

Produces pos.grnlp, ner.grnlp, dp.grnlp and g2g.grnlp in the output
directory (default: ./models). Training uses the toy overfit recipe
(lr 3e-3, dropout 0, accumulation 4, weight decay 0.2, <= 200 epochs) and
is deterministic, so rebuilt containers are byte-identical; an existing
build with a matching fingerprint is reused unless --force is given.
"""

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from greeknlp import container as container_mod
from greeknlp.charlm import train_charlm
from greeknlp.conllu import read_conllu_file
from greeknlp.encoder import EncoderConfig
from greeknlp.g2g import MappingTable
from greeknlp.training import (HyperParams, eval_ner, eval_parser, eval_tagger,
                               train_ner, train_parser, train_tagger)

CORPUS = ROOT / "tests" / "data" / "toy_corpus.conllu"
GREEK_TEXT = ROOT / "src" / "greeknlp" / "data" / "greek_corpus.txt"
TABLE = ROOT / "src" / "greeknlp" / "data" / "g2g_table.tsv"

HP = HyperParams(learning_rate=3e-3, dropout=0.0, grad_accumulation_steps=4,
                 weight_decay=0.2, epochs=200, seed=0, batch_size=16, patience=None)
ENC = EncoderConfig(dim=64, layers=1, seed=0)


def fingerprint() -> str:
    h = hashlib.sha256()
    for path in (CORPUS, GREEK_TEXT, TABLE):
        h.update(path.read_bytes())
    h.update(json.dumps([HP.__dict__, ENC.__dict__], sort_keys=True, default=str).encode())
    return h.hexdigest()


def build(out_dir: Path, force: bool = False) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = out_dir / "fingerprint.json"
    fp = fingerprint()
    expected = [out_dir / name for name in ("pos.grnlp", "ner.grnlp", "dp.grnlp", "g2g.grnlp")]
    if not force and stamp.exists() and all(p.exists() for p in expected):
        recorded = json.loads(stamp.read_text())
        if recorded.get("fingerprint") == fp:
            return recorded

    sents = [s for d in read_conllu_file(CORPUS) for s in d.sentences]
    t0 = time.time()
    tagger, _ = train_tagger(sents, sents, HP, ENC)
    ner, _ = train_ner(sents, sents, HP, ENC)
    parser, _ = train_parser(sents, sents, HP, ENC)
    train_seconds = time.time() - t0

    micro, macro = eval_tagger(tagger, sents)
    ner_rep = eval_ner(ner, sents)
    uas, las = eval_parser(parser, sents)

    container_mod.save_container(container_mod.pack_tagger(tagger), out_dir / "pos.grnlp")
    container_mod.save_container(container_mod.pack_ner(ner), out_dir / "ner.grnlp")
    container_mod.save_container(container_mod.pack_parser(parser), out_dir / "dp.grnlp")

    corpus_lines = [l for l in GREEK_TEXT.read_text(encoding="utf-8").splitlines() if l.strip()]
    lm = train_charlm(corpus_lines, order=5)
    table = MappingTable.load(TABLE)
    container_mod.save_container(container_mod.pack_g2g(table, lm), out_dir / "g2g.grnlp")

    record = {
        "fingerprint": fp,
        "train_seconds": train_seconds,
        "train_upos_micro_f1": micro,
        "train_upos_macro_f1": macro,
        "train_entity_micro_f1": ner_rep.micro.f1,
        "train_entity_macro_f1": ner_rep.macro_f1,
        "train_uas": uas,
        "train_las": las,
        "hyperparams": {k: v for k, v in HP.__dict__.items()},
        "encoder": {k: v for k, v in ENC.__dict__.items()},
    }
    stamp.write_text(json.dumps(record, indent=2, sort_keys=True))
    return record


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(ROOT / "models"))
    ap.add_argument("--force", action="store_true")
    args = ap.parse_args()
    record = build(Path(args.out), force=args.force)
    print(json.dumps(record, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()

"""Training loop, AdamW, grid search and shared classification metrics.

Loss reduction is mean-over-tokens within an optimizer step. One step
consumes ``batch_size * grad_accumulation_steps`` sentences: accumulation
extends the effective batch, so accumulating k microbatches is exactly one
step on their concatenation. All randomness (shuffling, dropout) derives
from the run seed, making training bit-reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .doc import Doc, Token
from .encoder import EncoderConfig, EncoderModel, SubwordVocab, zero_grads
from . import ner as ner_mod
from . import parser as parser_mod
from . import tagger as tagger_mod

BETA1, BETA2, EPS = 0.9, 0.999, 1e-8


@dataclass(frozen=True)
class HyperParams:
    learning_rate: float = 3e-3
    dropout: float = 0.0
    grad_accumulation_steps: int = 4
    weight_decay: float = 0.2
    epochs: int = 30
    seed: int = 0
    batch_size: int = 16
    patience: Optional[int] = 5

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must be in [0, 1)")
        if self.grad_accumulation_steps < 1:
            raise ValueError("grad_accumulation_steps must be >= 1")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


# Table-style default search space for grid_search.
DEFAULT_GRID: dict[str, tuple] = {
    "learning_rate": (5e-5, 3e-5, 2e-5),
    "dropout": (0.0, 0.1, 0.2),
    "grad_accumulation_steps": (4, 8),
    "weight_decay": (0.2, 0.5, 0.8),
}


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def init(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(m=zero_grads(params), v=zero_grads(params))


class GradientError(FloatingPointError):
    """Non-finite gradient encountered; training fails fast."""


def adamw_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
               state: AdamState, hp: HyperParams) -> None:
    """One AdamW update, in place, with decoupled weight decay.

    beta1=0.9, beta2=0.999, eps=1e-8, bias-corrected moments; the decay
    term lr*weight_decay*theta is subtracted from the incoming parameters
    independently of the gradient-based update.
    """
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise GradientError(f"non-finite gradient in {name}")
    state.t += 1
    bc1 = 1.0 - BETA1 ** state.t
    bc2 = 1.0 - BETA2 ** state.t
    lr, wd = hp.learning_rate, hp.weight_decay
    for name, p in params.items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= BETA1
        m += (1.0 - BETA1) * g
        v *= BETA2
        v += (1.0 - BETA2) * g * g
        update = (m / bc1) / (np.sqrt(v / bc2) + EPS)
        p *= 1.0 - lr * wd
        p -= lr * update


# --- metrics ------------------------------------------------------------------

def micro_macro_f1(pred: Sequence[str], gold: Sequence[str]) -> tuple[float, float]:
    """Micro-F1 over pooled counts and unweighted macro-F1 over the classes
    present in gold or predictions."""
    if len(pred) != len(gold):
        raise ValueError(f"length mismatch: {len(pred)} pred vs {len(gold)} gold")
    classes = sorted(set(pred) | set(gold))
    tp_sum = fp_sum = fn_sum = 0
    f1s = []
    for c in classes:
        tp = sum(1 for p, g in zip(pred, gold) if p == c and g == c)
        fp = sum(1 for p, g in zip(pred, gold) if p == c and g != c)
        fn = sum(1 for p, g in zip(pred, gold) if p != c and g == c)
        tp_sum, fp_sum, fn_sum = tp_sum + tp, fp_sum + fp, fn_sum + fn
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    micro_p = tp_sum / (tp_sum + fp_sum) if tp_sum + fp_sum else 0.0
    micro_r = tp_sum / (tp_sum + fn_sum) if tp_sum + fn_sum else 0.0
    micro = 2 * micro_p * micro_r / (micro_p + micro_r) if micro_p + micro_r else 0.0
    macro = sum(f1s) / len(f1s) if f1s else 0.0
    return micro, macro


# --- evaluation helpers --------------------------------------------------------

def eval_tagger(model: tagger_mod.TaggerModel,
                sentences: Sequence[Sequence[Token]]) -> tuple[float, float]:
    """(micro, macro) F1 of UPOS predictions against gold."""
    pred, gold = [], []
    for sent in sentences:
        decoded = tagger_mod.tag_decode(
            tagger_mod.tag_logits([t.form for t in sent], model), model)
        pred.extend(upos for upos, _ in decoded)
        gold.extend(t.upos for t in sent)
    return micro_macro_f1(pred, gold)


def eval_ner(model: ner_mod.NerModel,
             sentences: Sequence[Sequence[Token]]) -> ner_mod.EntityF1Report:
    pred_spans: list[ner_mod.EntitySpan] = []
    gold_spans: list[ner_mod.EntitySpan] = []
    for idx, sent in enumerate(sentences):
        logits = ner_mod.ner_logits([t.form for t in sent], model)
        _, spans = ner_mod.ner_decode(logits, sentence=idx)
        pred_spans.extend(spans)
        gold_tags = [t.ner or "O" for t in sent]
        gold_spans.extend(ner_mod.tags_to_spans(gold_tags, idx))
    return ner_mod.entity_f1(pred_spans, gold_spans)


def eval_parser(model: parser_mod.ParserModel,
                sentences: Sequence[Sequence[Token]],
                decoder: str = "greedy") -> tuple[float, float]:
    """(UAS, LAS) against gold heads/labels."""
    pred_sents = []
    for sent in sentences:
        pred_sents.append(tuple(parser_mod.annotate_sentence(model, sent, decoder)))
    pred = Doc("", tuple(pred_sents))
    gold = Doc("", tuple(tuple(s) for s in sentences))
    return parser_mod.uas_las(pred, gold)


# --- the training driver --------------------------------------------------------

@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    dev_metric: float


@dataclass
class GridRow:
    hyperparams: HyperParams
    dev_metric: float
    best_epoch: int


@dataclass
class TrainReport:
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int = -1
    best_dev_metric: float = float("-inf")
    grid: list[GridRow] = field(default_factory=list)
    champion: Optional[int] = None  # index into grid
    test_metric: Optional[float] = None

    def loss_curve(self) -> list[float]:
        return [e.train_loss for e in self.epochs]


def _train_model(params: dict[str, np.ndarray],
                 loss_fn: Callable[[Sequence[Token], dict, float, np.random.Generator], tuple[float, int]],
                 dev_fn: Callable[[], float],
                 train_sents: Sequence[Sequence[Token]],
                 hp: HyperParams) -> TrainReport:
    """Generic loop: shuffled effective batches, AdamW, best-epoch snapshot."""
    state = AdamState.init(params)
    rng = np.random.default_rng(hp.seed)
    report = TrainReport()
    best_params: Optional[dict[str, np.ndarray]] = None
    effective_batch = hp.batch_size * hp.grad_accumulation_steps
    since_best = 0
    for epoch in range(hp.epochs):
        order = rng.permutation(len(train_sents))
        epoch_loss = 0.0
        epoch_tokens = 0
        for start in range(0, len(order), effective_batch):
            batch = [train_sents[i] for i in order[start:start + effective_batch]]
            grads = zero_grads(params)
            loss_sum = 0.0
            token_sum = 0
            for sent in batch:
                loss, n_tokens = loss_fn(sent, grads, hp.dropout, rng)
                loss_sum += loss
                token_sum += n_tokens
            for g in grads.values():
                g /= token_sum
            adamw_step(params, grads, state, hp)
            epoch_loss += loss_sum
            epoch_tokens += token_sum
        dev_metric = dev_fn()
        report.epochs.append(EpochStats(epoch, epoch_loss / epoch_tokens, dev_metric))
        if dev_metric > report.best_dev_metric:
            report.best_dev_metric = dev_metric
            report.best_epoch = epoch
            best_params = {k: v.copy() for k, v in params.items()}
            since_best = 0
        else:
            since_best += 1
            if hp.patience is not None and since_best > hp.patience:
                break
    if best_params is not None:
        for k in params:
            params[k][...] = best_params[k]
    return report


def _corpus_vocab(sentences: Sequence[Sequence[Token]]) -> SubwordVocab:
    return SubwordVocab.build(t.form for sent in sentences for t in sent)


def train_tagger(train_sents: Sequence[Sequence[Token]],
                 dev_sents: Sequence[Sequence[Token]],
                 hp: HyperParams,
                 enc_config: EncoderConfig = EncoderConfig()) -> tuple[tagger_mod.TaggerModel, TrainReport]:
    """Fit the 17-head tagger; selection on dev UPOS macro-F1."""
    enc = EncoderModel.init(_corpus_vocab(train_sents), enc_config)
    vocabs = tagger_mod.build_label_vocabs(train_sents)
    model = tagger_mod.init_tagger(enc, vocabs, seed=hp.seed + 1)

    def loss_fn(sent, grads, dropout, rng):
        return tagger_mod.tag_loss_and_grads(model, sent, grads, dropout, rng)

    report = _train_model(model.params, loss_fn,
                          lambda: eval_tagger(model, dev_sents)[1], train_sents, hp)
    return model, report


def train_ner(train_sents: Sequence[Sequence[Token]],
              dev_sents: Sequence[Sequence[Token]],
              hp: HyperParams,
              enc_config: EncoderConfig = EncoderConfig()) -> tuple[ner_mod.NerModel, TrainReport]:
    """Fit the NER head; selection on dev entity macro-F1."""
    enc = EncoderModel.init(_corpus_vocab(train_sents), enc_config)
    model = ner_mod.init_ner(enc, seed=hp.seed + 2)

    def loss_fn(sent, grads, dropout, rng):
        return ner_mod.ner_loss_and_grads(model, sent, grads, dropout, rng)

    report = _train_model(model.params, loss_fn,
                          lambda: eval_ner(model, dev_sents).macro_f1, train_sents, hp)
    return model, report


def train_parser(train_sents: Sequence[Sequence[Token]],
                 dev_sents: Sequence[Sequence[Token]],
                 hp: HyperParams,
                 enc_config: EncoderConfig = EncoderConfig(),
                 parser_config: parser_mod.ParserConfig = parser_mod.ParserConfig()) -> tuple[parser_mod.ParserModel, TrainReport]:
    """Fit the biaffine parser; selection on dev LAS."""
    enc = EncoderModel.init(_corpus_vocab(train_sents), enc_config)
    labels = sorted({t.deprel for sent in train_sents for t in sent if t.deprel})
    model = parser_mod.init_parser(enc, labels, parser_config, seed=hp.seed + 3)

    def loss_fn(sent, grads, dropout, rng):
        return parser_mod.parse_loss_and_grads(model, sent, grads, dropout, rng)

    report = _train_model(model.params, loss_fn,
                          lambda: eval_parser(model, dev_sents)[1], train_sents, hp)
    return model, report


TASK_TRAINERS = {"pos": train_tagger, "ner": train_ner, "dp": train_parser}


def grid_search(task: str,
                train_sents: Sequence[Sequence[Token]],
                dev_sents: Sequence[Sequence[Token]],
                test_sents: Sequence[Sequence[Token]],
                grid: Optional[dict[str, Sequence]] = None,
                base_hp: HyperParams = HyperParams(),
                enc_config: EncoderConfig = EncoderConfig()):
    """Train every grid cell, select the best dev metric, re-evaluate the
    champion on test. Returns (champion model, TrainReport with the table)."""
    if task not in TASK_TRAINERS:
        raise ValueError(f"unknown task {task!r}; expected one of {sorted(TASK_TRAINERS)}")
    if not train_sents or not dev_sents or not test_sents:
        raise ValueError("empty data split")
    space = dict(DEFAULT_GRID)
    if grid:
        space.update(grid)
    names = sorted(space)
    cells = [dict(zip(names, combo)) for combo in itertools.product(*(space[n] for n in names))]
    if not cells:
        raise ValueError("empty grid")

    trainer = TASK_TRAINERS[task]
    report = TrainReport()
    champion_model = None
    champion_metric = float("-inf")
    for cell in cells:
        hp = replace(base_hp, **cell)
        model, cell_report = trainer(train_sents, dev_sents, hp, enc_config)
        report.grid.append(GridRow(hp, cell_report.best_dev_metric, cell_report.best_epoch))
        if cell_report.best_dev_metric > champion_metric:
            champion_metric = cell_report.best_dev_metric
            champion_model = model
            report.champion = len(report.grid) - 1
            report.epochs = cell_report.epochs
            report.best_epoch = cell_report.best_epoch
            report.best_dev_metric = cell_report.best_dev_metric
    if task == "pos":
        report.test_metric = eval_tagger(champion_model, test_sents)[1]
    elif task == "ner":
        report.test_metric = eval_ner(champion_model, test_sents).macro_f1
    else:
        report.test_metric = eval_parser(champion_model, test_sents)[1]
    return champion_model, report


def report_tsv(report: TrainReport) -> str:
    """Grid table as TSV: one row per cell plus the champion marker."""
    lines = ["cell\tlearning_rate\tdropout\tgrad_accumulation_steps\tweight_decay\tdev_metric\tbest_epoch\tchampion"]
    for idx, row in enumerate(report.grid):
        hp = row.hyperparams
        lines.append("\t".join([
            str(idx), repr(hp.learning_rate), repr(hp.dropout),
            str(hp.grad_accumulation_steps), repr(hp.weight_decay),
            f"{row.dev_metric:.6f}", str(row.best_epoch),
            "*" if report.champion == idx else "",
        ]))
    if report.test_metric is not None:
        lines.append(f"# champion test metric\t{report.test_metric:.6f}")
    return "\n".join(lines) + "\n"


def format_report(report: TrainReport) -> str:
    lines = []
    for stats in report.epochs:
        lines.append(f"epoch {stats.epoch:3d}  train_loss {stats.train_loss:.6f}  dev {stats.dev_metric:.4f}")
    lines.append(f"best epoch {report.best_epoch} dev {report.best_dev_metric:.4f}")
    if report.grid:
        lines.append(f"grid cells: {len(report.grid)}, champion: {report.champion}")
    if report.test_metric is not None:
        lines.append(f"champion test metric: {report.test_metric:.4f}")
    return "\n".join(lines) + "\n"

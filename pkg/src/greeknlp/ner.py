"""Named entity recognition over the 18-type BIOES scheme.

A single linear head over encoder outputs; argmax tags are repaired into a
valid BIOES sequence before span extraction. Evaluation is exact span
match (start, end, type all equal).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .doc import ENTITY_TYPES, Token
from .encoder import EncoderModel, dropout_mask, encode_forward, encode_backward
from .numerics import xent_rows

# Tag id 0 is O; each type contributes B/I/E/S in canonical type order.
NER_TAGSET: tuple[str, ...] = ("O",) + tuple(
    f"{p}-{t}" for t in ENTITY_TYPES for p in "BIES")
_TAG_IDS = {t: i for i, t in enumerate(NER_TAGSET)}


class NerLabelError(ValueError):
    """Gold NER tag missing from the tagset."""


@dataclass(frozen=True, order=True)
class EntitySpan:
    """An entity occupying words start..end (1-based, inclusive)."""

    sentence: int
    start: int
    end: int
    type: str

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"span start {self.start} > end {self.end}")
        if self.type not in ENTITY_TYPES:
            raise ValueError(f"unknown entity type {self.type!r}")


@dataclass
class NerModel:
    encoder: EncoderModel
    params: dict[str, np.ndarray]  # encoder params under "enc.", plus "head.NER"

    @property
    def tagset(self) -> tuple[str, ...]:
        return NER_TAGSET


def init_ner(encoder: EncoderModel, seed: int = 2) -> NerModel:
    rng = np.random.default_rng(seed)
    params = {f"enc.{k}": v for k, v in encoder.params.items()}
    params["head.NER"] = rng.uniform(-0.1, 0.1, size=(encoder.config.dim, len(NER_TAGSET)))
    return NerModel(encoder, params)


def ner_logits(words: Sequence[str], model: NerModel) -> np.ndarray:
    E, _ = encode_forward(model.encoder, words)
    return E[1:] @ model.params["head.NER"]


def tags_to_spans(tags: Sequence[str], sentence: int = 0) -> list[EntitySpan]:
    """Span extraction for a VALID BIOES sequence.

    Grammar: O | S-X | B-X I-X* E-X. Use :func:`repair_bioes` first for raw
    argmax output.
    """
    spans: list[EntitySpan] = []
    start: Optional[int] = None
    for pos, tag in enumerate(tags, start=1):
        if tag == "O":
            start = None
            continue
        prefix, etype = tag.split("-", 1)
        if prefix == "S":
            spans.append(EntitySpan(sentence, pos, pos, etype))
            start = None
        elif prefix == "B":
            start = pos
        elif prefix == "E" and start is not None:
            spans.append(EntitySpan(sentence, start, pos, etype))
            start = None
    return spans


def spans_to_tags(spans: Sequence[EntitySpan], length: int, sentence: int = 0) -> list[str]:
    """The unique valid BIOES tagging realizing the given spans."""
    tags = ["O"] * length
    for span in spans:
        if span.sentence != sentence:
            continue
        if span.start == span.end:
            tags[span.start - 1] = f"S-{span.type}"
        else:
            tags[span.start - 1] = f"B-{span.type}"
            for pos in range(span.start + 1, span.end):
                tags[pos - 1] = f"I-{span.type}"
            tags[span.end - 1] = f"E-{span.type}"
    return tags


def repair_bioes(tags: Sequence[str], sentence: int = 0) -> tuple[list[str], list[EntitySpan]]:
    """Deterministic repair of a raw tag sequence into valid BIOES + spans.

    A dangling I/E opens a span at the earliest unconsumed contiguous
    same-type position; a span left open at a boundary (type change, O, or
    sentence end) closes at the previous position. Identity on already
    valid sequences.
    """
    spans: list[EntitySpan] = []
    open_start: Optional[int] = None
    open_type: Optional[str] = None

    def close(end_pos: int) -> None:
        nonlocal open_start, open_type
        if open_start is not None:
            spans.append(EntitySpan(sentence, open_start, end_pos, open_type))
            open_start, open_type = None, None

    for pos, tag in enumerate(tags, start=1):
        if tag == "O":
            close(pos - 1)
            continue
        prefix, etype = tag.split("-", 1)
        if open_type is not None and etype != open_type:
            close(pos - 1)
        if prefix == "S":
            close(pos - 1)
            spans.append(EntitySpan(sentence, pos, pos, etype))
        elif prefix == "B":
            close(pos - 1)
            open_start, open_type = pos, etype
        elif prefix == "I":
            if open_start is None:
                open_start, open_type = pos, etype
        else:  # E
            if open_start is None:
                open_start, open_type = pos, etype
            close(pos)
    close(len(tags))
    repaired = spans_to_tags(spans, len(tags), sentence)
    return repaired, spans


def ner_decode(logits: np.ndarray, sentence: int = 0) -> tuple[list[str], list[EntitySpan]]:
    """Argmax tags (ties to lowest id), repaired to valid BIOES, plus spans."""
    raw = [NER_TAGSET[i] for i in np.argmax(logits, axis=1)]
    return repair_bioes(raw, sentence)


def ner_loss(logits: np.ndarray, gold: Sequence[Token]) -> float:
    """Summed cross-entropy against gold BIOES tags (missing gold = O)."""
    targets = _gold_tag_ids(gold)
    loss, _ = xent_rows(logits, targets)
    return loss


def _gold_tag_ids(tokens: Sequence[Token]) -> np.ndarray:
    ids = []
    for tok in tokens:
        tag = tok.ner if tok.ner is not None else "O"
        if tag not in _TAG_IDS:
            raise NerLabelError(f"NER tag {tag!r} not in tagset")
        ids.append(_TAG_IDS[tag])
    return np.asarray(ids)


def ner_loss_and_grads(model: NerModel, tokens: Sequence[Token],
                       grads: dict[str, np.ndarray], dropout: float = 0.0,
                       rng: Optional[np.random.Generator] = None) -> tuple[float, int]:
    words = [t.form for t in tokens]
    E, enc_cache = encode_forward(model.encoder, words)
    E_words = E[1:]
    if dropout > 0.0:
        mask = dropout_mask(E_words.shape, dropout, rng)
        E_words = E_words * mask
    else:
        mask = None
    W = model.params["head.NER"]
    logits = E_words @ W
    loss, dlogits = xent_rows(logits, _gold_tag_ids(tokens))
    grads["head.NER"] += E_words.T @ dlogits
    dE_words = dlogits @ W.T
    if mask is not None:
        dE_words *= mask
    dE = np.zeros_like(E)
    dE[1:] = dE_words
    enc_grads = {k[len("enc."):]: v for k, v in grads.items() if k.startswith("enc.")}
    encode_backward(model.encoder, dE, enc_cache, enc_grads)
    return loss, len(tokens)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EntityF1Report:
    per_type: dict[str, PRF]
    micro: PRF
    macro_f1: float


def _prf(tp: int, n_pred: int, n_gold: int) -> PRF:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return PRF(p, r, f1)


def entity_f1(pred: Sequence[EntitySpan], gold: Sequence[EntitySpan]) -> EntityF1Report:
    """Exact-match span P/R/F1 per type, micro over pooled counts, and the
    unweighted macro mean over types with any gold or predicted support."""
    pred_set, gold_set = set(pred), set(gold)
    types = sorted({s.type for s in pred_set} | {s.type for s in gold_set})
    per_type: dict[str, PRF] = {}
    tp_all = 0
    for t in types:
        p_t = {s for s in pred_set if s.type == t}
        g_t = {s for s in gold_set if s.type == t}
        tp = len(p_t & g_t)
        tp_all += tp
        per_type[t] = _prf(tp, len(p_t), len(g_t))
    micro = _prf(tp_all, len(pred_set), len(gold_set))
    macro = sum(r.f1 for r in per_type.values()) / len(per_type) if per_type else 0.0
    return EntityF1Report(per_type, micro, macro)


def annotate_sentence(model: NerModel, tokens: Sequence[Token],
                      sentence: int = 0) -> list[Token]:
    """Return tokens with the ner slot filled from the model."""
    tags, _ = ner_decode(ner_logits([t.form for t in tokens], model), sentence)
    return [tok.with_(ner=tag) for tok, tag in zip(tokens, tags)]


def doc_spans(sentences_tags: Sequence[Sequence[str]]) -> list[EntitySpan]:
    """Spans of a whole document given per-sentence valid tag sequences."""
    spans: list[EntitySpan] = []
    for idx, tags in enumerate(sentences_tags):
        spans.extend(tags_to_spans(tags, idx))
    return spans


def spans_to_standoff(spans: Sequence[EntitySpan]) -> str:
    """Standoff export: one `sentence<TAB>start<TAB>end<TAB>type` line per span."""
    ordered = sorted(spans)
    return "".join(f"{s.sentence}\t{s.start}\t{s.end}\t{s.type}\n" for s in ordered)


def standoff_to_spans(text: str) -> list[EntitySpan]:
    spans = []
    for line in text.splitlines():
        if not line.strip():
            continue
        sent, start, end, etype = line.split("\t")
        spans.append(EntitySpan(int(sent), int(start), int(end), etype))
    return spans

"""Joint UPOS + morphological tagging.

One shared encoder feeds 17 linear classification heads (UPOS plus the 16
morphological categories), trained multi-task with an unweighted sum of
per-head cross-entropies and decoded per head by argmax. Each morphological
head carries an explicit not-applicable label at id 0 so every head is
total over all words.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .doc import MORPH_CATEGORIES, MorphFeatures, Token, UPOS_TAGS
from .encoder import EncoderModel, dropout_mask, encode_forward, encode_backward
from .numerics import xent_rows

HEAD_NAMES = ("UPOS",) + MORPH_CATEGORIES  # exactly 17 heads
NA_LABEL = "<na>"


class LabelError(ValueError):
    """Gold label missing from a head's vocabulary."""


@dataclass
class TaggerModel:
    encoder: EncoderModel
    label_vocabs: dict[str, tuple[str, ...]]
    params: dict[str, np.ndarray]  # encoder params under "enc.", heads under "head.<name>"

    def __post_init__(self) -> None:
        if set(self.label_vocabs) != set(HEAD_NAMES):
            raise ValueError(f"expected heads {HEAD_NAMES}")
        self.label_vocabs = {name: tuple(self.label_vocabs[name]) for name in HEAD_NAMES}
        for name, labels in self.label_vocabs.items():
            if not labels:
                raise ValueError(f"empty label vocabulary for head {name}")
        bad = set(self.label_vocabs["UPOS"]) - set(UPOS_TAGS)
        if bad:
            raise ValueError(f"UPOS vocabulary outside the universal inventory: {sorted(bad)}")

    @property
    def label_ids(self) -> dict[str, dict[str, int]]:
        cached = self.__dict__.get("_label_ids")
        if cached is None:
            cached = {h: {lab: i for i, lab in enumerate(labels)}
                      for h, labels in self.label_vocabs.items()}
            self.__dict__["_label_ids"] = cached
        return cached


def build_label_vocabs(sentences: Sequence[Sequence[Token]]) -> dict[str, tuple[str, ...]]:
    """Label inventories observed in the gold corpus, one per head."""
    upos: set[str] = set()
    morph: dict[str, set[str]] = {cat: set() for cat in MORPH_CATEGORIES}
    for sent in sentences:
        for tok in sent:
            if tok.upos:
                upos.add(tok.upos)
            if tok.feats:
                for cat, val in tok.feats:
                    morph[cat].add(val)
    vocabs: dict[str, tuple[str, ...]] = {"UPOS": tuple(sorted(upos))}
    for cat in MORPH_CATEGORIES:
        vocabs[cat] = (NA_LABEL,) + tuple(sorted(morph[cat]))
    return vocabs


def init_tagger(encoder: EncoderModel, label_vocabs: dict[str, tuple[str, ...]],
                seed: int = 1) -> TaggerModel:
    rng = np.random.default_rng(seed)
    d = encoder.config.dim
    params = {f"enc.{k}": v for k, v in encoder.params.items()}
    for name in HEAD_NAMES:
        params[f"head.{name}"] = rng.uniform(-0.1, 0.1, size=(d, len(label_vocabs[name])))
    return TaggerModel(encoder, dict(label_vocabs), params)


def _head_logits(model: TaggerModel, E_words: np.ndarray) -> dict[str, np.ndarray]:
    return {name: E_words @ model.params[f"head.{name}"] for name in HEAD_NAMES}


def tag_logits(words: Sequence[str], model: TaggerModel) -> dict[str, np.ndarray]:
    """Per-head (n x |labels|) logit matrices for one sentence."""
    E, _ = encode_forward(model.encoder, words)
    return _head_logits(model, E[1:])  # word rows only, ROOT row unused here


def tag_decode(logits: dict[str, np.ndarray],
               model: TaggerModel) -> list[tuple[str, MorphFeatures]]:
    """Argmax per head; ties go to the lowest label id.

    A morphological head predicting the not-applicable label contributes no
    entry to the word's MorphFeatures.
    """
    n = logits["UPOS"].shape[0]
    upos_labels = model.label_vocabs["UPOS"]
    out: list[tuple[str, MorphFeatures]] = []
    picks = {name: np.argmax(logits[name], axis=1) for name in HEAD_NAMES}
    for i in range(n):
        upos = upos_labels[picks["UPOS"][i]]
        feats = {}
        for cat in MORPH_CATEGORIES:
            label = model.label_vocabs[cat][picks[cat][i]]
            if label != NA_LABEL:
                feats[cat] = label
        out.append((upos, MorphFeatures.of(feats)))
    return out


def _gold_ids(model: TaggerModel, tokens: Sequence[Token]) -> dict[str, np.ndarray]:
    ids = model.label_ids
    gold: dict[str, list[int]] = {name: [] for name in HEAD_NAMES}
    for tok in tokens:
        if tok.upos is None:
            raise LabelError(f"token {tok.index} ({tok.form!r}) has no gold UPOS")
        if tok.upos not in ids["UPOS"]:
            raise LabelError(f"head UPOS: label {tok.upos!r} not in vocabulary")
        gold["UPOS"].append(ids["UPOS"][tok.upos])
        for cat in MORPH_CATEGORIES:
            val = tok.feats.get(cat) if tok.feats else None
            label = val if val is not None else NA_LABEL
            if label not in ids[cat]:
                raise LabelError(f"head {cat}: label {label!r} not in vocabulary")
            gold[cat].append(ids[cat][label])
    return {name: np.asarray(v) for name, v in gold.items()}


def tag_loss(logits: dict[str, np.ndarray], gold: Sequence[Token],
             model: TaggerModel) -> float:
    """Sum over heads and words of categorical cross-entropy."""
    gold_ids = _gold_ids(model, gold)
    total = 0.0
    for name in HEAD_NAMES:
        loss, _ = xent_rows(logits[name], gold_ids[name])
        total += loss
    return total


def tag_loss_and_grads(model: TaggerModel, tokens: Sequence[Token],
                       grads: dict[str, np.ndarray], dropout: float = 0.0,
                       rng: Optional[np.random.Generator] = None) -> tuple[float, int]:
    """Forward + backward for one sentence; accumulates into ``grads``.

    Returns (summed loss, word count) so callers can apply the mean-over-
    tokens reduction across a batch.
    """
    words = [t.form for t in tokens]
    E, enc_cache = encode_forward(model.encoder, words)
    E_words = E[1:]
    if dropout > 0.0:
        mask = dropout_mask(E_words.shape, dropout, rng)
        E_words = E_words * mask
    else:
        mask = None
    gold_ids = _gold_ids(model, tokens)
    total = 0.0
    dE_words = np.zeros_like(E_words)
    for name in HEAD_NAMES:
        W = model.params[f"head.{name}"]
        logits = E_words @ W
        loss, dlogits = xent_rows(logits, gold_ids[name])
        total += loss
        grads[f"head.{name}"] += E_words.T @ dlogits
        dE_words += dlogits @ W.T
    if mask is not None:
        dE_words *= mask
    dE = np.zeros_like(E)
    dE[1:] = dE_words
    enc_grads = {k[len("enc."):]: v for k, v in grads.items() if k.startswith("enc.")}
    encode_backward(model.encoder, dE, enc_cache, enc_grads)
    return total, len(tokens)


def annotate_sentence(model: TaggerModel, tokens: Sequence[Token]) -> list[Token]:
    """Return tokens with upos/feats slots filled from the model."""
    words = [t.form for t in tokens]
    decoded = tag_decode(tag_logits(words, model), model)
    return [tok.with_(upos=upos, feats=feats if feats else MorphFeatures())
            for tok, (upos, feats) in zip(tokens, decoded)]

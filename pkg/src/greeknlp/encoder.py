"""Desk-scale trainable sentence encoder.

Maps a sentence to one contextual embedding per word: a learned subword
embedding table followed by a stack of bidirectional mixing layers
(each position sees itself and both neighbours through learned linear
maps and a tanh). A word's vector is the mixer output at the position of
its FIRST subword piece; row 0 is a learned virtual-ROOT embedding.

All arithmetic is float64 numpy; forward passes cache what the explicit
backward passes need. Models are immutable during inference; training
mutates a single owned copy.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

PAD, UNK, ROOT = "<pad>", "<unk>", "<root>"
_SPECIALS = (PAD, UNK, ROOT)


class SentenceTooLongError(ValueError):
    """Sentence exceeds the configured maximum word count."""


@dataclass(frozen=True)
class SubwordVocab:
    """Ordered subword inventory; id = position in ``pieces``."""

    pieces: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.pieces[: len(_SPECIALS)] != _SPECIALS:
            raise ValueError(f"vocab must start with specials {_SPECIALS}")
        if len(set(self.pieces)) != len(self.pieces):
            raise ValueError("duplicate vocab pieces")

    @property
    def piece_to_id(self) -> dict[str, int]:
        cached = self.__dict__.get("_piece_to_id")
        if cached is None:
            cached = {p: i for i, p in enumerate(self.pieces)}
            self.__dict__["_piece_to_id"] = cached
        return cached

    @property
    def unk_id(self) -> int:
        return 1

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def root_id(self) -> int:
        return 2

    @property
    def max_piece_len(self) -> int:
        return max(len(p) for p in self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def hash(self) -> str:
        return hashlib.sha256("\n".join(self.pieces).encode("utf-8")).hexdigest()

    @classmethod
    def build(cls, words: Iterable[str], include_words: bool = True) -> "SubwordVocab":
        """Characters of the corpus plus (optionally) whole-word pieces."""
        chars: set[str] = set()
        whole: set[str] = set()
        for w in words:
            chars.update(w)
            if include_words and len(w) > 1:
                whole.add(w)
        pieces = list(_SPECIALS) + sorted(chars) + sorted(whole - chars)
        return cls(tuple(pieces))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.pieces) + "\n")

    @classmethod
    def load(cls, path) -> "SubwordVocab":
        with open(path, encoding="utf-8") as fh:
            return cls(tuple(line.rstrip("\n") for line in fh if line.rstrip("\n")))


def segment(word: str, vocab: SubwordVocab) -> list[int]:
    """Greedy longest-match-first segmentation into piece ids.

    Falls back to single characters; a character absent from the vocab
    becomes the unk id. Never emits unk for characters present in the vocab.
    """
    if not word:
        raise ValueError("cannot segment an empty word")
    ids: list[int] = []
    table = vocab.piece_to_id
    max_len = vocab.max_piece_len
    pos = 0
    while pos < len(word):
        match_id = None
        for length in range(min(max_len, len(word) - pos), 0, -1):
            cand = word[pos:pos + length]
            got = table.get(cand)
            if got is not None:
                match_id, pos = got, pos + length
                break
        if match_id is None:
            match_id = vocab.unk_id
            pos += 1
        ids.append(match_id)
    return ids


@dataclass(frozen=True)
class EncoderConfig:
    dim: int = 64
    layers: int = 1
    max_words: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.layers < 0:
            raise ValueError("layers must be >= 0")


@dataclass
class EncoderModel:
    config: EncoderConfig
    vocab: SubwordVocab
    params: dict[str, np.ndarray]

    @classmethod
    def init(cls, vocab: SubwordVocab, config: EncoderConfig) -> "EncoderModel":
        rng = np.random.default_rng(config.seed)
        d = config.dim
        params = {"emb": rng.uniform(-0.1, 0.1, size=(len(vocab), d))}
        for l in range(config.layers):
            for name in ("w_self", "w_left", "w_right"):
                params[f"mix{l}.{name}"] = rng.uniform(-0.1, 0.1, size=(d, d))
            params[f"mix{l}.b"] = rng.uniform(-0.1, 0.1, size=d)
        return cls(config, vocab, params)

    def param_names(self) -> list[str]:
        return sorted(self.params)


def _piece_ids(words: Sequence[str], vocab: SubwordVocab) -> tuple[list[int], list[int]]:
    """Flatten a sentence to piece ids with a leading ROOT position.

    Returns (ids, first_positions) where first_positions[i] is the index of
    word i's first piece (i = 1..n) and first_positions[0] = 0 (ROOT).
    """
    ids = [vocab.root_id]
    firsts = [0]
    for w in words:
        firsts.append(len(ids))
        ids.extend(segment(w, vocab))
    return ids, firsts


def encode_forward(model: EncoderModel, words: Sequence[str]) -> tuple[np.ndarray, dict]:
    """Forward pass; returns ((n+1) x d output, cache for backward)."""
    if len(words) == 0:
        raise ValueError("cannot encode an empty sentence")
    if len(words) > model.config.max_words:
        raise SentenceTooLongError(
            f"sentence has {len(words)} words, max is {model.config.max_words}")
    ids, firsts = _piece_ids(words, model.vocab)
    idx = np.asarray(ids)
    H = model.params["emb"][idx]
    layer_inputs = []
    layer_outputs = []
    for l in range(model.config.layers):
        layer_inputs.append(H)
        left = np.vstack([np.zeros((1, H.shape[1])), H[:-1]])
        right = np.vstack([H[1:], np.zeros((1, H.shape[1]))])
        Z = (H @ model.params[f"mix{l}.w_self"]
             + left @ model.params[f"mix{l}.w_left"]
             + right @ model.params[f"mix{l}.w_right"]
             + model.params[f"mix{l}.b"])
        H = np.tanh(Z)
        layer_outputs.append(H)
    E = H[firsts]
    cache = {"ids": idx, "firsts": firsts, "inputs": layer_inputs, "outputs": layer_outputs,
             "seq_len": len(ids)}
    return E, cache


def encode_backward(model: EncoderModel, dE: np.ndarray, cache: dict,
                    grads: dict[str, np.ndarray]) -> None:
    """Accumulate gradients of a scalar loss (via dE) into ``grads``."""
    dH = np.zeros((cache["seq_len"], model.config.dim))
    np.add.at(dH, cache["firsts"], dE)
    for l in range(model.config.layers - 1, -1, -1):
        H_in = cache["inputs"][l]
        H_out = cache["outputs"][l]
        dZ = dH * (1.0 - H_out * H_out)
        left = np.vstack([np.zeros((1, H_in.shape[1])), H_in[:-1]])
        right = np.vstack([H_in[1:], np.zeros((1, H_in.shape[1]))])
        grads[f"mix{l}.w_self"] += H_in.T @ dZ
        grads[f"mix{l}.w_left"] += left.T @ dZ
        grads[f"mix{l}.w_right"] += right.T @ dZ
        grads[f"mix{l}.b"] += dZ.sum(axis=0)
        dH = dZ @ model.params[f"mix{l}.w_self"].T
        dleft = dZ @ model.params[f"mix{l}.w_left"].T
        dright = dZ @ model.params[f"mix{l}.w_right"].T
        dH[:-1] += dleft[1:]
        dH[1:] += dright[:-1]
    np.add.at(grads["emb"], cache["ids"], dH)


def encode(words: Sequence[str], model: EncoderModel) -> np.ndarray:
    """Contextual embeddings for a sentence: row 0 is ROOT, row i is word i."""
    E, _ = encode_forward(model, words)
    return E


def zero_grads(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in params.items()}


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: zeros with prob ``rate``, survivors scaled."""
    if rate <= 0.0:
        return np.ones(shape)
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)

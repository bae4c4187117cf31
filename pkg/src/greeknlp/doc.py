"""Document/token data model and Greek text normalization.

Every other module consumes and produces these types. All types are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional

# The 16 modeled morphological categories, in their canonical reporting order.
MORPH_CATEGORIES = (
    "Case", "Definite", "Gender", "Number", "PronType", "Foreign",
    "Aspect", "Mood", "Person", "Tense", "VerbForm", "Voice",
    "NumType", "Poss", "Degree", "Abbr",
)

# The 17-tag universal POS inventory.
UPOS_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)

# The 18 supported entity types, in canonical order.
ENTITY_TYPES = (
    "ORG", "PERSON", "CARDINAL", "GPE", "DATE", "PERCENT", "ORDINAL",
    "LOC", "NORP", "TIME", "MONEY", "EVENT", "PRODUCT", "WORK_OF_ART",
    "FAC", "QUANTITY", "LAW", "LANGUAGE",
)

_NER_TAG_RE = re.compile(r"^(O|[BIES]-(%s))$" % "|".join(ENTITY_TYPES))


class DocError(ValueError):
    """Invalid document/token construction."""


@dataclass(frozen=True)
class MorphFeatures:
    """Per-word grammatical feature values, one optional label per category.

    An absent category means "not applicable" for the word.
    """

    items: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for cat, val in self.items:
            if cat not in MORPH_CATEGORIES:
                raise DocError(f"unknown morphological category: {cat!r}")
            if cat in seen:
                raise DocError(f"duplicate morphological category: {cat!r}")
            if not val:
                raise DocError(f"empty value for category {cat!r}")
            seen.add(cat)
        # Canonical storage order = category list order.
        ordered = tuple(sorted(self.items, key=lambda cv: MORPH_CATEGORIES.index(cv[0])))
        object.__setattr__(self, "items", ordered)

    @classmethod
    def of(cls, mapping: Optional[dict[str, str]] = None, **kwargs: str) -> "MorphFeatures":
        merged = dict(mapping or {})
        merged.update(kwargs)
        return cls(tuple(merged.items()))

    def get(self, category: str) -> Optional[str]:
        for cat, val in self.items:
            if cat == category:
                return val
        return None

    def as_dict(self) -> dict[str, str]:
        return dict(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __bool__(self) -> bool:
        return bool(self.items)

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(self.items)


EMPTY_FEATS = MorphFeatures()


@dataclass(frozen=True)
class Token:
    """A word with its annotation slots.

    ``index`` is the 1-based position within the sentence. ``head`` follows
    the CoNLL-U convention: 0 means the virtual root, i >= 1 points at the
    i-th word of the same sentence.
    """

    index: int
    form: str
    upos: Optional[str] = None
    feats: Optional[MorphFeatures] = None
    ner: Optional[str] = None
    head: Optional[int] = None
    deprel: Optional[str] = None

    def __post_init__(self) -> None:
        if self.index < 1:
            raise DocError(f"token index must be >= 1, got {self.index}")
        if not self.form:
            raise DocError("token form must be non-empty")
        if self.upos is not None and self.upos not in UPOS_TAGS:
            raise DocError(f"unknown UPOS tag: {self.upos!r}")
        if self.ner is not None and not _NER_TAG_RE.match(self.ner):
            raise DocError(f"invalid NER tag: {self.ner!r}")
        if self.head is not None:
            if self.head < 0:
                raise DocError(f"head must be >= 0, got {self.head}")
            if self.head == self.index:
                raise DocError(f"token {self.index} cannot head itself")

    def with_(self, **changes) -> "Token":
        return replace(self, **changes)


def validate_sentence(tokens: Iterable[Token]) -> None:
    """Check sentence-level invariants: indices 1..n, heads in range."""
    toks = list(tokens)
    n = len(toks)
    for pos, tok in enumerate(toks, start=1):
        if tok.index != pos:
            raise DocError(f"token index {tok.index} at position {pos}: must be consecutive from 1")
        if tok.head is not None and tok.head > n:
            raise DocError(f"token {tok.index}: head {tok.head} exceeds sentence length {n}")


@dataclass(frozen=True)
class Doc:
    """A raw text together with its sentence/token segmentation.

    ``extras`` carries CoNLL-U pass-through data (comments, unmodeled
    columns) so files round-trip; it is not part of the modeled content.
    ``transliterated`` records the Greek text produced by the g2g step
    when one ran.
    """

    raw_text: str
    sentences: tuple[tuple[Token, ...], ...]
    normalized: bool = False
    extras: Optional[tuple] = field(default=None, compare=False)
    transliterated: Optional[str] = None

    def __post_init__(self) -> None:
        for sent in self.sentences:
            validate_sentence(sent)

    def __len__(self) -> int:
        return len(self.sentences)

    def tokens(self) -> Iterator[Token]:
        for sent in self.sentences:
            yield from sent

    def forms(self) -> list[list[str]]:
        return [[t.form for t in sent] for sent in self.sentences]


# --- normalization ----------------------------------------------------------

# Explicit monotonic-Greek diacritic table: precomposed accented vowels map to
# their bare lowercase forms. Uppercase input is lowercased first, so only
# lowercase precomposed forms need entries. Bit-exact across platforms.
_GREEK_DIACRITIC_TABLE = {
    "ά": "α",  # ά -> α
    "έ": "ε",  # έ -> ε
    "ή": "η",  # ή -> η
    "ί": "ι",  # ί -> ι
    "ό": "ο",  # ό -> ο
    "ύ": "υ",  # ύ -> υ
    "ώ": "ω",  # ώ -> ω
    "ϊ": "ι",  # ϊ -> ι
    "ϋ": "υ",  # ϋ -> υ
    "ΐ": "ι",  # ΐ -> ι
    "ΰ": "υ",  # ΰ -> υ
}

# Combining marks removed when they survive NFC after a Greek base character
# (tonos, dialytika, and their precombined pair); covers decomposed input NFC
# cannot recompose. Marks on non-Greek bases are not Greek diacritics.
_STRIPPED_COMBINING = {"́", "̈", "̈́"}


def _is_greek_letter(ch: str) -> bool:
    return "Ͱ" <= ch <= "Ͽ" or "ἀ" <= ch <= "῿"


def normalize(text: str) -> str:
    """Lowercase and strip Greek tonos/dialytika diacritics.

    NFC-normalizes first; final sigma is kept distinct; non-Greek characters
    pass through lowercased. Total and idempotent.
    """
    text = unicodedata.normalize("NFC", text)
    # U+0130 is the one lower() mapping that would grow the string.
    text = text.replace("İ", "i")
    text = text.lower()
    out: list[str] = []
    for ch in text:
        if ch in _STRIPPED_COMBINING and out and _is_greek_letter(out[-1]):
            continue
        out.append(_GREEK_DIACRITIC_TABLE.get(ch, ch))
    return "".join(out)


# --- tokenization -----------------------------------------------------------

_SENT_FINAL = {".", ";", "!", "?"}


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _split_chunk(chunk: str) -> list[str]:
    """Peel leading/trailing punctuation runs off a whitespace-separated chunk."""
    leading: list[str] = []
    trailing: list[str] = []
    start, end = 0, len(chunk)
    while start < end and _is_punct(chunk[start]):
        leading.append(chunk[start])
        start += 1
    while end > start and _is_punct(chunk[end - 1]):
        trailing.append(chunk[end - 1])
        end -= 1
    core = [chunk[start:end]] if end > start else []
    return leading + core + list(reversed(trailing))


def tokenize(text: str, normalized: bool = False) -> Doc:
    """Rule-based tokenization into sentences of Tokens.

    Splits on whitespace, separates leading/trailing punctuation into their
    own tokens, and closes a sentence at ``. ; ! ?`` when followed by
    whitespace or end of text. Sentence splitting is deliberately simple
    (no abbreviation dictionary).
    """
    sentences: list[tuple[Token, ...]] = []
    current: list[str] = []
    for chunk in text.split():
        pieces = _split_chunk(chunk)
        for pos, piece in enumerate(pieces):
            current.append(piece)
            # Last piece of a chunk is followed by whitespace or end of text.
            if piece in _SENT_FINAL and pos == len(pieces) - 1:
                sentences.append(tuple(Token(i + 1, f) for i, f in enumerate(current)))
                current = []
    if current:
        sentences.append(tuple(Token(i + 1, f) for i, f in enumerate(current)))
    return Doc(raw_text=text, sentences=tuple(sentences), normalized=normalized)

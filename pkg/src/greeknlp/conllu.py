"""CoNLL-U reading and writing.

Modeled columns are FORM, UPOS, FEATS, HEAD, DEPREL. Everything else
(LEMMA, XPOS, DEPS, MISC, comments, multiword-token ranges, empty nodes)
is preserved verbatim in a pass-through store so files round-trip.

An ``NER=<tag>`` entry in MISC is surfaced into ``Token.ner`` (and written
back on output); there is no NER column in CoNLL-U proper.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from typing import Iterable, TextIO, Union

from .doc import Doc, MorphFeatures, Token, MORPH_CATEGORIES

_ID_RE = re.compile(r"^\d+$")
_RANGE_RE = re.compile(r"^\d+-\d+$")
_EMPTY_NODE_RE = re.compile(r"^\d+\.\d+$")


class ConlluError(ValueError):
    """Malformed CoNLL-U input; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class TokenExtras:
    """Unmodeled per-token columns, kept verbatim."""

    lemma: str = "_"
    xpos: str = "_"
    unknown_feats: tuple[tuple[str, str], ...] = ()
    deps: str = "_"
    misc: tuple[str, ...] = ()  # MISC entries other than NER=
    ner_misc_index: int = -1  # original position of NER= in MISC; -1 = append


@dataclass(frozen=True)
class SentenceExtras:
    """Pass-through sentence content: comments and non-word lines.

    ``raw_lines`` holds multiword-token and empty-node lines with a sort key
    placing them back at their original position among the word lines.
    """

    comments: tuple[str, ...] = ()
    raw_lines: tuple[tuple[tuple[int, int, int], str], ...] = ()
    token_extras: tuple[TokenExtras, ...] = ()


def _parse_feats(cell: str, line_no: int) -> tuple[MorphFeatures, tuple[tuple[str, str], ...]]:
    if cell == "_":
        return MorphFeatures(), ()
    known: list[tuple[str, str]] = []
    unknown: list[tuple[str, str]] = []
    for item in cell.split("|"):
        if "=" not in item:
            raise ConlluError(line_no, f"malformed FEATS item {item!r}")
        cat, val = item.split("=", 1)
        if not cat or not val:
            raise ConlluError(line_no, f"malformed FEATS item {item!r}")
        if cat in MORPH_CATEGORIES:
            known.append((cat, val))
        else:
            unknown.append((cat, val))
    try:
        feats = MorphFeatures(tuple(known))
    except ValueError as exc:
        raise ConlluError(line_no, str(exc)) from None
    return feats, tuple(unknown)


def _format_feats(feats: MorphFeatures | None, unknown: tuple[tuple[str, str], ...]) -> str:
    items = list(feats.items) if feats else []
    items.extend(unknown)
    if not items:
        return "_"
    # UD convention: alphabetical by category, case-insensitive.
    items.sort(key=lambda cv: cv[0].lower())
    return "|".join(f"{c}={v}" for c, v in items)


def _parse_misc(cell: str) -> tuple[str | None, tuple[str, ...], int]:
    if cell == "_":
        return None, (), -1
    ner = None
    ner_index = -1
    rest: list[str] = []
    for item in cell.split("|"):
        if item.startswith("NER=") and ner is None:
            ner = item[4:]
            ner_index = len(rest)
        else:
            rest.append(item)
    return ner, tuple(rest), ner_index


def _format_misc(ner: str | None, rest: tuple[str, ...], ner_index: int = -1) -> str:
    items = list(rest)
    if ner is not None:
        pos = ner_index if 0 <= ner_index <= len(items) else len(items)
        items.insert(pos, f"NER={ner}")
    return "|".join(items) if items else "_"


class _DocBuilder:
    def __init__(self) -> None:
        self.sentences: list[tuple[Token, ...]] = []
        self.extras: list[SentenceExtras] = []
        self.texts: list[str] = []

    def add(self, tokens, sext: SentenceExtras) -> None:
        self.sentences.append(tuple(tokens))
        self.extras.append(sext)
        text = None
        for c in sext.comments:
            if c.startswith("# text = "):
                text = c[len("# text = "):]
        self.texts.append(text if text is not None else " ".join(t.form for t in tokens))

    def build(self) -> Doc:
        return Doc(
            raw_text=" ".join(self.texts),
            sentences=tuple(self.sentences),
            normalized=False,
            extras=tuple(self.extras),
        )


def read_conllu(source: Union[str, TextIO]) -> list[Doc]:
    """Parse CoNLL-U text (string or stream) into Docs.

    ``# newdoc`` comments start a new Doc; otherwise the whole input is one
    Doc holding all sentences. Raises ConlluError with the offending line
    number on malformed input.
    """
    if isinstance(source, str):
        source = io.StringIO(source)

    docs: list[Doc] = []
    builder = _DocBuilder()

    comments: list[str] = []
    tokens: list[Token] = []
    token_extras: list[TokenExtras] = []
    raw_lines: list[tuple[tuple[int, int, int], str]] = []

    def flush(line_no: int) -> None:
        nonlocal comments, tokens, token_extras, raw_lines, builder
        if not tokens and not comments and not raw_lines:
            return
        if not tokens:
            raise ConlluError(line_no, "sentence block without word lines")
        if any(c.startswith("# newdoc") for c in comments) and builder.sentences:
            docs.append(builder.build())
            builder = _DocBuilder()
        builder.add(tokens, SentenceExtras(tuple(comments), tuple(raw_lines), tuple(token_extras)))
        comments, tokens, token_extras, raw_lines = [], [], [], []

    line_no = 0
    for line_no, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush(line_no)
            continue
        if line.startswith("#"):
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(line_no, f"expected 10 tab-separated columns, got {len(cols)}")
        tid, form, lemma, upos, xpos, feats_cell, head_cell, deprel, deps, misc = cols
        if _RANGE_RE.match(tid):
            raw_lines.append(((int(tid.split("-")[0]), 0, 0), line))
            continue
        if _EMPTY_NODE_RE.match(tid):
            major, minor = tid.split(".")
            raw_lines.append(((int(major), 2, int(minor)), line))
            continue
        if not _ID_RE.match(tid):
            raise ConlluError(line_no, f"bad token id {tid!r}")
        index = int(tid)
        if index != len(tokens) + 1:
            raise ConlluError(line_no, f"token id {index} out of sequence (expected {len(tokens) + 1})")
        if not form:
            raise ConlluError(line_no, "empty FORM")
        feats, unknown = _parse_feats(feats_cell, line_no)
        if head_cell == "_":
            head = None
        elif _ID_RE.match(head_cell):
            head = int(head_cell)
        else:
            raise ConlluError(line_no, f"bad HEAD {head_cell!r}")
        ner, misc_rest, ner_idx = _parse_misc(misc)
        try:
            tokens.append(Token(
                index=index, form=form,
                upos=None if upos == "_" else upos,
                feats=feats if feats else None,
                ner=ner,
                head=head,
                deprel=None if deprel == "_" else deprel,
            ))
        except ValueError as exc:
            raise ConlluError(line_no, str(exc)) from None
        token_extras.append(TokenExtras(lemma, xpos, unknown, deps, misc_rest, ner_idx))
    flush(line_no + 1)

    if builder.sentences:
        docs.append(builder.build())
    return docs


def write_conllu(docs: Union[Doc, Iterable[Doc]]) -> str:
    """Serialize Docs back to CoNLL-U text (UTF-8 conventions, \\n endings)."""
    if isinstance(docs, Doc):
        docs = [docs]
    out: list[str] = []
    for doc in docs:
        extras = doc.extras or tuple(None for _ in doc.sentences)
        for sent, sext in zip(doc.sentences, extras):
            if sext is None:
                sext = SentenceExtras()
            out.extend(sext.comments)
            lines: list[tuple[tuple[int, int, int], str]] = list(sext.raw_lines)
            tok_extras = sext.token_extras or tuple(TokenExtras() for _ in sent)
            for tok, text in zip(sent, tok_extras):
                cols = [
                    str(tok.index),
                    tok.form,
                    text.lemma,
                    tok.upos or "_",
                    text.xpos,
                    _format_feats(tok.feats, text.unknown_feats),
                    "_" if tok.head is None else str(tok.head),
                    tok.deprel or "_",
                    text.deps,
                    _format_misc(tok.ner, text.misc, text.ner_misc_index),
                ]
                lines.append(((tok.index, 1, 0), "\t".join(cols)))
            lines.sort(key=lambda kv: kv[0])
            out.extend(line for _, line in lines)
            out.append("")
    return "\n".join(out) + "\n" if out else ""


def read_conllu_file(path) -> list[Doc]:
    with open(path, encoding="utf-8") as fh:
        return read_conllu(fh)


def write_conllu_file(docs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_conllu(docs))

"""Pipeline composition: parse a processor spec, load model containers,
annotate text, and serialize documents canonically.

Processors: g2g (transliteration), pos (UPOS + morphology), ner, dp
(dependency parsing). If g2g is requested it always runs first, on the raw
text; pos/ner/dp are mutually independent annotators over the normalized,
tokenized text. The same models and input produce byte-identical output
across the library, CLI and HTTP entry points: they all funnel through
:func:`doc_to_json_str`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import container as container_mod
from . import g2g as g2g_mod
from . import ner as ner_mod
from . import parser as parser_mod
from . import tagger as tagger_mod
from .doc import Doc, Token, normalize, tokenize
from .encoder import SentenceTooLongError

PROCESSOR_NAMES = ("g2g", "pos", "ner", "dp")
MODEL_FILES = {name: f"{name}.grnlp" for name in PROCESSOR_NAMES}
DEFAULT_MODELS_ENV = "GREEKNLP_MODELS"


class PipelineError(ValueError):
    """Bad pipeline spec or unloadable models."""


@dataclass(frozen=True)
class PipelineSpec:
    """Ordered, duplicate-free processor set; g2g is normalized to run first."""

    processors: tuple[str, ...]

    @classmethod
    def parse(cls, spec: str, extra_names: Sequence[str] = ()) -> "PipelineSpec":
        names = [p.strip() for p in spec.split(",") if p.strip()]
        if not names:
            raise PipelineError("empty pipeline spec")
        valid = PROCESSOR_NAMES + tuple(extra_names)
        unknown = [n for n in names if n not in valid]
        if unknown:
            raise PipelineError(
                f"unknown processor(s) {unknown}; valid names: {', '.join(PROCESSOR_NAMES)}")
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise PipelineError(f"duplicate processor(s): {dupes}")
        if "g2g" in names:
            names = ["g2g"] + [n for n in names if n != "g2g"]
        return cls(tuple(names))


def default_models_dir() -> Path:
    return Path(os.environ.get(DEFAULT_MODELS_ENV, "models"))


class Pipeline:
    """Annotation pipeline over loaded model containers.

    ``custom_processors`` maps extra processor names to ``f(doc) -> doc``
    callables run at their listed position (used by tests to probe stage
    ordering).
    """

    def __init__(self, spec: str, models_dir: Optional[os.PathLike | str] = None,
                 decoder: str = "greedy",
                 custom_processors: Optional[dict[str, Callable[[Doc], Doc]]] = None):
        if decoder not in ("greedy", "mst"):
            raise PipelineError(f"unknown decoder {decoder!r}; valid: greedy, mst")
        self.decoder = decoder
        self.custom = dict(custom_processors or {})
        self.spec = PipelineSpec.parse(spec, extra_names=tuple(self.custom))
        self.models_dir = Path(models_dir) if models_dir is not None else default_models_dir()

        self.tagger: Optional[tagger_mod.TaggerModel] = None
        self.ner: Optional[ner_mod.NerModel] = None
        self.parser: Optional[parser_mod.ParserModel] = None
        self.g2g: Optional[tuple] = None
        for name in self.spec.processors:
            if name in self.custom:
                continue
            path = self.models_dir / MODEL_FILES[name]
            if not path.exists():
                raise PipelineError(f"missing model file for {name!r}: {path}")
            cont = container_mod.load_container(path)
            if cont.component != name:
                raise PipelineError(
                    f"{path} holds a {cont.component!r} model, expected {name!r}")
            if name == "pos":
                self.tagger = container_mod.unpack_tagger(cont)
            elif name == "ner":
                self.ner = container_mod.unpack_ner(cont)
            elif name == "dp":
                self.parser = container_mod.unpack_parser(cont)
            else:
                self.g2g = container_mod.unpack_g2g(cont)

    @classmethod
    def from_loaded(cls, spec: str, loaded: dict[str, object], decoder: str = "greedy",
                    custom_processors: Optional[dict[str, Callable[[Doc], Doc]]] = None) -> "Pipeline":
        """Assemble a pipeline over already-loaded models (no disk access)."""
        if decoder not in ("greedy", "mst"):
            raise PipelineError(f"unknown decoder {decoder!r}; valid: greedy, mst")
        self = object.__new__(cls)
        self.decoder = decoder
        self.custom = dict(custom_processors or {})
        self.spec = PipelineSpec.parse(spec, extra_names=tuple(self.custom))
        self.models_dir = None
        self.tagger = self.ner = self.parser = self.g2g = None
        for name in self.spec.processors:
            if name in self.custom:
                continue
            if name not in loaded:
                raise PipelineError(f"missing model for processor {name!r}")
            if name == "pos":
                self.tagger = loaded[name]
            elif name == "ner":
                self.ner = loaded[name]
            elif name == "dp":
                self.parser = loaded[name]
            else:
                self.g2g = loaded[name]
        return self

    def __call__(self, text: str) -> Doc:
        return self.run(text)

    def _annotate(self, doc: Doc, name: str) -> Doc:
        sentences = []
        for idx, sent in enumerate(doc.sentences):
            try:
                if name == "pos":
                    tokens = tagger_mod.annotate_sentence(self.tagger, sent)
                elif name == "ner":
                    tokens = ner_mod.annotate_sentence(self.ner, sent, sentence=idx)
                else:
                    tokens = parser_mod.annotate_sentence(self.parser, sent, self.decoder)
            except SentenceTooLongError as exc:
                raise SentenceTooLongError(f"sentence {idx}: {exc}") from None
            sentences.append(tuple(tokens))
        return Doc(doc.raw_text, tuple(sentences), doc.normalized,
                   transliterated=doc.transliterated)

    def run(self, text: str) -> Doc:
        stages = list(self.spec.processors)
        transliterated: Optional[str] = None
        working = text
        if stages and stages[0] == "g2g":
            table, lm, lm_weight, beam_width = self.g2g
            transliterated = g2g_mod.g2g_decode(working, table, lm,
                                                beam_width=beam_width, lm_weight=lm_weight)
            working = transliterated
            stages = stages[1:]
        tokenized = tokenize(normalize(working), normalized=True)
        doc = Doc(raw_text=text, sentences=tokenized.sentences, normalized=True,
                  transliterated=transliterated)
        for name in stages:
            if name in self.custom:
                doc = self.custom[name](doc)
            else:
                doc = self._annotate(doc, name)
        return doc


# --- canonical serialization -----------------------------------------------------

def token_to_dict(tok: Token) -> dict:
    return {
        "index": tok.index,
        "form": tok.form,
        "upos": tok.upos,
        "feats": tok.feats.as_dict() if tok.feats is not None else None,
        "ner": tok.ner,
        "head": tok.head,
        "deprel": tok.deprel,
    }


def doc_to_dict(doc: Doc) -> dict:
    return {
        "text": doc.raw_text,
        "transliterated": doc.transliterated,
        "normalized": doc.normalized,
        "sentences": [
            {"tokens": [token_to_dict(t) for t in sent]} for sent in doc.sentences
        ],
    }


def doc_to_json_str(doc: Doc) -> str:
    """The single canonical JSON rendering used by every entry point."""
    return json.dumps(doc_to_dict(doc), ensure_ascii=False, separators=(",", ":"))

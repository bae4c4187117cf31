"""Greek NLP pipeline: POS/morphological tagging, dependency parsing, NER
and Greeklish-to-Greek transliteration, behind one Pipeline API.

    from greeknlp import Pipeline
    nlp = Pipeline("pos, ner, dp", models_dir="models")
    doc = nlp("Η Ιταλία κέρδισε την Αγγλία στον τελικό το 2020.")
"""

__version__ = "0.1.0"

from .doc import (Doc, MorphFeatures, Token, normalize, tokenize,
                  ENTITY_TYPES, MORPH_CATEGORIES, UPOS_TAGS)
from .conllu import read_conllu, write_conllu, read_conllu_file, write_conllu_file
from .pipeline import Pipeline, PipelineSpec, PipelineError, doc_to_json_str

__all__ = [
    "Doc", "MorphFeatures", "Token", "normalize", "tokenize",
    "ENTITY_TYPES", "MORPH_CATEGORIES", "UPOS_TAGS",
    "read_conllu", "write_conllu", "read_conllu_file", "write_conllu_file",
    "Pipeline", "PipelineSpec", "PipelineError", "doc_to_json_str",
    "__version__",
]

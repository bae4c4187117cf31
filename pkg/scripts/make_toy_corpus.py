#!/usr/bin/env python3
"""Generate the fixed 32-sentence synthetic Greek corpus.

Gold annotations are internally consistent so the toy models can reach
100% on the training set: every surface form has a single (UPOS, FEATS)
reading; dependency targets are resolvable from word identity plus a
one-word context window; NER tags are word-determined except for spans
that deliberately require context (ολυμπιακοι αγωνες vs bare αγωνες).

Writes tests/data/toy_corpus.conllu. Run from the repository root.
"""

import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from greeknlp.conllu import read_conllu
from greeknlp.ner import repair_bioes
from greeknlp.parser import is_arborescence

# form -> (upos, feats "Cat=Val|..." or "")
LEXICON = {
    # determiners
    "η": ("DET", "Case=Nom|Definite=Def|Gender=Fem|Number=Sing|PronType=Art"),
    "ο": ("DET", "Case=Nom|Definite=Def|Gender=Masc|Number=Sing|PronType=Art"),
    "οι": ("DET", "Case=Nom|Definite=Def|Gender=Masc|Number=Plur|PronType=Art"),
    "την": ("DET", "Case=Acc|Definite=Def|Gender=Fem|Number=Sing|PronType=Art"),
    "τον": ("DET", "Case=Acc|Definite=Def|Gender=Masc|Number=Sing|PronType=Art"),
    "το": ("DET", "Definite=Def|Gender=Neut|Number=Sing|PronType=Art"),
    "τα": ("DET", "Definite=Def|Gender=Neut|Number=Plur|PronType=Art"),
    "της": ("DET", "Case=Gen|Definite=Def|Gender=Fem|Number=Sing|PronType=Art"),
    # proper nouns
    "ιταλια": ("PROPN", "Case=Nom|Gender=Fem|Number=Sing"),
    "αγγλια": ("PROPN", "Case=Acc|Gender=Fem|Number=Sing"),
    "ελλαδα": ("PROPN", "Case=Nom|Gender=Fem|Number=Sing"),
    "ελλαδας": ("PROPN", "Case=Gen|Gender=Fem|Number=Sing"),
    "γαλλιας": ("PROPN", "Case=Gen|Gender=Fem|Number=Sing"),
    "ευρωπης": ("PROPN", "Case=Gen|Gender=Fem|Number=Sing"),
    "αθηνα": ("PROPN", "Case=Nom|Gender=Fem|Number=Sing"),
    "θεσσαλονικη": ("PROPN", "Case=Nom|Gender=Fem|Number=Sing"),
    "πατρα": ("PROPN", "Case=Acc|Gender=Fem|Number=Sing"),
    "υορκη": ("PROPN", "Case=Acc|Gender=Fem|Number=Sing"),
    "μαρια": ("PROPN", "Case=Nom|Gender=Fem|Number=Sing"),
    "ελενη": ("PROPN", "Case=Nom|Gender=Fem|Number=Sing"),
    "γιαννης": ("PROPN", "Case=Nom|Gender=Masc|Number=Sing"),
    "γιαννη": ("PROPN", "Case=Acc|Gender=Masc|Number=Sing"),
    "νικος": ("PROPN", "Case=Nom|Gender=Masc|Number=Sing"),
    "αλεξανδρος": ("PROPN", "Case=Nom|Gender=Masc|Number=Sing"),
    "εβερεστ": ("PROPN", "Case=Nom|Gender=Neut|Number=Sing"),
    "ολυμπος": ("PROPN", "Case=Nom|Gender=Masc|Number=Sing"),
    "ολυμπο": ("PROPN", "Case=Acc|Gender=Masc|Number=Sing"),
    "ελληνικα": ("PROPN", "Case=Acc|Gender=Neut|Number=Plur"),
    # common nouns
    "ομαδα": ("NOUN", "Case=Nom|Gender=Fem|Number=Sing"),
    "προεδρος": ("NOUN", "Case=Nom|Gender=Masc|Number=Sing"),
    "πολη": ("NOUN", "Case=Nom|Gender=Fem|Number=Sing"),
    "πολεις": ("NOUN", "Case=Nom|Gender=Fem|Number=Plur"),
    "νικη": ("NOUN", "Case=Nom|Gender=Fem|Number=Sing"),
    "επανασταση": ("NOUN", "Case=Nom|Gender=Fem|Number=Sing"),
    "βουνο": ("NOUN", "Case=Nom|Gender=Neut|Number=Sing"),
    "γεγονος": ("NOUN", "Case=Nom|Gender=Neut|Number=Sing"),
    "ποδηλατο": ("NOUN", "Case=Nom|Gender=Neut|Number=Sing"),
    "οργανισμος": ("NOUN", "Case=Nom|Gender=Masc|Number=Sing"),
    "εθνων": ("NOUN", "Case=Gen|Gender=Neut|Number=Plur"),
    "αγωνες": ("NOUN", "Case=Nom|Gender=Masc|Number=Plur"),
    "ανθρωποι": ("NOUN", "Case=Nom|Gender=Masc|Number=Plur"),
    "παιδια": ("NOUN", "Case=Nom|Gender=Neut|Number=Plur"),
    "τελικο": ("NOUN", "Case=Acc|Gender=Masc|Number=Sing"),
    "αγωνα": ("NOUN", "Case=Acc|Gender=Masc|Number=Sing"),
    "ταινια": ("NOUN", "Case=Acc|Gender=Fem|Number=Sing"),
    "ταινιες": ("NOUN", "Case=Acc|Gender=Fem|Number=Plur"),
    "βιβλιο": ("NOUN", "Case=Acc|Gender=Neut|Number=Sing"),
    "παιχνιδι": ("NOUN", "Case=Acc|Gender=Neut|Number=Sing"),
    "θαλασσα": ("NOUN", "Case=Acc|Gender=Fem|Number=Sing"),
    "κηπο": ("NOUN", "Case=Acc|Gender=Masc|Number=Sing"),
    "εφημεριδες": ("NOUN", "Case=Acc|Gender=Fem|Number=Plur"),
    # verbs / auxiliaries
    "κερδισε": ("VERB", "Aspect=Perf|Mood=Ind|Number=Sing|Person=3|Tense=Past|VerbForm=Fin|Voice=Act"),
    "ειδε": ("VERB", "Aspect=Perf|Mood=Ind|Number=Sing|Person=3|Tense=Past|VerbForm=Fin|Voice=Act"),
    "διαβασε": ("VERB", "Aspect=Perf|Mood=Ind|Number=Sing|Person=3|Tense=Past|VerbForm=Fin|Voice=Act"),
    "εγινε": ("VERB", "Aspect=Perf|Mood=Ind|Number=Sing|Person=3|Tense=Past|VerbForm=Fin|Voice=Pass"),
    "επισκεφθηκε": ("VERB", "Aspect=Perf|Mood=Ind|Number=Sing|Person=3|Tense=Past|VerbForm=Fin|Voice=Pass"),
    "κοιμηθηκε": ("VERB", "Aspect=Perf|Mood=Ind|Number=Sing|Person=3|Tense=Past|VerbForm=Fin|Voice=Pass"),
    "μιλαει": ("VERB", "Aspect=Imp|Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin|Voice=Act"),
    "παιζουν": ("VERB", "Aspect=Imp|Mood=Ind|Number=Plur|Person=3|Tense=Pres|VerbForm=Fin|Voice=Act"),
    "ταξιδεψαν": ("VERB", "Aspect=Perf|Mood=Ind|Number=Plur|Person=3|Tense=Past|VerbForm=Fin|Voice=Act"),
    "ταξιδεψε": ("VERB", "Aspect=Perf|Mood=Ind|Number=Sing|Person=3|Tense=Past|VerbForm=Fin|Voice=Act"),
    "τρεξε": ("VERB", "Aspect=Perf|Mood=Imp|Number=Sing|Person=2|VerbForm=Fin|Voice=Act"),
    "ειναι": ("AUX", "Mood=Ind|Person=3|Tense=Pres|VerbForm=Fin|Voice=Act"),
    "ηταν": ("AUX", "Mood=Ind|Person=3|Tense=Past|VerbForm=Fin|Voice=Act"),
    # adjectives
    "ομορφη": ("ADJ", "Case=Nom|Degree=Pos|Gender=Fem|Number=Sing"),
    "μεγαλη": ("ADJ", "Case=Nom|Degree=Pos|Gender=Fem|Number=Sing"),
    "μεγαλυτερη": ("ADJ", "Case=Nom|Degree=Cmp|Gender=Fem|Number=Sing"),
    "μεγαλος": ("ADJ", "Case=Nom|Degree=Pos|Gender=Masc|Number=Sing"),
    "μεγαλοι": ("ADJ", "Case=Nom|Degree=Pos|Gender=Masc|Number=Plur"),
    "μεγαλο": ("ADJ", "Case=Nom|Degree=Pos|Gender=Neut|Number=Sing"),
    "μεγας": ("ADJ", "Case=Nom|Degree=Pos|Gender=Masc|Number=Sing"),
    "ψηλο": ("ADJ", "Case=Nom|Degree=Pos|Gender=Neut|Number=Sing"),
    "παλιο": ("ADJ", "Case=Nom|Degree=Pos|Gender=Neut|Number=Sing"),
    "γρηγορο": ("ADJ", "Case=Nom|Degree=Pos|Gender=Neut|Number=Sing"),
    "πρωτη": ("ADJ", "Case=Nom|Degree=Pos|Gender=Fem|Number=Sing|NumType=Ord"),
    "νεα": ("ADJ", "Case=Acc|Degree=Pos|Gender=Fem|Number=Sing"),
    "ηνωμενων": ("ADJ", "Case=Gen|Degree=Pos|Gender=Neut|Number=Plur"),
    "ολυμπιακοι": ("ADJ", "Case=Nom|Degree=Pos|Gender=Masc|Number=Plur"),
    # closed classes
    "στον": ("ADP", ""),
    "στη": ("ADP", ""),
    "απο": ("ADP", ""),
    "με": ("ADP", ""),
    "και": ("CCONJ", ""),
    "αυτη": ("PRON", "Case=Nom|Gender=Fem|Number=Sing|PronType=Dem"),
    "μου": ("PRON", "Case=Gen|Number=Sing|Person=1|Poss=Yes|PronType=Prs"),
    "χθες": ("ADV", ""),
    "σημερα": ("ADV", ""),
    "γρηγορα": ("ADV", ""),
    "κλπ": ("ADV", "Abbr=Yes"),
    "ιντερνετ": ("X", "Foreign=Yes"),
    "δυο": ("NUM", "NumType=Card"),
    "2020": ("NUM", "NumType=Card"),
    "2021": ("NUM", "NumType=Card"),
    "1821": ("NUM", "NumType=Card"),
    ".": ("PUNCT", ""),
    "!": ("PUNCT", ""),
    ";": ("PUNCT", ""),
}

# Each sentence: list of (form, head, deprel, ner-tag).
SENTENCES = [
    # 1: the worked football sentence
    [("η", 2, "det", "O"), ("ιταλια", 3, "nsubj", "S-ORG"), ("κερδισε", 0, "root", "O"),
     ("την", 5, "det", "O"), ("αγγλια", 3, "obj", "S-ORG"), ("στον", 7, "case", "O"),
     ("τελικο", 3, "obl", "O"), ("το", 9, "det", "O"), ("2020", 3, "obl", "S-DATE"),
     (".", 3, "punct", "O")],
    # 2
    [("η", 2, "det", "O"), ("αθηνα", 5, "nsubj", "S-GPE"), ("ειναι", 5, "cop", "O"),
     ("ομορφη", 5, "amod", "O"), ("πολη", 0, "root", "O"), (".", 5, "punct", "O")],
    # 3
    [("η", 2, "det", "O"), ("θεσσαλονικη", 4, "nsubj", "S-GPE"), ("ειναι", 4, "cop", "O"),
     ("μεγαλη", 0, "root", "O"), (".", 4, "punct", "O")],
    # 4
    [("ο", 2, "det", "O"), ("γιαννης", 3, "nsubj", "S-PERSON"), ("ειδε", 0, "root", "O"),
     ("την", 5, "det", "O"), ("ταινια", 3, "obj", "O"), (".", 3, "punct", "O")],
    # 5
    [("η", 2, "det", "O"), ("μαρια", 3, "nsubj", "S-PERSON"), ("διαβασε", 0, "root", "O"),
     ("το", 5, "det", "O"), ("βιβλιο", 3, "obj", "O"), (".", 3, "punct", "O")],
    # 6: verb-first question
    [("επισκεφθηκε", 0, "root", "O"), ("ο", 3, "det", "O"), ("νικος", 1, "nsubj", "S-PERSON"),
     ("την", 5, "det", "O"), ("πατρα", 1, "obj", "S-GPE"), (";", 1, "punct", "O")],
    # 7
    [("η", 2, "det", "O"), ("ελενη", 3, "nsubj", "S-PERSON"), ("μιλαει", 0, "root", "O"),
     ("ελληνικα", 3, "obj", "S-LANGUAGE"), ("σημερα", 3, "advmod", "O"), (".", 3, "punct", "O")],
    # 8
    [("ο", 3, "det", "O"), ("μεγας", 3, "amod", "B-PERSON"), ("αλεξανδρος", 4, "nsubj", "E-PERSON"),
     ("κερδισε", 0, "root", "O"), ("τον", 6, "det", "O"), ("αγωνα", 4, "obj", "O"),
     (".", 4, "punct", "O")],
    # 9
    [("οι", 3, "det", "O"), ("ολυμπιακοι", 3, "amod", "B-EVENT"), ("αγωνες", 6, "nsubj", "E-EVENT"),
     ("ειναι", 6, "cop", "O"), ("μεγαλο", 6, "amod", "O"), ("γεγονος", 0, "root", "O"),
     (".", 6, "punct", "O")],
    # 10
    [("εβερεστ", 4, "nsubj", "S-LOC"), ("ειναι", 4, "cop", "O"), ("ψηλο", 4, "amod", "O"),
     ("βουνο", 0, "root", "O"), (".", 4, "punct", "O")],
    # 11
    [("ο", 2, "det", "O"), ("ολυμπος", 4, "nsubj", "S-LOC"), ("ειναι", 4, "cop", "O"),
     ("βουνο", 0, "root", "O"), ("της", 6, "det", "O"), ("ελλαδας", 4, "nmod", "S-GPE"),
     (".", 4, "punct", "O")],
    # 12
    [("η", 2, "det", "O"), ("ομαδα", 6, "nsubj", "O"), ("της", 4, "det", "O"),
     ("γαλλιας", 2, "nmod", "S-GPE"), ("ειναι", 6, "cop", "O"), ("μεγαλη", 0, "root", "O"),
     (".", 6, "punct", "O")],
    # 13
    [("ο", 2, "det", "O"), ("προεδρος", 3, "nsubj", "O"), ("επισκεφθηκε", 0, "root", "O"),
     ("την", 5, "det", "O"), ("πατρα", 3, "obj", "S-GPE"), ("χθες", 3, "advmod", "O"),
     (".", 3, "punct", "O")],
    # 14
    [("τα", 2, "det", "O"), ("παιδια", 3, "nsubj", "O"), ("παιζουν", 0, "root", "O"),
     ("στον", 5, "case", "O"), ("κηπο", 3, "obl", "O"), (".", 3, "punct", "O")],
    # 15
    [("οι", 2, "det", "O"), ("ανθρωποι", 3, "nsubj", "O"), ("ταξιδεψαν", 0, "root", "O"),
     ("στη", 5, "case", "O"), ("θαλασσα", 3, "obl", "O"), (".", 3, "punct", "O")],
    # 16
    [("η", 2, "det", "O"), ("μαρια", 3, "nsubj", "S-PERSON"), ("κοιμηθηκε", 0, "root", "O"),
     ("χθες", 3, "advmod", "O"), (".", 3, "punct", "O")],
    # 17
    [("το", 2, "det", "O"), ("ποδηλατο", 5, "nsubj", "O"), ("μου", 2, "nmod", "O"),
     ("ειναι", 5, "cop", "O"), ("παλιο", 0, "root", "O"), (".", 5, "punct", "O")],
    # 18: the transliteration example sentence
    [("η", 2, "det", "O"), ("αθηνα", 7, "nsubj", "S-GPE"), ("και", 5, "cc", "O"),
     ("η", 5, "det", "O"), ("θεσσαλονικη", 2, "conj", "S-GPE"), ("ειναι", 7, "cop", "O"),
     ("πολεις", 0, "root", "O"), (".", 7, "punct", "O")],
    # 19
    [("ο", 2, "det", "O"), ("οργανισμος", 6, "nsubj", "B-ORG"), ("ηνωμενων", 4, "amod", "I-ORG"),
     ("εθνων", 2, "nmod", "E-ORG"), ("ειναι", 6, "cop", "O"), ("μεγαλος", 0, "root", "O"),
     (".", 6, "punct", "O")],
    # 20
    [("η", 2, "det", "O"), ("ελενη", 3, "nsubj", "S-PERSON"), ("ειδε", 0, "root", "O"),
     ("τον", 5, "det", "O"), ("ολυμπο", 3, "obj", "S-LOC"), ("απο", 8, "case", "O"),
     ("την", 8, "det", "O"), ("θαλασσα", 3, "obl", "O"), (".", 3, "punct", "O")],
    # 21
    [("τρεξε", 0, "root", "O"), ("γρηγορα", 1, "advmod", "O"), ("!", 1, "punct", "O")],
    # 22
    [("η", 2, "det", "O"), ("ελλαδα", 3, "nsubj", "S-ORG"), ("κερδισε", 0, "root", "O"),
     ("το", 5, "det", "O"), ("παιχνιδι", 3, "obj", "O"), ("σημερα", 3, "advmod", "O"),
     (".", 3, "punct", "O")],
    # 23
    [("η", 2, "det", "O"), ("νικη", 4, "nsubj", "O"), ("ειναι", 4, "cop", "O"),
     ("μεγαλυτερη", 0, "root", "O"), (".", 4, "punct", "O")],
    # 24
    [("η", 2, "det", "O"), ("αθηνα", 5, "nsubj", "S-GPE"), ("ειναι", 5, "cop", "O"),
     ("πρωτη", 5, "amod", "O"), ("πολη", 0, "root", "O"), (".", 5, "punct", "O")],
    # 25
    [("το", 2, "det", "O"), ("ιντερνετ", 4, "nsubj", "O"), ("ειναι", 4, "cop", "O"),
     ("γρηγορο", 0, "root", "O"), (".", 4, "punct", "O")],
    # 26
    [("ο", 2, "det", "O"), ("γιαννης", 3, "nsubj", "S-PERSON"), ("διαβασε", 0, "root", "O"),
     ("εφημεριδες", 3, "obj", "O"), ("κλπ", 3, "advmod", "O"), (".", 3, "punct", "O")],
    # 27: αγωνες without ολυμπιακοι is not an entity
    [("οι", 2, "det", "O"), ("αγωνες", 4, "nsubj", "O"), ("ηταν", 4, "cop", "O"),
     ("μεγαλοι", 0, "root", "O"), ("το", 6, "det", "O"), ("2021", 4, "obl", "S-DATE"),
     (".", 4, "punct", "O")],
    # 28
    [("η", 2, "det", "O"), ("επανασταση", 3, "nsubj", "O"), ("εγινε", 0, "root", "O"),
     ("το", 5, "det", "O"), ("1821", 3, "obl", "S-DATE"), (".", 3, "punct", "O")],
    # 29
    [("ο", 2, "det", "O"), ("νικος", 3, "nsubj", "S-PERSON"), ("ταξιδεψε", 0, "root", "O"),
     ("στη", 6, "case", "O"), ("νεα", 6, "amod", "B-GPE"), ("υορκη", 3, "obl", "E-GPE"),
     (".", 3, "punct", "O")],
    # 30
    [("αυτη", 2, "nsubj", "O"), ("ειδε", 0, "root", "O"), ("δυο", 4, "nummod", "O"),
     ("ταινιες", 2, "obj", "O"), ("σημερα", 2, "advmod", "O"), (".", 2, "punct", "O")],
    # 31
    [("η", 2, "det", "O"), ("μαρια", 3, "nsubj", "S-PERSON"), ("μιλαει", 0, "root", "O"),
     ("με", 6, "case", "O"), ("τον", 6, "det", "O"), ("γιαννη", 3, "obl", "S-PERSON"),
     ("σημερα", 3, "advmod", "O"), (".", 3, "punct", "O")],
    # 32
    [("ο", 2, "det", "O"), ("προεδρος", 5, "nsubj", "O"), ("της", 4, "det", "O"),
     ("ευρωπης", 2, "nmod", "S-LOC"), ("ειδε", 0, "root", "O"), ("τον", 7, "det", "O"),
     ("αγωνα", 5, "obj", "O"), (".", 5, "punct", "O")],
]


def detokenize(forms):
    text = " ".join(forms)
    return re.sub(r" ([.;!?,])", r"\1", text)


def validate():
    assert len(SENTENCES) == 32, len(SENTENCES)
    for idx, sent in enumerate(SENTENCES):
        heads = [head for _, head, _, _ in sent]
        assert is_arborescence(heads), f"sentence {idx + 1} is not a tree"
        assert heads.count(0) == 1, f"sentence {idx + 1} must have exactly one root"
        tags = [ner for _, _, _, ner in sent]
        repaired, _ = repair_bioes(tags)
        assert repaired == tags, f"sentence {idx + 1} has invalid BIOES: {tags}"
        for form, _, _, _ in sent:
            assert form in LEXICON, f"missing lexicon entry: {form}"


def emit() -> str:
    lines = []
    for sent in SENTENCES:
        lines.append(f"# text = {detokenize([f for f, _, _, _ in sent])}")
        for i, (form, head, deprel, ner) in enumerate(sent, start=1):
            upos, feats = LEXICON[form]
            misc = f"NER={ner}" if ner != "O" else "_"
            lines.append("\t".join([
                str(i), form, "_", upos, "_", feats or "_",
                str(head), deprel, "_", misc,
            ]))
        lines.append("")
    return "\n".join(lines) + "\n"


def main():
    validate()
    text = emit()
    read_conllu(text)  # must parse cleanly
    out = Path(__file__).resolve().parent.parent / "tests" / "data" / "toy_corpus.conllu"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    print(f"wrote {out} ({len(SENTENCES)} sentences)")


if __name__ == "__main__":
    main()

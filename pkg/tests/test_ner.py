import math
import re

import numpy as np
import pytest
from hypothesis import given, strategies as st

from greeknlp.doc import ENTITY_TYPES, Token
from greeknlp.encoder import EncoderConfig, EncoderModel, SubwordVocab
from greeknlp.ner import (NER_TAGSET, EntitySpan, entity_f1, init_ner, ner_decode,
                          ner_logits, ner_loss, repair_bioes, spans_to_tags,
                          tags_to_spans)


def test_tagset_size_and_types():
    assert len(NER_TAGSET) == 73
    assert NER_TAGSET[0] == "O"
    assert len(ENTITY_TYPES) == 18
    assert set(ENTITY_TYPES) == {
        "ORG", "PERSON", "CARDINAL", "GPE", "DATE", "PERCENT", "ORDINAL", "LOC",
        "NORP", "TIME", "MONEY", "EVENT", "PRODUCT", "WORK_OF_ART", "FAC",
        "QUANTITY", "LAW", "LANGUAGE"}


def logits_for(tags):
    arr = np.zeros((len(tags), len(NER_TAGSET)))
    for i, t in enumerate(tags):
        arr[i, NER_TAGSET.index(t)] = 5.0
    return arr


def regex_span_scanner(tags):
    """Independent span extraction: regex over a serialized tag string."""
    joined = " ".join(tags) + " "
    spans = set()
    for m in re.finditer(r"S-(\w+) ", joined):
        pos = joined[:m.start()].count(" ") + 1
        spans.add((pos, pos, m.group(1)))
    for m in re.finditer(r"B-(\w+)( I-\1)* E-\1 ", joined):
        start = joined[:m.start()].count(" ") + 1
        end = start + m.group(0).strip().count(" ")
        spans.add((start, end, m.group(1)))
    return spans


def test_single_token_org_span():
    tags, spans = ner_decode(logits_for(["O", "S-ORG", "O", "O"]))
    assert tags == ["O", "S-ORG", "O", "O"]
    assert spans == [EntitySpan(0, 2, 2, "ORG")]


def test_all_outside_yields_no_spans():
    tags, spans = ner_decode(logits_for(["O", "O", "O"]))
    assert spans == []


def test_multiword_and_single_spans_match_regex_scanner():
    tags = ["B-GPE", "E-GPE", "S-LOC"]
    spans = tags_to_spans(tags)
    assert {(s.start, s.end, s.type) for s in spans} == {(1, 2, "GPE"), (3, 3, "LOC")}
    assert {(s.start, s.end, s.type) for s in spans} == regex_span_scanner(tags)


def test_decode_ties_to_lowest_tag_id():
    tags, _ = ner_decode(np.zeros((3, len(NER_TAGSET))))
    assert tags == ["O", "O", "O"]  # id 0 is O


@pytest.mark.parametrize("raw,expected", [
    (["I-ORG", "I-ORG", "E-ORG"], ["B-ORG", "I-ORG", "E-ORG"]),
    (["E-GPE"], ["S-GPE"]),
    (["B-LOC"], ["S-LOC"]),
    (["B-LOC", "I-LOC"], ["B-LOC", "E-LOC"]),
    (["S-ORG", "I-ORG"], ["S-ORG", "S-ORG"]),
    (["B-ORG", "B-ORG"], ["S-ORG", "S-ORG"]),
    (["B-ORG", "I-GPE"], ["S-ORG", "S-GPE"]),
    (["O", "I-DATE", "O"], ["O", "S-DATE", "O"]),
])
def test_repair_cases(raw, expected):
    repaired, spans = repair_bioes(raw)
    assert repaired == expected
    assert repaired == spans_to_tags(spans, len(raw))


VALID_SEQS = [
    ["O"],
    ["S-ORG"],
    ["B-GPE", "E-GPE"],
    ["B-GPE", "I-GPE", "E-GPE", "O", "S-LOC"],
    ["S-ORG", "S-ORG"],
    ["B-DATE", "E-DATE", "B-DATE", "E-DATE"],
    ["O", "B-LAW", "I-LAW", "I-LAW", "E-LAW"],
]


@pytest.mark.parametrize("tags", VALID_SEQS)
def test_repair_is_identity_on_valid_sequences(tags):
    repaired, _ = repair_bioes(tags)
    assert repaired == tags


@st.composite
def span_sets(draw):
    length = draw(st.integers(1, 12))
    n_spans = draw(st.integers(0, 4))
    spans = []
    used = set()
    for _ in range(n_spans):
        start = draw(st.integers(1, length))
        end = draw(st.integers(start, min(start + 3, length)))
        if any(p in used for p in range(start, end + 1)):
            continue
        used.update(range(start, end + 1))
        spans.append(EntitySpan(0, start, end, draw(st.sampled_from(ENTITY_TYPES))))
    return sorted(spans), length


@given(span_sets())
def test_spans_tags_round_trip(case):
    spans, length = case
    tags = spans_to_tags(spans, length)
    assert sorted(tags_to_spans(tags)) == spans
    repaired, respanned = repair_bioes(tags)
    assert repaired == tags
    assert sorted(respanned) == spans


@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 12))
def test_decoded_spans_never_overlap(seed, n):
    logits = np.random.default_rng(seed).normal(size=(n, len(NER_TAGSET)))
    _, spans = ner_decode(logits)
    seen = set()
    for s in spans:
        assert 1 <= s.start <= s.end <= n
        for pos in range(s.start, s.end + 1):
            assert pos not in seen
            seen.add(pos)


def make_model(seed=0):
    words = ["η", "αθηνα", "ειναι"]
    vocab = SubwordVocab.build(words)
    enc = EncoderModel.init(vocab, EncoderConfig(dim=6, layers=1, seed=seed))
    return init_ner(enc, seed=seed + 1), words


def test_loss_uniform_logits():
    model, words = make_model()
    toks = [Token(i + 1, w, ner="O") for i, w in enumerate(words)]
    logits = np.zeros((3, len(NER_TAGSET)))
    assert math.isclose(ner_loss(logits, toks), 3 * math.log(73), rel_tol=1e-12)


def test_loss_limit_zero():
    toks = [Token(1, "αθηνα", ner="S-GPE")]
    logits = np.zeros((1, len(NER_TAGSET)))
    logits[0, NER_TAGSET.index("S-GPE")] = 1e4
    assert ner_loss(logits, toks) < 1e-8


def test_loss_matches_scalar_oracle():
    model, words = make_model()
    toks = [Token(1, "η", ner="O"), Token(2, "αθηνα", ner="S-GPE"),
            Token(3, "ειναι", ner="O")]
    logits = ner_logits(words, model)
    expected = 0.0
    for i, tok in enumerate(toks):
        row = logits[i]
        denom = sum(math.exp(x) for x in row)
        expected += -math.log(math.exp(row[NER_TAGSET.index(tok.ner)]) / denom)
    assert math.isclose(ner_loss(logits, toks), expected, rel_tol=1e-6)


# --- entity F1 ---------------------------------------------------------------

def test_f1_perfect():
    spans = [EntitySpan(0, 1, 2, "ORG"), EntitySpan(1, 3, 3, "GPE")]
    report = entity_f1(spans, list(spans))
    assert report.micro.f1 == 1.0
    assert report.macro_f1 == 1.0
    for prf in report.per_type.values():
        assert prf.f1 == 1.0


def test_f1_empty_predictions():
    gold = [EntitySpan(0, 1, 1, "ORG")]
    report = entity_f1([], gold)
    assert report.micro.recall == 0.0
    assert report.micro.f1 == 0.0


def test_f1_hand_computed_case():
    gold = [EntitySpan(0, 1, 1, "ORG"), EntitySpan(0, 3, 4, "ORG"), EntitySpan(1, 1, 1, "ORG")]
    pred = [EntitySpan(0, 1, 1, "ORG"), EntitySpan(0, 6, 6, "ORG")]
    report = entity_f1(pred, gold)
    prf = report.per_type["ORG"]
    assert math.isclose(prf.precision, 0.5)
    assert math.isclose(prf.recall, 1 / 3)
    assert math.isclose(prf.f1, 0.4)


def test_f1_requires_exact_boundary_and_type():
    gold = [EntitySpan(0, 1, 2, "ORG")]
    assert entity_f1([EntitySpan(0, 1, 1, "ORG")], gold).micro.f1 == 0.0
    assert entity_f1([EntitySpan(0, 1, 2, "GPE")], gold).micro.f1 == 0.0
    assert entity_f1([EntitySpan(1, 1, 2, "ORG")], gold).micro.f1 == 0.0


def test_macro_over_types_with_support_only():
    gold = [EntitySpan(0, 1, 1, "ORG"), EntitySpan(0, 2, 2, "GPE")]
    pred = [EntitySpan(0, 1, 1, "ORG")]
    report = entity_f1(pred, gold)
    assert set(report.per_type) == {"ORG", "GPE"}
    assert math.isclose(report.macro_f1, (1.0 + 0.0) / 2)


@given(span_sets())
def test_f1_self_comparison_is_one(case):
    spans, _ = case
    if spans:
        assert entity_f1(spans, list(spans)).micro.f1 == 1.0
        assert entity_f1(spans, list(spans)).macro_f1 == 1.0


def test_standoff_export_round_trip():
    from greeknlp.ner import spans_to_standoff, standoff_to_spans

    spans = [EntitySpan(1, 3, 3, "LOC"), EntitySpan(0, 1, 2, "ORG")]
    text = spans_to_standoff(spans)
    assert text == "0\t1\t2\tORG\n1\t3\t3\tLOC\n"
    assert standoff_to_spans(text) == sorted(spans)

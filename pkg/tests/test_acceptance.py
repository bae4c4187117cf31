"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines alongside pytest's own pass/fail output.
"""

import math
import subprocess
import sys
import time
from itertools import product
from pathlib import Path

import numpy as np
import pytest

from greeknlp.conllu import read_conllu, write_conllu
from greeknlp.doc import ENTITY_TYPES, Doc, MorphFeatures, Token
from greeknlp.encoder import EncoderConfig, EncoderModel, SubwordVocab, zero_grads
from greeknlp.ner import (NER_TAGSET, EntitySpan, entity_f1, init_ner, ner_decode,
                          ner_loss_and_grads, repair_bioes, spans_to_tags,
                          tags_to_spans)
from greeknlp.parser import (ArcScores, ParserConfig, decode_greedy, decode_mst,
                             decode_rels, init_parser, is_arborescence,
                             parse_loss_and_grads, uas_las)
from greeknlp.tagger import (HEAD_NAMES, build_label_vocabs, init_tagger,
                             tag_decode, tag_loss_and_grads)
from greeknlp.training import HyperParams, micro_macro_f1, train_ner
from greeknlp.g2g import (brute_force_decode, build_lattice, g2g_decode,
                          synth_greeklish)
from greeknlp.container import container_bytes, parse_container
from greeknlp.pipeline import Pipeline, doc_to_json_str

ROOT = Path(__file__).resolve().parent.parent


def announce(number, text):
    print(f"\nACCEPTANCE {number} PASS: {text}")


# --- 1. MST oracle ---------------------------------------------------------------

def brute_force_best_score(S):
    n = S.shape[0]
    best = -np.inf
    for heads in product(range(n + 1), repeat=n):
        if any(heads[i] == i + 1 for i in range(n)):
            continue
        if not is_arborescence(list(heads)):
            continue
        best = max(best, sum(S[i, heads[i]] for i in range(n)))
    return best


def test_c1_mst_matches_brute_force_and_is_always_a_tree():
    start = time.time()
    rng = np.random.default_rng(20240501)
    for trial in range(500):
        n = int(rng.integers(1, 6))
        S = rng.normal(size=(n, n + 1))
        S[np.arange(n), np.arange(1, n + 1)] = -np.inf
        heads = decode_mst(ArcScores(S))
        assert is_arborescence(heads)
        got = sum(S[i, heads[i]] for i in range(n))
        assert math.isclose(got, brute_force_best_score(S), rel_tol=0, abs_tol=1e-9)
    for trial in range(1000):
        n = int(rng.integers(1, 9))
        S = rng.normal(size=(n, n + 1))
        S[np.arange(n), np.arange(1, n + 1)] = -np.inf
        assert is_arborescence(decode_mst(ArcScores(S)))
    elapsed = time.time() - start
    assert elapsed < 60.0, f"MST oracle took {elapsed:.1f}s"
    announce(1, f"decode_mst exact on 500 matrices (n<=5), tree-valid on 1000 "
                f"(n<=8) in {elapsed:.1f}s")


# --- 2. argmax decodes against linear scans ----------------------------------------

def scan_max(row):
    best, arg = -np.inf, None
    for idx, val in enumerate(row):
        if val > best:
            best, arg = val, idx
    return arg


def test_c2_argmax_decoders_match_linear_scan_oracles():
    rng = np.random.default_rng(7)

    for _ in range(1000):
        n = int(rng.integers(1, 7))
        S = rng.normal(size=(n, n + 1))
        S[np.arange(n), np.arange(1, n + 1)] = -np.inf
        assert decode_greedy(ArcScores(S)) == [scan_max(r) for r in S]

    words = ["η", "αθηνα", "ειναι"]
    vocab = SubwordVocab.build(words)
    enc = EncoderModel.init(vocab, EncoderConfig(dim=4, layers=0, seed=0))
    toks = [Token(1, "η", upos="DET", feats=MorphFeatures.of(Case="Nom")),
            Token(2, "αθηνα", upos="PROPN"), Token(3, "ειναι", upos="AUX")]
    tagger = init_tagger(enc, build_label_vocabs([toks]), seed=1)
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        logits = {h: rng.normal(size=(n, len(tagger.label_vocabs[h])))
                  for h in HEAD_NAMES}
        decoded = tag_decode(logits, tagger)
        for i, (upos, feats) in enumerate(decoded):
            assert upos == tagger.label_vocabs["UPOS"][scan_max(logits["UPOS"][i])]
            for cat in HEAD_NAMES[1:]:
                pick = tagger.label_vocabs[cat][scan_max(logits[cat][i])]
                assert feats.get(cat) == (None if pick == "<na>" else pick)

    for _ in range(1000):
        n = int(rng.integers(1, 8))
        logits = rng.normal(size=(n, len(NER_TAGSET)))
        raw = [NER_TAGSET[scan_max(row)] for row in logits]
        assert ner_decode(logits) == repair_bioes(raw)

    labels = ("det", "nsubj", "obj", "root")
    parser = init_parser(EncoderModel.init(vocab, EncoderConfig(dim=4, seed=1)),
                         labels, ParserConfig(proj_dim=4), seed=2)
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        sc = rng.normal(size=(n, len(labels)))
        assert decode_rels(sc, parser) == [labels[scan_max(r)] for r in sc]

    # documented tie-breaks: lowest index everywhere
    S = np.zeros((2, 3))
    S[0, 1] = -np.inf
    S[1, 2] = -np.inf
    assert decode_greedy(ArcScores(S)) == [0, 0]
    tie = np.zeros((1, len(NER_TAGSET)))
    tie[0, 5] = tie[0, 2] = 3.0
    raw_tags, _ = ner_decode(tie)
    assert raw_tags == repair_bioes([NER_TAGSET[2]])[0]
    sc = np.zeros((2, len(labels)))
    assert decode_rels(sc, parser) == ["det", "det"]
    zero_logits = {h: np.zeros((1, len(tagger.label_vocabs[h]))) for h in HEAD_NAMES}
    upos, feats = tag_decode(zero_logits, tagger)[0]
    assert upos == tagger.label_vocabs["UPOS"][0] and len(feats) == 0
    announce(2, "greedy/tagger/NER/relation argmax decodes equal linear scans on "
                "1000 random inputs each; lowest-index tie-breaks hold")


# --- 3. gradient checks --------------------------------------------------------------

GRAD_TOKENS = [
    Token(1, "αθηνα", upos="PROPN", feats=MorphFeatures.of(Case="Nom", Gender="Fem"),
          ner="S-GPE", head=3, deprel="nsubj"),
    Token(2, "ειναι", upos="AUX", feats=MorphFeatures.of(Person="3"),
          ner="O", head=3, deprel="cop"),
    Token(3, "πολη", upos="NOUN", feats=MorphFeatures.of(Case="Nom"),
          ner="O", head=0, deprel="root"),
]


def check_gradients(params, grads, loss_fn, h=1e-4):
    checked = 0
    for name, p in params.items():
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = p[ix]
            p[ix] = orig + h
            lp = loss_fn()
            p[ix] = orig - h
            lm = loss_fn()
            p[ix] = orig
            fd = (lp - lm) / (2 * h)
            assert np.isclose(fd, grads[name][ix], rtol=1e-3, atol=1e-8), \
                f"{name}[{ix}]: finite-diff {fd} vs analytic {grads[name][ix]}"
            checked += 1
    return checked


def test_c3_gradients_match_central_finite_differences():
    words = [t.form for t in GRAD_TOKENS]
    vocab = SubwordVocab.build(words)
    total = 0

    enc = EncoderModel.init(vocab, EncoderConfig(dim=8, layers=1, seed=1))
    tagger = init_tagger(enc, build_label_vocabs([GRAD_TOKENS]), seed=5)
    grads = zero_grads(tagger.params)
    tag_loss_and_grads(tagger, GRAD_TOKENS, grads)
    total += check_gradients(
        tagger.params, grads,
        lambda: tag_loss_and_grads(tagger, GRAD_TOKENS, zero_grads(tagger.params))[0])

    enc = EncoderModel.init(vocab, EncoderConfig(dim=8, layers=1, seed=2))
    ner = init_ner(enc, seed=6)
    grads = zero_grads(ner.params)
    ner_loss_and_grads(ner, GRAD_TOKENS, grads)
    total += check_gradients(
        ner.params, grads,
        lambda: ner_loss_and_grads(ner, GRAD_TOKENS, zero_grads(ner.params))[0])

    enc = EncoderModel.init(vocab, EncoderConfig(dim=8, layers=1, seed=3))
    parser = init_parser(enc, ("nsubj", "cop", "root"), ParserConfig(proj_dim=8), seed=7)
    grads = zero_grads(parser.params)
    parse_loss_and_grads(parser, GRAD_TOKENS, grads)
    total += check_gradients(
        parser.params, grads,
        lambda: parse_loss_and_grads(parser, GRAD_TOKENS, zero_grads(parser.params))[0])
    announce(3, f"tagger (17 heads), NER and full biaffine parser gradients match "
                f"finite differences on {total} coordinates (d=d'=8, n=3)")


# --- 4. toy overfit --------------------------------------------------------------------

def test_c4_toy_corpus_overfits_to_perfect_training_scores(build_record):
    hp = build_record["hyperparams"]
    assert hp["learning_rate"] == pytest.approx(3e-5 * 100)
    assert hp["dropout"] == 0.0
    assert hp["grad_accumulation_steps"] == 4
    assert hp["weight_decay"] == 0.2
    assert hp["epochs"] <= 200
    assert build_record["train_uas"] == 1.0
    assert build_record["train_upos_micro_f1"] == 1.0
    assert build_record["train_entity_micro_f1"] == 1.0
    assert build_record["train_seconds"] < 300.0
    announce(4, f"32-sentence toy corpus reaches train UAS / UPOS micro-F1 / entity "
                f"micro-F1 of 1.0 within 200 epochs in {build_record['train_seconds']:.0f}s")


# --- 5. metric oracles -------------------------------------------------------------------

def _doc(heads, rels):
    toks = tuple(Token(i + 1, f"w{i}", head=heads[i], deprel=rels[i])
                 for i in range(len(heads)))
    return Doc(" ".join(t.form for t in toks), (toks,))


def test_c5_metric_oracles_match_hand_computed_values():
    d = _doc([2, 0, 2, 3], ["a", "b", "c", "d"])
    assert uas_las(d, d) == (1.0, 1.0)
    pred = _doc([2, 0, 2, 2], ["a", "b", "c", "d"])
    assert uas_las(pred, d) == (0.75, 0.75)
    wrong = _doc([2, 0, 2, 3], ["x", "y", "z", "q"])
    assert uas_las(wrong, d) == (1.0, 0.0)

    assert micro_macro_f1(["a", "b"], ["a", "b"]) == (1.0, 1.0)
    micro, macro = micro_macro_f1(["0", "0", "0", "0"], ["0", "0", "1", "1"])
    assert micro == 0.5 and macro == (2 / 3 + 0.0) / 2
    m1, m2 = micro_macro_f1(["x"], ["x"])
    assert m1 == m2 == 1.0

    spans = [EntitySpan(0, 1, 2, "ORG")]
    assert entity_f1(spans, list(spans)).micro.f1 == 1.0
    empty = entity_f1([], spans)
    assert empty.micro.recall == 0.0 and empty.micro.f1 == 0.0
    gold = [EntitySpan(0, 1, 1, "ORG"), EntitySpan(0, 3, 4, "ORG"),
            EntitySpan(1, 1, 1, "ORG")]
    pred_spans = [EntitySpan(0, 1, 1, "ORG"), EntitySpan(0, 6, 6, "ORG")]
    prf = entity_f1(pred_spans, gold).per_type["ORG"]
    assert prf.precision == 0.5
    assert prf.recall == 1 / 3
    assert math.isclose(prf.f1, 0.4, rel_tol=1e-12)
    announce(5, "uas_las, micro_macro_f1 and entity_f1 reproduce every hand-computed "
                "worked example")


# --- 6. g2g worked example, gold containment, beam exactness ---------------------------------

GREEK_WORDS = ["αθηνα", "θεσσαλονικη", "και", "ειναι", "πολεις", "η", "το", "2020",
               "ουρανος", "ψωμι", "ξανθη", "ωκεανος", "θαλασσα", "χωρα"]


def lattice_contains(lattice, target):
    states = {(0, 0)}
    frontier = [(0, 0)]
    while frontier:
        node, matched = frontier.pop()
        for edge in lattice.outgoing.get(node, ()):
            if target.startswith(edge.greek, matched):
                state = (edge.end, matched + len(edge.greek))
                if state not in states:
                    states.add(state)
                    frontier.append(state)
    return (lattice.length, len(target)) in states


def test_c6_transliteration_example_containment_and_beam_exactness(g2g_fixture):
    table, lm, lm_weight, beam_width = g2g_fixture
    out = g2g_decode("h athina kai h thessaloniki einai poleis", table, lm,
                     beam_width=beam_width, lm_weight=lm_weight)
    assert out == "η αθηνα και η θεσσαλονικη ειναι πολεις"

    rng = np.random.default_rng(99)
    for seed in range(1000):
        words = [GREEK_WORDS[i] for i in rng.integers(0, len(GREEK_WORDS), size=rng.integers(1, 5))]
        greek = " ".join(words)
        greeklish = synth_greeklish(greek, table, seed=seed)
        assert lattice_contains(build_lattice(greeklish, table), greek), \
            (greek, greeklish)

    checked = 0
    alphabet = "ahiklnostu8 "
    for trial in range(300):
        n = int(rng.integers(1, 7))
        text = "".join(alphabet[i] for i in rng.integers(0, len(alphabet), size=n))
        lat = build_lattice(text, table)
        if lat.count_paths() > 200:
            continue
        checked += 1
        assert g2g_decode(text, table, lm, beam_width=None, lm_weight=lm_weight) == \
            brute_force_decode(text, table, lm, lm_weight=lm_weight)
    assert checked >= 100
    announce(6, f"worked transliteration example decodes exactly; gold-path containment holds "
                f"for 1000 seeded sentences; unbounded beam equals brute force on "
                f"{checked} lattices (<=200 paths)")


# --- 7. round trips ---------------------------------------------------------------------------

def random_doc(rng):
    forms = ["η", "αθηνα", "ειναι", "πολη", "και", "2020"]
    rels = ["det", "nsubj", "root", "obj"]
    cats = ["Case", "Gender", "Number", "Tense"]
    sentences = []
    for _ in range(int(rng.integers(1, 4))):
        n = int(rng.integers(1, 6))
        toks = []
        for i in range(1, n + 1):
            head = int(rng.integers(0, n + 1))
            if head == i:
                head = 0
            feats = {cats[int(k)]: "Val%d" % rng.integers(1, 3)
                     for k in rng.integers(0, len(cats), size=rng.integers(0, 3))}
            ner = None
            if rng.random() < 0.3:
                ner = f"S-{ENTITY_TYPES[int(rng.integers(0, 18))]}"
            toks.append(Token(i, forms[int(rng.integers(0, len(forms)))],
                              upos=("NOUN", "DET", "VERB")[int(rng.integers(0, 3))],
                              feats=MorphFeatures.of(feats) if feats else None,
                              ner=ner, head=head,
                              deprel=rels[int(rng.integers(0, len(rels)))]))
        sentences.append(tuple(toks))
    return Doc(" ".join(t.form for s in sentences for t in s), tuple(sentences))


def modeled(doc):
    return [[(t.form, t.upos, t.feats.as_dict() if t.feats else {}, t.ner, t.head,
              t.deprel) for t in s] for s in doc.sentences]


def test_c7_round_trips(models_dir):
    rng = np.random.default_rng(17)
    for _ in range(200):
        doc = random_doc(rng)
        back = read_conllu(write_conllu(doc))
        assert len(back) == 1 and modeled(back[0]) == modeled(doc)

    for _ in range(500):
        length = int(rng.integers(1, 12))
        spans, used = [], set()
        for _ in range(int(rng.integers(0, 4))):
            start = int(rng.integers(1, length + 1))
            end = min(start + int(rng.integers(0, 3)), length)
            if any(p in used for p in range(start, end + 1)):
                continue
            used.update(range(start, end + 1))
            spans.append(EntitySpan(0, start, end, ENTITY_TYPES[int(rng.integers(0, 18))]))
        spans.sort()
        tags = spans_to_tags(spans, length)
        assert sorted(tags_to_spans(tags)) == spans
        repaired, _ = repair_bioes(tags)
        assert repaired == tags

    for name in ("pos.grnlp", "ner.grnlp", "dp.grnlp", "g2g.grnlp"):
        blob = (models_dir / name).read_bytes()
        assert container_bytes(parse_container(blob)) == blob
    announce(7, "CoNLL-U modeled fields (200 random docs), BIOES spans<->tags "
                "(500 sets) and container bytes (4 model files) all round-trip")


# --- 8. service conformance -------------------------------------------------------------------

def test_c8_service_conformance_and_entry_point_parity(models_dir):
    import jsonschema
    from fastapi.testclient import TestClient
    from greeknlp.service import create_app

    client = TestClient(create_app(models_dir))
    openapi = client.get("/openapi.json").json()

    def validate(payload, schema_name="ProcessResponse"):
        jsonschema.validate(payload, {"$ref": f"#/components/schemas/{schema_name}",
                                      "components": openapi["components"]})

    calls = [
        ("h athina", ["g2g"]),
        ("h athina kai h thessaloniki einai poleis", ["g2g", "pos"]),
        ("Η Ιταλία κέρδισε την Αγγλία στον τελικό το 2020.", ["pos", "ner", "dp"]),
        ("τρεξε γρηγορα!", ["dp"]),
        ("ναι. οχι!", ["pos", "ner"]),
        ("", ["pos"]),
    ]
    for text, processors in calls:
        resp = client.post("/process", json={"text": text, "processors": processors})
        assert resp.status_code == 200, resp.text
        validate(resp.json())
    first = client.post("/process", json={"text": "h athina", "processors": ["g2g"]})
    assert first.json()["transliterated"] == "η αθηνα"

    resp = client.post("/process", json={"text": "ναι", "processors": ["bogus"]})
    assert resp.status_code == 400 and resp.json()["code"] == "invalid_processor"
    resp = client.post("/process", json={"processors": ["pos"]})
    assert resp.status_code == 422 and resp.json()["code"] == "invalid_body"
    resp = client.post("/process", json={"text": "α" * 70000, "processors": ["pos"]})
    assert resp.status_code == 413 and resp.json()["code"] == "payload_too_large"

    text = "Η Ιταλία κέρδισε την Αγγλία στον τελικό το 2020."
    lib_bytes = doc_to_json_str(Pipeline("pos,ner,dp", models_dir=models_dir)(text))
    api_bytes = client.post("/process",
                            json={"text": text, "processors": ["pos", "ner", "dp"]}).content
    cli = subprocess.run([sys.executable, "-m", "greeknlp", "annotate",
                          "--models", str(models_dir)],
                         input=text + "\n", capture_output=True, text=True, timeout=600)
    assert cli.returncode == 0, cli.stderr
    assert api_bytes == lib_bytes.encode("utf-8")
    assert cli.stdout == lib_bytes + "\n"
    announce(8, "all /process responses validate against /openapi.json; 400/413/422 "
                "errors fire; CLI, API and library outputs are byte-identical")


# --- 9. determinism ------------------------------------------------------------------------------

def test_c9_training_determinism_and_accumulation_equivalence(toy_sentences):
    subset = toy_sentences[:8]
    enc = EncoderConfig(dim=16, layers=1, seed=0)
    hp = HyperParams(learning_rate=1e-3, epochs=3, seed=13, batch_size=4,
                     weight_decay=0.2, patience=None)
    _, rep1 = train_ner(subset, subset, hp, enc)
    _, rep2 = train_ner(subset, subset, hp, enc)
    assert rep1.loss_curve() == rep2.loss_curve()

    from greeknlp.training import train_tagger
    base = dict(learning_rate=1e-3, dropout=0.0, weight_decay=0.1, epochs=1,
                seed=3, patience=None)
    m1, _ = train_tagger(subset, subset,
                         HyperParams(grad_accumulation_steps=2, batch_size=4, **base), enc)
    m2, _ = train_tagger(subset, subset,
                         HyperParams(grad_accumulation_steps=1, batch_size=8, **base), enc)
    for name in m1.params:
        np.testing.assert_allclose(m1.params[name], m2.params[name], rtol=0, atol=1e-6)
    announce(9, "identical (seed, data, hyperparameters) reproduce identical loss "
                "curves; k-microbatch accumulation equals the concatenated batch "
                "within 1e-6")

import numpy as np
import pytest

from greeknlp.charlm import train_charlm
from greeknlp.container import (ContainerError, ModelContainer, container_bytes,
                                load_container, pack_g2g, pack_ner, pack_parser,
                                pack_tagger, parse_container, save_container,
                                unpack_g2g, unpack_ner, unpack_parser, unpack_tagger)
from greeknlp.doc import MorphFeatures, Token
from greeknlp.encoder import EncoderConfig, EncoderModel, SubwordVocab
from greeknlp.g2g import MappingTable
from greeknlp.ner import init_ner, ner_logits
from greeknlp.parser import ParserConfig, init_parser, score_arcs
from greeknlp.tagger import build_label_vocabs, init_tagger, tag_logits

WORDS = ["η", "αθηνα", "ειναι", "πολη"]
TOKENS = [
    Token(1, "η", upos="DET", feats=MorphFeatures.of(Case="Nom")),
    Token(2, "αθηνα", upos="PROPN", feats=MorphFeatures.of(Gender="Fem")),
    Token(3, "ειναι", upos="AUX"),
    Token(4, "πολη", upos="NOUN"),
]


def fresh_encoder(seed=0):
    return EncoderModel.init(SubwordVocab.build(WORDS),
                             EncoderConfig(dim=6, layers=1, seed=seed))


def test_synthetic_container_round_trip(tmp_path):
    cont = ModelContainer(
        {"component": "pos", "format_version": 1, "note": "μικρό"},
        {"a": np.arange(6, dtype=np.float32).reshape(2, 3),
         "b": np.array([1.5], dtype=np.float32)})
    path = tmp_path / "m.grnlp"
    save_container(cont, path)
    loaded = load_container(path)
    assert loaded.manifest["note"] == "μικρό"
    np.testing.assert_array_equal(loaded.tensors["a"], cont.tensors["a"])


def test_save_load_save_byte_identity(tmp_path):
    cont = ModelContainer(
        {"component": "ner", "format_version": 1},
        {"w": np.random.default_rng(0).normal(size=(3, 4)).astype(np.float32)})
    blob1 = container_bytes(cont)
    blob2 = container_bytes(parse_container(blob1))
    assert blob1 == blob2


def test_checksum_corruption_detected(tmp_path):
    cont = ModelContainer({"component": "dp", "format_version": 1},
                          {"w": np.ones((2, 2), dtype=np.float32)})
    blob = bytearray(container_bytes(cont))
    blob[len(blob) // 2] ^= 0xFF
    with pytest.raises(ContainerError, match="checksum"):
        parse_container(bytes(blob))


def test_bad_magic_detected():
    cont = ModelContainer({"component": "dp", "format_version": 1}, {})
    blob = bytearray(container_bytes(cont))
    blob[0:6] = b"NOTME1"
    import hashlib

    body = bytes(blob[:-32])
    blob = body + hashlib.sha256(body).digest()
    with pytest.raises(ContainerError, match="magic"):
        parse_container(blob)


def test_version_mismatch_detected():
    cont = ModelContainer({"component": "dp", "format_version": 99}, {})
    with pytest.raises(ContainerError, match="version"):
        parse_container(container_bytes(cont))


def test_tagger_pack_unpack_preserves_behavior(tmp_path):
    model = init_tagger(fresh_encoder(), build_label_vocabs([TOKENS]), seed=1)
    path = tmp_path / "pos.grnlp"
    save_container(pack_tagger(model), path)
    clone = unpack_tagger(load_container(path))
    assert clone.label_vocabs == model.label_vocabs
    a = tag_logits(WORDS, model)
    b = tag_logits(WORDS, clone)
    for name in a:
        np.testing.assert_allclose(a[name], b[name], rtol=0, atol=1e-6)


def test_ner_pack_unpack(tmp_path):
    model = init_ner(fresh_encoder(seed=2), seed=3)
    path = tmp_path / "ner.grnlp"
    save_container(pack_ner(model), path)
    clone = unpack_ner(load_container(path))
    np.testing.assert_allclose(ner_logits(WORDS, model), ner_logits(WORDS, clone),
                               rtol=0, atol=1e-6)


def test_parser_pack_unpack(tmp_path):
    model = init_parser(fresh_encoder(seed=4), ("det", "root"), ParserConfig(proj_dim=5),
                        seed=5)
    path = tmp_path / "dp.grnlp"
    save_container(pack_parser(model), path)
    clone = unpack_parser(load_container(path))
    assert clone.labels == model.labels
    assert clone.config == model.config
    np.testing.assert_allclose(score_arcs(WORDS, model).scores,
                               score_arcs(WORDS, clone).scores, rtol=0, atol=1e-5)


def test_g2g_pack_unpack(tmp_path):
    lm = train_charlm(["η αθηνα", "η πολη"], order=3)
    table = MappingTable.default()
    path = tmp_path / "g2g.grnlp"
    save_container(pack_g2g(table, lm, lm_weight=1.5, beam_width=12), path)
    table2, lm2, w, b = unpack_g2g(load_container(path))
    assert (w, b) == (1.5, 12)
    assert table2.entries == table.entries
    assert lm2.prob("α", "η ") == lm.prob("α", "η ")


def test_model_files_round_trip_byte_identically(models_dir):
    for name in ("pos.grnlp", "ner.grnlp", "dp.grnlp", "g2g.grnlp"):
        blob = (models_dir / name).read_bytes()
        assert container_bytes(parse_container(blob)) == blob


def test_encoder_vocab_hash_checked(tmp_path):
    model = init_ner(fresh_encoder(seed=6), seed=7)
    cont = pack_ner(model)
    cont.manifest["encoder"]["vocab_pieces"].append("έξτρα")
    with pytest.raises(ContainerError, match="vocab hash"):
        unpack_ner(parse_container(container_bytes(cont)))

import json
import sys
from pathlib import Path

import pytest
from hypothesis import settings

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "scripts"))

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

import train_toy_models  # noqa: E402  (scripts dir on path)

TOY_CORPUS = ROOT / "tests" / "data" / "toy_corpus.conllu"


@pytest.fixture(scope="session")
def models_dir():
    """Toy model containers, built once per session (cached by fingerprint)."""
    out = ROOT / "models"
    train_toy_models.build(out)
    return out


@pytest.fixture(scope="session")
def build_record(models_dir):
    return json.loads((models_dir / "fingerprint.json").read_text())


@pytest.fixture(scope="session")
def toy_sentences():
    from greeknlp.conllu import read_conllu_file

    return [s for d in read_conllu_file(TOY_CORPUS) for s in d.sentences]


@pytest.fixture(scope="session")
def g2g_fixture(models_dir):
    from greeknlp.container import load_container, unpack_g2g

    return unpack_g2g(load_container(models_dir / "g2g.grnlp"))

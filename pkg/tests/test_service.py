import pytest
from fastapi.testclient import TestClient

import jsonschema

from greeknlp.pipeline import Pipeline, doc_to_json_str
from greeknlp.service import create_app


@pytest.fixture(scope="module")
def client(models_dir):
    return TestClient(create_app(models_dir))


@pytest.fixture(scope="module")
def openapi(client):
    resp = client.get("/openapi.json")
    assert resp.status_code == 200
    return resp.json()


def validate_against(openapi_doc, schema_name, payload):
    """Validate a payload against a schema served in /openapi.json."""
    schema = {"$ref": f"#/components/schemas/{schema_name}",
              "components": openapi_doc["components"]}
    jsonschema.validate(payload, schema)


def process(client, openapi_doc, text, processors, expect=200):
    resp = client.post("/process", json={"text": text, "processors": processors})
    assert resp.status_code == expect, resp.text
    if expect == 200:
        validate_against(openapi_doc, "ProcessResponse", resp.json())
    return resp


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert set(body["models"]) == {"dp", "g2g", "ner", "pos"}


def test_process_g2g_fragment(client, openapi):
    resp = process(client, openapi, "h athina", ["g2g"])
    body = resp.json()
    assert body["transliterated"] == "η αθηνα"
    assert [t["form"] for t in body["sentences"][0]["tokens"]] == ["η", "αθηνα"]


def test_process_full_pipeline_response_validates(client, openapi):
    resp = process(client, openapi, "Η Ιταλία κέρδισε την Αγγλία στον τελικό το 2020.",
                   ["pos", "ner", "dp"])
    tok = resp.json()["sentences"][0]["tokens"][1]
    assert tok["upos"] == "PROPN"
    assert tok["ner"] == "S-ORG"
    assert tok["deprel"] == "nsubj"


def test_missing_text_is_422_with_code(client):
    resp = client.post("/process", json={"processors": ["pos"]})
    assert resp.status_code == 422
    body = resp.json()
    assert body["code"] == "invalid_body"
    assert "message" in body


def test_invalid_processor_is_400_with_code(client):
    resp = client.post("/process", json={"text": "ναι", "processors": ["bogus"]})
    assert resp.status_code == 400
    body = resp.json()
    assert body["code"] == "invalid_processor"
    for name in ("g2g", "pos", "ner", "dp"):
        assert name in body["message"]


def test_duplicate_processor_is_400(client):
    resp = client.post("/process", json={"text": "ναι", "processors": ["pos", "pos"]})
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid_processor"


def test_oversize_text_is_413(client):
    resp = client.post("/process", json={"text": "α" * 40000, "processors": ["pos"]})
    assert resp.status_code == 413
    assert resp.json()["code"] == "payload_too_large"


def test_api_bytes_equal_library_bytes(client, models_dir):
    text = "η αθηνα ειναι ομορφη πολη."
    resp = client.post("/process", json={"text": text, "processors": ["pos", "ner", "dp"]})
    lib = doc_to_json_str(Pipeline("pos, ner, dp", models_dir=models_dir)(text))
    assert resp.content == lib.encode("utf-8")


def test_error_responses_validate_against_declared_schema(client, openapi):
    resp = client.post("/process", json={"text": "ναι", "processors": ["bogus"]})
    validate_against(openapi, "ErrorBody", resp.json())


def test_model_unavailable_when_dir_lacks_model(tmp_path):
    app = create_app(tmp_path)
    with TestClient(app) as c:
        resp = c.post("/process", json={"text": "ναι", "processors": ["pos"]})
        assert resp.status_code == 400
        assert resp.json()["code"] == "model_unavailable"

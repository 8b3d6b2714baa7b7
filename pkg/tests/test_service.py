from __future__ import annotations

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

import fgsent
from fgsent.config import TrainConfig
from fgsent.conll import tagged_to_conll
from fgsent.corpus import serialize_corpus
from fgsent.embeddings import HashedStaticProvider, write_embeddings
from fgsent.model_io import save_model
from fgsent.service import create_app
from fgsent.tagger import train_tagger
from fgsent.tagscheme import TagScheme, encode

from conftest import pivot_corpus

SCHEME = TagScheme("Target", "targeted")


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Corpora on disk plus a small trained extraction model."""
    root = tmp_path_factory.mktemp("svc")
    paths = {}
    for split, size, seed in (("train", 120, 1), ("dev", 30, 2), ("test", 30, 3)):
        p = root / f"{split}.json"
        p.write_text(serialize_corpus(pivot_corpus(seed, size, split=split)),
                     encoding="utf-8")
        paths[split] = p

    provider = HashedStaticProvider(dimension=32, seed=0, window=0)
    model = train_tagger(pivot_corpus(1, 120), SCHEME, "original", provider,
                         TrainConfig(epochs=3, seed=1),
                         dev=pivot_corpus(2, 30, split="dev"))
    model_path = root / "pivot.fgsm"
    save_model(model, model_path)

    # gold tags rendered as a CoNLL prediction file: a perfect prediction
    test = pivot_corpus(3, 30, split="test")
    blocks = [(s.sent_id, list(s.tokens), encode(s, SCHEME).labels()) for s in test]
    gold_conll = root / "gold_pred.conll"
    gold_conll.write_text(tagged_to_conll(blocks), encoding="utf-8")

    return {"root": root, "paths": paths, "model": model_path, "gold_conll": gold_conll}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


class TestHealth:
    def test_health_reports_version(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok", "version": fgsent.__version__}


class TestConvert:
    def test_canonical_identity(self, client, workspace, tmp_path):
        src = workspace["paths"]["train"]
        out = tmp_path / "copy.json"
        r = client.post("/convert", json={"input_path": str(src),
                                          "output_path": str(out)})
        assert r.status_code == 200
        body = r.json()
        assert body["written"] == str(out)
        assert body["sentences"] == 120
        assert body["warnings"] == []
        assert body["text"].startswith("adapter: canonical")
        assert out.read_bytes() == src.read_bytes()

    def test_unknown_adapter_is_400(self, client, workspace, tmp_path):
        r = client.post("/convert", json={"input_path": str(workspace["paths"]["train"]),
                                          "adapter": "nope",
                                          "output_path": str(tmp_path / "x.json")})
        assert r.status_code == 400
        assert "nope" in r.json()["detail"]

    def test_missing_input_is_404(self, client, tmp_path):
        r = client.post("/convert", json={"input_path": str(tmp_path / "absent.json"),
                                          "output_path": str(tmp_path / "x.json")})
        assert r.status_code == 404

    def test_missing_body_fields_is_422(self, client):
        r = client.post("/convert", json={})
        assert r.status_code == 422

    def test_unwriteable_output_is_500(self, client, workspace, tmp_path):
        # output path is an existing directory: an OSError nothing maps
        r = client.post("/convert", json={"input_path": str(workspace["paths"]["train"]),
                                          "output_path": str(tmp_path)})
        assert r.status_code == 500
        assert "detail" in r.json()


class TestStats:
    def test_single_split(self, client, workspace):
        r = client.post("/stats", json={"paths": {"test": str(workspace["paths"]["test"])}})
        assert r.status_code == 200
        body = r.json()
        assert body["stats"]["test"]["sentences"] == 30
        assert body["overlap"] is None
        assert "targ#" in body["text"]

    def test_three_splits_add_overlap(self, client, workspace):
        named = {k: str(v) for k, v in workspace["paths"].items()}
        r = client.post("/stats", json={"paths": named})
        assert r.status_code == 200
        body = r.json()
        assert set(body["stats"]) == {"train", "dev", "test"}
        assert set(body["overlap"]["overlap"]) == {"dev", "test"}

    def test_invalid_corpus_is_422(self, client, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"name": "x", "split": "train", "sentences": 3}',
                       encoding="utf-8")
        r = client.post("/stats", json={"paths": {"train": str(bad)}})
        assert r.status_code == 422

    def test_no_paths_is_400(self, client):
        r = client.post("/stats", json={"paths": {}})
        assert r.status_code == 400


class TestRun:
    def spec_dict(self, workspace, out_dir):
        return {
            "task": "extract",
            "data": {k: str(v) for k, v in workspace["paths"].items()},
            "schemes": [{"strategy": "Target"}],
            "modes": ["original"],
            "seeds": [1, 2],
            "config": {"epochs": 2},
            "provider": {"kind": "hashed-static", "dimension": 16, "seed": 0,
                         "window": 0},
            "output_dir": str(out_dir),
        }

    def test_inline_spec_runs_then_caches(self, client, workspace, tmp_path):
        spec = self.spec_dict(workspace, tmp_path / "out")
        r = client.post("/run", json={"spec": spec})
        assert r.status_code == 200
        body = r.json()
        assert (body["executed"], body["cached"]) == (2, 0)
        assert len(body["records"]) == 2
        assert "Target/targeted" in body["text"]

        again = client.post("/run", json={"spec": spec}).json()
        assert (again["executed"], again["cached"]) == (0, 2)
        assert again["records"] == body["records"]

    def test_spec_file_with_seed_override(self, client, workspace, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(self.spec_dict(workspace, tmp_path / "out")),
                             encoding="utf-8")
        r = client.post("/run", json={"spec_path": str(spec_path), "seeds": [7]})
        assert r.status_code == 200
        body = r.json()
        assert body["executed"] == 1
        assert body["records"][0]["seed"] == 7

    def test_spec_and_path_together_is_400(self, client, workspace, tmp_path):
        spec = self.spec_dict(workspace, tmp_path / "out")
        r = client.post("/run", json={"spec": spec, "spec_path": "x.json"})
        assert r.status_code == 400
        assert client.post("/run", json={}).status_code == 400

    def test_bad_spec_is_400(self, client, workspace, tmp_path):
        spec = self.spec_dict(workspace, tmp_path / "out")
        spec["seeds"] = [3, 3]
        assert client.post("/run", json={"spec": spec}).status_code == 400


class TestPredict:
    def test_conll_output(self, client, workspace, tmp_path):
        out = tmp_path / "pred.conll"
        r = client.post("/predict", json={"model_path": str(workspace["model"]),
                                          "corpus_path": str(workspace["paths"]["test"]),
                                          "output_path": str(out),
                                          "format": "conll"})
        assert r.status_code == 200
        body = r.json()
        assert body["task"] == "extract"
        assert body["sentences"] == 30
        assert out.read_text(encoding="utf-8").startswith("# sent_id =")

    def test_missing_model_is_404(self, client, workspace, tmp_path):
        r = client.post("/predict", json={"model_path": str(tmp_path / "no.fgsm"),
                                          "corpus_path": str(workspace["paths"]["test"]),
                                          "output_path": str(tmp_path / "p.json")})
        assert r.status_code == 404

    def test_dimension_mismatch_is_400(self, client, workspace, tmp_path):
        emb = tmp_path / "wrong.fgse"
        write_embeddings(emb, 8, [("anything", np.zeros((2, 8), dtype=np.float32),
                                   np.zeros(8, dtype=np.float32))])
        r = client.post("/predict", json={"model_path": str(workspace["model"]),
                                          "corpus_path": str(workspace["paths"]["test"]),
                                          "output_path": str(tmp_path / "p.json"),
                                          "embeddings": [str(emb)]})
        assert r.status_code == 400
        assert "32" in r.json()["detail"] and "8" in r.json()["detail"]

    def test_bad_format_is_400(self, client, workspace, tmp_path):
        r = client.post("/predict", json={"model_path": str(workspace["model"]),
                                          "corpus_path": str(workspace["paths"]["test"]),
                                          "output_path": str(tmp_path / "p.xml"),
                                          "format": "xml"})
        assert r.status_code == 400


class TestEval:
    def test_perfect_conll_predictions(self, client, workspace):
        r = client.post("/eval", json={"gold_path": str(workspace["paths"]["test"]),
                                       "pred_path": str(workspace["gold_conll"])})
        assert r.status_code == 200
        body = r.json()
        assert body["task"] == "extract"
        assert body["report"]["elements"]["targ"]["f1"] == 1.0

    def test_model_predictions_round_trip(self, client, workspace, tmp_path):
        out = tmp_path / "pred.conll"
        client.post("/predict", json={"model_path": str(workspace["model"]),
                                      "corpus_path": str(workspace["paths"]["test"]),
                                      "output_path": str(out), "format": "conll"})
        r = client.post("/eval", json={"gold_path": str(workspace["paths"]["test"]),
                                       "pred_path": str(out)})
        assert r.status_code == 200
        assert r.json()["report"]["elements"]["targ"]["f1"] >= 0.95

    def test_incomplete_predictions_are_422(self, client, workspace, tmp_path):
        truncated = tmp_path / "partial.conll"
        text = workspace["gold_conll"].read_text(encoding="utf-8")
        blocks = text.split("\n\n")
        truncated.write_text("\n\n".join(blocks[:5]) + "\n", encoding="utf-8")
        r = client.post("/eval", json={"gold_path": str(workspace["paths"]["test"]),
                                       "pred_path": str(truncated)})
        assert r.status_code == 422
        assert "missing" in r.json()["detail"]

    def test_missing_gold_is_404(self, client, workspace, tmp_path):
        r = client.post("/eval", json={"gold_path": str(tmp_path / "no.json"),
                                       "pred_path": str(workspace["gold_conll"])})
        assert r.status_code == 404

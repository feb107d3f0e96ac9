"""Smoke tests for the python bindings.

Exercises the exported surface end to end: normalization, the software
reference encoder, synthetic datasets, device-backed training and
classification, model save/load, and the built-in selftest.
"""

import json

import pytest

import rthdc

CFG = json.dumps({"dim": 4096, "seed": 11})


def test_normalize_render_round_trip():
    symbols = rthdc.normalize("Don't PANIC")
    assert rthdc.render(symbols) == "don t panic"
    assert rthdc.normalize("a1b!") == rthdc.normalize("A b ")


def test_reference_encode_is_deterministic():
    text = "the quick brown fox jumps over the lazy dog"
    a = rthdc.encode(text, seed=7, dim=1024)
    b = rthdc.encode(text, seed=7, dim=1024)
    assert a == b
    assert len(a) == 1024 // 8
    assert rthdc.hamming(a, b, dim=1024) == 0
    assert rthdc.encode(text, seed=8, dim=1024) != a


def test_synth_dataset_shape():
    ds = rthdc.synth_corpus(seed=11, languages=2, train_len=400, sentences=2, sentence_len=80)
    assert ds.labels == ["lang01", "lang02"]
    assert len(ds.train_text("lang01")) == 400
    assert len(ds.sentences("lang02")) == 2


@pytest.fixture(scope="module")
def trained():
    ds = rthdc.synth_corpus(seed=11, languages=5, train_len=800, sentences=2, sentence_len=120)
    pipe = rthdc.Pipeline(CFG)
    summary = pipe.train(ds)
    return ds, pipe, summary


def test_train_and_classify(trained):
    ds, pipe, summary = trained
    assert summary["classes"] == 5
    assert summary["report"]["total_nj"] > 0

    for label in ds.labels:
        res = pipe.classify(ds.sentences(label)[0])
        assert res["label"] == label
        assert set(res["distances"]) == set(ds.labels)
        assert res["report"]["cycles"] > 0
        assert res["report"]["total_nj"] > res["report"]["simcheck_nj"]


def test_device_encode_matches_reference(trained):
    _, pipe, _ = trained
    text = "abc abca bcab cabc ab"
    assert pipe.encode(text) == rthdc.encode(text, seed=11, dim=4096)


def test_save_load_round_trip(tmp_path, trained):
    ds, pipe, _ = trained
    model = tmp_path / "model.rhdm"
    pipe.save(model)
    assert model.exists() and model.with_suffix(".rhdm.layout.json").exists()

    loaded = rthdc.load_pipeline(model)
    assert loaded.labels == pipe.labels
    sentence = ds.sentences("lang02")[1]
    assert loaded.classify(sentence)["distances"] == pipe.classify(sentence)["distances"]


def test_dataset_files_round_trip(tmp_path):
    ds = rthdc.synth_corpus(seed=3, languages=2, train_len=300, sentences=2, sentence_len=60)
    rthdc.write_dataset(ds, tmp_path / "data")
    back = rthdc.load_dataset(tmp_path / "data")
    assert back.labels == ds.labels
    assert back.train_text("lang01") == ds.train_text("lang01")


def test_config_errors_map_to_value_error():
    with pytest.raises(ValueError):
        rthdc.Pipeline(json.dumps({"dim": 100}))
    with pytest.raises(ValueError):
        rthdc.Pipeline(json.dumps({"dmi": 2048}))


def test_short_text_is_rejected(trained):
    _, pipe, _ = trained
    with pytest.raises(ValueError):
        pipe.classify("ab")


def test_selftest_quick_passes():
    failures, output = rthdc.selftest(quick=True)
    assert failures == 0
    assert "ok" in output

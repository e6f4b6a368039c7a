from __future__ import annotations

import json

from eventsent.corpus.io import corpus_to_jsonl, save_jsonl
from eventsent.model import DecodeConfig
from eventsent.pipeline import extract_events, predict_corpus, predict_file

from util import make_doc, make_tiny_model

NO_EVENTS = DecodeConfig(trigger_threshold=0.999999)
SOME_EVENTS = DecodeConfig(trigger_threshold=0.4)


def _write_jsonl(path, docs):
    save_jsonl(docs, path)
    return path


def _read_lines(path):
    with open(path, "r", encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


def test_empty_input_produces_empty_output_and_zero_counts(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text("")
    out = tmp_path / "out.jsonl"
    summary = predict_file(make_tiny_model(), src, out)
    assert out.read_text() == ""
    assert summary.n_documents == 0
    assert summary.n_events == 0
    assert summary.n_errors == 0


def test_every_document_line_yields_exactly_one_output_line(tmp_path):
    docs = [
        make_doc(["alpha", "beta"], doc_id="doc-0"),
        make_doc(["gamma"], doc_id="doc-1"),
        make_doc(["delta", "alpha", "beta"], doc_id="doc-2"),
    ]
    src = _write_jsonl(tmp_path / "in.jsonl", docs)
    out = tmp_path / "out.jsonl"
    summary = predict_file(make_tiny_model(), src, out, NO_EVENTS)
    lines = _read_lines(out)
    assert [obj["doc_id"] for obj in lines] == ["doc-0", "doc-1", "doc-2"]
    assert summary.n_documents == 3
    assert summary.n_errors == 0
    for obj in lines:
        assert "truncated" in obj and obj["truncated"] is False


def test_blank_lines_are_skipped_without_output(tmp_path):
    docs = [make_doc(["alpha"], doc_id="doc-0"), make_doc(["beta"], doc_id="doc-1")]
    body = corpus_to_jsonl(docs)
    first, second = body.strip().split("\n")
    src = tmp_path / "in.jsonl"
    src.write_text(f"\n{first}\n\n\n{second}\n\n")
    out = tmp_path / "out.jsonl"
    summary = predict_file(make_tiny_model(), src, out, NO_EVENTS)
    lines = _read_lines(out)
    assert [obj["doc_id"] for obj in lines] == ["doc-0", "doc-1"]
    assert summary.n_documents == 2


def test_gold_events_in_the_input_are_discarded(tmp_path):
    doc = make_doc(
        ["alpha", "beta", "gamma"],
        events=[dict(trigger=(1, 1), polarity="P")],
        doc_id="doc-0",
    )
    src = _write_jsonl(tmp_path / "in.jsonl", [doc])
    out = tmp_path / "out.jsonl"
    summary = predict_file(make_tiny_model(), src, out, NO_EVENTS)
    (obj,) = _read_lines(out)
    assert obj.get("events", []) == []
    assert summary.n_events == 0


def test_invalid_lines_become_error_records_in_place(tmp_path):
    good = corpus_to_jsonl([make_doc(["alpha"], doc_id="doc-0")]).strip()
    src = tmp_path / "in.jsonl"
    src.write_text(f"{good}\n{{\"tokens\": 5}}\n{good}\n")
    out = tmp_path / "out.jsonl"
    summary = predict_file(make_tiny_model(), src, out, NO_EVENTS)
    lines = _read_lines(out)
    assert len(lines) == 3
    assert lines[0]["doc_id"] == "doc-0"
    assert lines[1]["line"] == 2 and "error" in lines[1]
    assert lines[2]["doc_id"] == "doc-0"
    assert summary.n_errors == 1
    assert summary.n_documents == 2
    assert summary.errors[0]["line"] == 2


def test_unparseable_json_is_an_error_record_too(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text("not json at all\n")
    out = tmp_path / "out.jsonl"
    summary = predict_file(make_tiny_model(), src, out, NO_EVENTS)
    (obj,) = _read_lines(out)
    assert obj["line"] == 1 and "error" in obj
    assert summary.n_errors == 1 and summary.n_documents == 0


def test_long_documents_are_truncated_and_flagged(tmp_path):
    doc = make_doc(["alpha"] * 100, doc_id="doc-long")
    src = _write_jsonl(tmp_path / "in.jsonl", [doc])
    out = tmp_path / "out.jsonl"
    model = make_tiny_model()  # max_seq_len 64
    summary = predict_file(model, src, out, NO_EVENTS)
    (obj,) = _read_lines(out)
    assert obj["truncated"] is True
    assert len(obj["tokens"]) == 62
    assert summary.n_documents == 1


def test_predicted_events_are_counted_and_serialized(tmp_path):
    docs = [make_doc(["alpha", "beta", "gamma", "delta"], doc_id="doc-0")]
    src = _write_jsonl(tmp_path / "in.jsonl", docs)
    out = tmp_path / "out.jsonl"
    summary = predict_file(make_tiny_model(seed=7), src, out, SOME_EVENTS)
    (obj,) = _read_lines(out)
    assert summary.n_events == len(obj.get("events", []))
    for event in obj.get("events", []):
        assert event["polarity"] in ("P", "N", "O")
        trig = event["trigger"]
        assert 0 <= trig["start"] <= trig["end"] < len(obj["tokens"])


def test_predict_corpus_keeps_document_order():
    model = make_tiny_model(seed=7)
    docs = [
        make_doc(["alpha", "beta"], doc_id="doc-0"),
        make_doc(["gamma", "delta", "alpha"], doc_id="doc-1"),
    ]
    per_doc = predict_corpus(model, docs, NO_EVENTS)
    assert per_doc == [[], []]
    per_doc = predict_corpus(model, docs, SOME_EVENTS)
    assert len(per_doc) == 2


def test_extract_events_convenience_matches_the_model_path():
    model = make_tiny_model(seed=7)
    doc = make_doc(["alpha", "beta", "gamma"])
    direct = model.extract_events(
        model.make_preprocessor().prepare(doc, with_labels=False), SOME_EVENTS
    )
    convenient = extract_events(model, doc, SOME_EVENTS)
    assert [(e.trigger.start, e.trigger.end, e.polarity) for e in direct] == [
        (e.trigger.start, e.trigger.end, e.polarity) for e in convenient
    ]

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trueorigin.classifier import (
    MAX_REMOTE_CHARS, EvidenceLabel, HeuristicClassifier, Label, OracleClassifier,
    PartialBatchError, RemoteClassifier, classify, classify_batch, cue_balance,
    normalize_text, preprocess_tweet,
)
from trueorigin.remote import PluginError

from conftest import FIXTURES, TWEETS50

GOLDEN = json.loads((FIXTURES / "preprocess_golden.json").read_text(encoding="utf-8"))

# the three worked examples: first and third carry origin evidence, the second does not
EXAMPLES = {}
for _rec in map(json.loads, TWEETS50.read_text(encoding="utf-8").splitlines()):
    EXAMPLES[_rec["id"]] = _rec["text"]
EXAMPLE_1, EXAMPLE_2, EXAMPLE_3 = EXAMPLES["d07"], EXAMPLES["c01"], EXAMPLES["d08"]

tweet_text = st.lists(st.sampled_from(
    list("ab @#&;:/.x1 \t\n") + ["&amp;", "&lt;", "http://", "www.", "\U0001F600",
                                 "❤", "️", "‍", "\U0001F3FD", "\U0001F1E6",
                                 "&#64;", "@bob", "EMOJI"]), max_size=40).map("".join)


# ---- preprocessing -----------------------------------------------------------------

@pytest.mark.parametrize("case", GOLDEN, ids=[str(i) for i in range(len(GOLDEN))])
def test_golden_preprocessing(case):
    assert preprocess_tweet(case["input"]).normalized == case["expected"]


def test_preprocess_keeps_original_and_id():
    p = preprocess_tweet("A &amp; B", tweet_id="t1")
    assert (p.original, p.normalized, p.tweet_id) == ("A &amp; B", "A & B", "t1")


@settings(max_examples=300)
@given(tweet_text)
def test_normalize_is_idempotent_on_structured_text(text):
    once = normalize_text(text)
    assert normalize_text(once) == once


@settings(max_examples=300)
@given(st.text(max_size=60))
def test_normalize_is_idempotent_on_any_text(text):
    once = normalize_text(text)
    assert normalize_text(once) == once


@given(st.text(max_size=60))
def test_normalized_whitespace_is_collapsed(text):
    out = normalize_text(text)
    assert out == out.strip() and "  " not in out and "\n" not in out


# ---- labels ------------------------------------------------------------------------------

def test_from_scores_argmax_and_threshold():
    assert EvidenceLabel.from_scores(0.7, 0.3).label is Label.TRUE_ORIGIN
    assert EvidenceLabel.from_scores(0.3, 0.7).label is Label.LOW_EVIDENCE
    assert EvidenceLabel.from_scores(0.5, 0.5).label is Label.LOW_EVIDENCE
    assert EvidenceLabel.from_scores(0.3, 0.7, threshold=0.25).label is Label.TRUE_ORIGIN
    with pytest.raises(ValueError):
        EvidenceLabel.from_scores(0, 0)
    with pytest.raises(ValueError):
        EvidenceLabel(Label.TRUE_ORIGIN, 1.5)


def test_label_codes():
    assert int(Label.TRUE_ORIGIN) == 0 and int(Label.LOW_EVIDENCE) == 1
    assert EvidenceLabel(Label.LOW_EVIDENCE, 0.9).to_dict() == {
        "label": 1, "name": "low_evidence", "score": 0.9}


# ---- heuristic ---------------------------------------------------------------------------

def test_heuristic_worked_examples():
    h = HeuristicClassifier()
    assert classify(h, preprocess_tweet(EXAMPLE_1)).label is Label.TRUE_ORIGIN
    assert classify(h, preprocess_tweet(EXAMPLE_2)).label is Label.LOW_EVIDENCE
    assert classify(h, preprocess_tweet(EXAMPLE_3)).label is Label.TRUE_ORIGIN


def test_heuristic_batch_of_examples():
    batch = [preprocess_tweet(t) for t in (EXAMPLE_1, EXAMPLE_2, EXAMPLE_3)]
    assert [l.label for l in classify_batch(HeuristicClassifier(), batch)] == [
        Label.TRUE_ORIGIN, Label.LOW_EVIDENCE, Label.TRUE_ORIGIN]


@pytest.mark.parametrize("text,label", [
    ("I'm at Central Park with the dog", Label.TRUE_ORIGIN),
    ("Sunny afternoon here in Melbourne", Label.TRUE_ORIGIN),
    ("#throwback to Sydney", Label.LOW_EVIDENCE),
    ("Pre-Covid we visited Miami", Label.LOW_EVIDENCE),
    ("Melbourne", Label.LOW_EVIDENCE),
])
def test_heuristic_cues(text, label):
    assert HeuristicClassifier().classify_one(normalize_text(text)).label is label


def test_heuristic_no_cues_is_low_evidence():
    assert cue_balance("Melbourne") == 0
    out = HeuristicClassifier().classify_one("Melbourne")
    assert out.label is Label.LOW_EVIDENCE and 0.5 < out.score < 1


def test_heuristic_threshold():
    assert HeuristicClassifier(threshold=0.3).classify_one("Melbourne").label is Label.TRUE_ORIGIN


# ---- oracle ---------------------------------------------------------------------------------

def test_oracle_replays_fixture_labels(records50):
    oracle = OracleClassifier.from_jsonl(TWEETS50)
    rec = next(r for r in records50 if r["label"] == 1)
    assert classify(oracle, preprocess_tweet(rec["text"], rec["id"])).label is Label.LOW_EVIDENCE
    # falls back to the original text when the id is unknown
    assert classify(oracle, preprocess_tweet(EXAMPLE_1)).label is Label.TRUE_ORIGIN


def test_oracle_missing_label_fails():
    with pytest.raises(PluginError):
        classify(OracleClassifier({"a": 0}), preprocess_tweet("unknown", "b"))


# ---- batching ---------------------------------------------------------------------------------

def test_empty_batch():
    assert classify_batch(HeuristicClassifier(), []) == []


@given(st.lists(st.sampled_from([EXAMPLE_1, EXAMPLE_2, EXAMPLE_3, "Melbourne", "here now"]),
                max_size=30), st.integers(1, 7))
def test_batch_equals_per_item(texts, size):
    h = HeuristicClassifier()
    tweets = [preprocess_tweet(t) for t in texts]
    assert classify_batch(h, tweets, size) == [classify(h, t) for t in tweets]


class _Picky:
    """Fails any chunk that contains a poisoned tweet."""
    name = "picky"

    def __init__(self):
        self.calls = []

    def classify_many(self, tweets):
        self.calls.append(len(tweets))
        if any("poison" in t.normalized for t in tweets):
            raise PluginError("bad input")
        return [EvidenceLabel(Label.TRUE_ORIGIN, 1.0) for _ in tweets]


def test_batch_partial_failure_isolated():
    plugin = _Picky()
    tweets = [preprocess_tweet(t) for t in ("a", "b", "poison", "c", "d")]
    with pytest.raises(PartialBatchError) as info:
        classify_batch(plugin, tweets, batch_size=4)
    err = info.value
    assert list(err.errors) == [2]
    assert [l is None for l in err.labels] == [False, False, True, False, False]
    assert plugin.calls == [4, 1, 1, 1, 1, 1]


# ---- remote ----------------------------------------------------------------------------------

def test_remote_classifier_scores_and_truncation(stub_server):
    def handler(path, payload):
        texts = payload["texts"]
        return 200, {"labels": [0 if "here" in t else 1 for t in texts],
                     "scores": [[0.9, 0.1] if "here" in t else [0.2, 0.8] for t in texts]}

    with stub_server(handler) as srv:
        rc = RemoteClassifier(srv.url, batch_size=2)
        long = "here " + "x" * 400
        out = classify_batch(rc, [preprocess_tweet(t) for t in ("here", "away", long)])
        assert [l.label for l in out] == [Label.TRUE_ORIGIN, Label.LOW_EVIDENCE, Label.TRUE_ORIGIN]
        assert out[0].score == pytest.approx(0.9)
        assert [len(p["texts"]) for _, p in srv.requests] == [2, 1]
        assert len(srv.requests[1][1]["texts"][0]) == MAX_REMOTE_CHARS


def test_remote_classifier_labels_only(stub_server):
    with stub_server(lambda p, b: (200, {"labels": [1]})) as srv:
        assert classify(RemoteClassifier(srv.url), preprocess_tweet("x")).label is Label.LOW_EVIDENCE


@pytest.mark.parametrize("status,body", [
    (503, {"error": "down"}),
    (200, {"labels": [0, 1]}),
    (200, {"labels": [0], "scores": [["a", "b"]]}),
    (200, {"nothing": True}),
])
def test_remote_classifier_failures(stub_server, status, body):
    with stub_server(lambda p, b: (status, body)) as srv:
        with pytest.raises(PluginError):
            classify(RemoteClassifier(srv.url), preprocess_tweet("x"))

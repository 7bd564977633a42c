"""Tweet normalization and the origin-evidence classifier seam.

Three plugins share one interface: a client for a remote model server, a
keyword heuristic that stands in when no model is available, and an oracle
that replays known labels.
"""

from __future__ import annotations

import html
import json
import math
import re
from dataclasses import dataclass
from enum import IntEnum
from typing import Mapping, Protocol, Sequence

from .remote import PluginError, RemoteClient

MAX_REMOTE_CHARS = 280

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"(?<!\w)@\w+")

_EMOJI_BASE = (
    "\U0001F000-\U0001F1E5\U0001F200-\U0001F3FA\U0001F400-\U0001FAFF"
    "\u2600-\u27BF\u2300-\u23FF\u2B00-\u2BFF"
    "\u3030\u303D\u3297\u3299\u00A9\u00AE\u203C\u2049\u2122\u2139\u24C2"
)
_EMOJI_MOD = "\uFE0E\uFE0F\u20E3\U0001F3FB-\U0001F3FF\U000E0020-\U000E007F"
_EMOJI_RE = re.compile(
    "[\U0001F1E6-\U0001F1FF]{2}"
    f"|[{_EMOJI_BASE}][{_EMOJI_MOD}]*(?:\u200D[{_EMOJI_BASE}][{_EMOJI_MOD}]*)*"
)
# modifiers and joiners left over once the emoji they decorated are gone
_EMOJI_STRAY_RE = re.compile(f"[{_EMOJI_MOD}\u200D\U0001F1E6-\U0001F1FF]")


class Label(IntEnum):
    TRUE_ORIGIN = 0
    LOW_EVIDENCE = 1


@dataclass(frozen=True)
class PreprocessedTweet:
    original: str
    normalized: str
    tweet_id: object = None


@dataclass(frozen=True)
class EvidenceLabel:
    label: Label
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")

    @classmethod
    def from_scores(cls, p_true: float, p_low: float, threshold: float | None = None) -> EvidenceLabel:
        """Label by argmax (ties go to low evidence) or, if ``threshold`` is
        given, by ``p_true >= threshold``."""
        total = p_true + p_low
        if total <= 0:
            raise ValueError("class scores must not both be zero")
        p_true, p_low = p_true / total, p_low / total
        if threshold is None:
            is_true = p_true > p_low
        else:
            is_true = p_true >= threshold
        return cls(Label.TRUE_ORIGIN if is_true else Label.LOW_EVIDENCE,
                   p_true if is_true else p_low)

    @property
    def is_true_origin(self) -> bool:
        return self.label is Label.TRUE_ORIGIN

    def to_dict(self) -> dict:
        return {"label": int(self.label), "name": self.label.name.lower(), "score": self.score}


def _unescape_fully(text: str) -> str:
    # "&amp;amp;" needs two passes; each changing pass shortens the string
    while True:
        decoded = html.unescape(text)
        if decoded == text:
            return text
        text = decoded


def normalize_text(text: str) -> str:
    text = _unescape_fully(text)
    text = _URL_RE.sub("HTTPURL", text)
    text = _MENTION_RE.sub("@USER", text)
    text = _EMOJI_RE.sub(" EMOJI ", text)
    text = _EMOJI_STRAY_RE.sub(" ", text)
    return " ".join(text.split())


def preprocess_tweet(text: str, tweet_id=None) -> PreprocessedTweet:
    """Decode HTML entities, then replace URLs, user mentions and emoji with
    ``HTTPURL``, ``@USER`` and ``EMOJI``, then collapse whitespace."""
    return PreprocessedTweet(text, normalize_text(text), tweet_id)


class Classifier(Protocol):
    name: str

    def classify_many(self, tweets: Sequence[PreprocessedTweet]) -> list[EvidenceLabel]: ...


# (pattern, weight). Positive weights point at the author being at the place now.
ORIGIN_CUES = (
    (r"\bhere\b", 1.0),
    (r"\b(?:this|tonight'?s?) (?:morning|afternoon|evening)\b", 1.0),
    (r"\btonight\b", 0.5),
    (r"\btoday\b", 0.5),
    (r"\bright now\b", 1.0),
    (r"\b(?:i'?m|i am|we'?re|we are) (?:at|in)\b", 1.5),
    (r"\(at\b", 1.0),
    (r"\b(?:our|my) (?:\w+ )?(?:city|town|neighbou?rhood|hometown)\b", 1.0),
    (r"\b(?:run|walk|hike|ride|jog)(?:ning|ing)? (?:along|around|through|in)\b", 1.0),
    (r"\b(?:i|we) (?:drove|walked|went) to\b", 1.0),
    (r"\bsupport(?:ing)? local\b", 0.5),
    (r"\blocal (?:businesses|shops|restaurants)\b", 0.5),
)
AGAINST_CUES = (
    (r"#?throwback\b|#tbt\b", 2.0),
    (r"\bpre-?covid\b", 2.0),
    (r"\b(?:travel(?:l)?ed|flew|went) (?:to|back to)\b", 1.5),
    (r"\b(?:last|next) (?:year|month|week|summer|winter)\b", 1.0),
    (r"\b(?:years?|months?|weeks?) ago\b", 1.0),
    (r"\bat the (?:beginning|start|end) of\b", 0.5),
    (r"\bwould have\b", 1.0),
    (r"\bremember when\b", 1.0),
    (r"\b(?:breaking|update|report|reports|officials|confirmed cases)\b", 1.0),
    (r"\b(?:stop|pray for|thoughts with)\b", 0.5),
)
_ORIGIN = [(re.compile(p, re.IGNORECASE), w) for p, w in ORIGIN_CUES]
_AGAINST = [(re.compile(p, re.IGNORECASE), w) for p, w in AGAINST_CUES]
_HEADLINE_RE = re.compile(r"^[^.!?]{10,120}: .*HTTPURL\s*$")


def cue_balance(text: str) -> float:
    positive = sum(w for rx, w in _ORIGIN if rx.search(text))
    negative = sum(w for rx, w in _AGAINST if rx.search(text))
    if _HEADLINE_RE.search(text):
        negative += 1.0
    return positive - negative


class HeuristicClassifier:
    """Keyword stand-in for a trained contextualizer.

    Present-tense deixis and first-person presence cues push towards true
    origin; retrospection, travel narratives and headline shape push away.
    A net balance of zero (no cues, or cancelling cues) is low evidence.
    Quality is nowhere near a fine-tuned model.
    """

    name = "heuristic"
    thread_safe = True

    def __init__(self, threshold: float | None = None, bias: float = 0.5):
        self.threshold = threshold
        self.bias = bias

    def classify_one(self, normalized: str) -> EvidenceLabel:
        p_true = 1.0 / (1.0 + math.exp(-(cue_balance(normalized) - self.bias)))
        return EvidenceLabel.from_scores(p_true, 1.0 - p_true, self.threshold)

    def classify_many(self, tweets):
        return [self.classify_one(t.normalized) for t in tweets]


class OracleClassifier:
    """Replays known labels, looked up by tweet id and then by original text."""

    name = "oracle"
    thread_safe = True

    def __init__(self, by_id: Mapping | None = None, by_text: Mapping[str, int] | None = None):
        self.by_id = dict(by_id or {})
        self.by_text = dict(by_text or {})

    @classmethod
    def from_jsonl(cls, path, label_key: str = "label") -> OracleClassifier:
        by_id, by_text = {}, {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                if rec.get(label_key) is None:
                    continue
                if "id" in rec:
                    by_id[rec["id"]] = int(rec[label_key])
                if "text" in rec:
                    by_text[rec["text"]] = int(rec[label_key])
        return cls(by_id, by_text)

    def classify_many(self, tweets):
        out = []
        for t in tweets:
            if t.tweet_id is not None and t.tweet_id in self.by_id:
                label = self.by_id[t.tweet_id]
            elif t.original in self.by_text:
                label = self.by_text[t.original]
            else:
                raise PluginError(f"oracle has no label for tweet {t.tweet_id!r}")
            out.append(EvidenceLabel(Label(label), 1.0))
        return out


class RemoteClassifier:
    """Client for a model server exposing ``POST /classify``."""

    name = "remote"
    thread_safe = True

    def __init__(self, base_url: str, timeout: float = 30.0, max_inflight: int = 2,
                 batch_size: int = 32, threshold: float | None = None):
        self.client = RemoteClient(base_url, timeout, max_inflight)
        self.batch_size = batch_size
        self.threshold = threshold

    def classify_many(self, tweets):
        texts = [t.normalized[:MAX_REMOTE_CHARS] for t in tweets]
        body = self.client.post("/classify", {"texts": texts})
        labels, scores = body.get("labels"), body.get("scores")
        if not isinstance(labels, list) or len(labels) != len(texts):
            raise PluginError("/classify: 'labels' must have one entry per text")
        out = []
        for i, label in enumerate(labels):
            try:
                if scores is not None:
                    p0, p1 = (float(x) for x in scores[i])
                    result = EvidenceLabel.from_scores(p0, p1, self.threshold)
                else:
                    result = EvidenceLabel(Label(int(label)), 1.0)
            except (TypeError, ValueError, IndexError) as exc:
                raise PluginError(f"/classify: malformed entry {i}: {exc}") from exc
            out.append(result)
        return out


def classify(plugin: Classifier, tweet: PreprocessedTweet) -> EvidenceLabel:
    return plugin.classify_many([tweet])[0]


class PartialBatchError(PluginError):
    """Some items of a batch failed. ``labels`` holds None at failed indices;
    ``errors`` maps those indices to the exception raised."""

    def __init__(self, labels, errors):
        super().__init__(f"{len(errors)} of {len(labels)} tweets could not be classified")
        self.labels = labels
        self.errors = errors


def classify_batch(plugin: Classifier, tweets: Sequence[PreprocessedTweet],
                   batch_size: int | None = None) -> list[EvidenceLabel]:
    """Order-preserving map of :func:`classify` in chunks of ``batch_size``.

    A failing chunk is retried item by item so that one bad tweet does not
    sink its neighbours; remaining failures raise :class:`PartialBatchError`.
    """
    tweets = list(tweets)
    size = batch_size or getattr(plugin, "batch_size", 32)
    labels: list[EvidenceLabel | None] = [None] * len(tweets)
    errors = {}
    for lo in range(0, len(tweets), size):
        chunk = tweets[lo:lo + size]
        try:
            labels[lo:lo + len(chunk)] = plugin.classify_many(chunk)
            continue
        except PluginError:
            pass
        for j, tweet in enumerate(chunk, lo):
            try:
                labels[j] = classify(plugin, tweet)
            except PluginError as exc:
                errors[j] = exc
    if errors:
        raise PartialBatchError(labels, errors)
    return labels

"""Ground-truth scoring, inter-annotator agreement and corpus distributions."""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .classifier import EvidenceLabel
from .gazetteer import GeoIndex, NoCoverageError
from .locvec import (CountryDict, LocationVector, normalize_vector, slots_match,
                     vector_from_feature)
from .pipeline import Disposition, GeotagResult, Tweet

# Reporting order, coarse to fine.
REPORT_LEVELS = ("country", "state", "city", "county", "district")


class NotGeotaggedError(ValueError):
    """The tweet carries no coordinates to derive a ground truth from."""


def ground_truth_vector(index: GeoIndex, tweet: Tweet,
                        countries: CountryDict | None = None) -> LocationVector:
    if tweet.coordinates is None:
        raise NotGeotaggedError(f"tweet {tweet.id!r} is not geotagged")
    lon, lat = tweet.coordinates
    return normalize_vector(vector_from_feature(index.reverse(lon, lat)), countries)


def ground_truths(index: GeoIndex, tweets: Iterable[Tweet],
                  countries: CountryDict | None = None) -> dict:
    """Truth vectors for every tweet that has coordinates and index coverage."""
    out = {}
    for tweet in tweets:
        try:
            vector = ground_truth_vector(index, tweet, countries)
        except (NotGeotaggedError, NoCoverageError):
            continue
        if not vector.is_null():
            out[tweet.id] = vector
    return out


@dataclass
class LevelAccuracy:
    correct: dict = field(default_factory=lambda: dict.fromkeys(REPORT_LEVELS, 0))
    incorrect: dict = field(default_factory=lambda: dict.fromkeys(REPORT_LEVELS, 0))

    def evaluable(self, level: str) -> int:
        return self.correct[level] + self.incorrect[level]

    def accuracy(self, level: str) -> float | None:
        n = self.evaluable(level)
        return self.correct[level] / n if n else None

    def records(self) -> list[dict]:
        return [{"level": lvl, "correct": self.correct[lvl], "incorrect": self.incorrect[lvl],
                 "accuracy": self.accuracy(lvl)} for lvl in REPORT_LEVELS]

    def format(self) -> str:
        def pct(x):
            return "n/a" if x is None else f"{100 * x:.1f}%"
        header = ["", *(lvl.capitalize() for lvl in REPORT_LEVELS)]
        rows = [
            header,
            ["Correct", *(f"{self.correct[l]:,}" for l in REPORT_LEVELS)],
            ["Incorrect", *(f"{self.incorrect[l]:,}" for l in REPORT_LEVELS)],
            ["Accuracy", *(pct(self.accuracy(l)) for l in REPORT_LEVELS)],
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        return "\n".join("  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                                   for i, (c, w) in enumerate(zip(r, widths)))
                         for r in rows)


def evaluate(results: Iterable[GeotagResult], truths: Mapping,
             countries: CountryDict | None = None) -> LevelAccuracy:
    """Score conclusive vectors against ground truth, level by level.

    Only geotagged results are scored. A level is evaluable for a tweet when
    its truth slot is set; a missing conclusive slot there counts incorrect.
    """
    acc = LevelAccuracy()
    for result in results:
        if result.disposition is not Disposition.GEOTAGGED:
            continue
        if result.tweet_id not in truths:
            raise KeyError(f"no ground truth for tweet {result.tweet_id!r}")
        truth = truths[result.tweet_id]
        for level in REPORT_LEVELS:
            expected = getattr(truth, level)
            if expected is None:
                continue
            got = getattr(result.conclusive, level)
            if slots_match(got, expected, countries, level):
                acc.correct[level] += 1
            else:
                acc.incorrect[level] += 1
    return acc


def cohen_kappa(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    """Cohen's kappa for two annotators' label sequences."""
    if len(a) != len(b):
        raise ValueError(f"label lists differ in length ({len(a)} vs {len(b)})")
    if not a:
        raise ValueError("need at least one label pair")
    n = len(a)
    p_o = sum(x == y for x, y in zip(a, b)) / n
    ca, cb = Counter(a), Counter(b)
    p_e = sum(ca[k] * cb.get(k, 0) for k in ca) / (n * n)
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


DIMENSIONS = ("overall", "possibly_sensitive", "media", "user_verified", "followers_band",
              "friends_band", "created_year", "country", "source")

DEFAULT_BAND_EDGES = (0, 50, 100, 200, 300, 400, 500, 1_000, 2_000, 5_000, 10_000, 20_000,
                      50_000, 100_000, 200_000, 500_000, 1_000_000, 5_000_000)


def _short(n: int) -> str:
    for div, suffix in ((1_000_000, "M"), (1_000, "k")):
        if n >= div and n % div == 0:
            return f"{n // div}{suffix}"
    return str(n)


def band_labels(edges: Sequence[int] = DEFAULT_BAND_EDGES) -> list[str]:
    labels = [f"{_short(lo)}-{_short(hi)}" for lo, hi in zip(edges, edges[1:])]
    return labels + [f"{_short(edges[-1])}+"]


def band_of(value: int | None, edges: Sequence[int] = DEFAULT_BAND_EDGES) -> str:
    """Half-open band ``[lo, hi)`` containing ``value``; the last band is open."""
    if value is None:
        return "unknown"
    if value < edges[0]:
        return f"<{_short(edges[0])}"
    labels = band_labels(edges)
    for i in range(len(edges) - 1, -1, -1):
        if value >= edges[i]:
            return labels[i]
    raise AssertionError("unreachable")


@dataclass
class Bucket:
    true_origin: int = 0
    low_evidence: int = 0

    @property
    def total(self) -> int:
        return self.true_origin + self.low_evidence

    @property
    def proportion_true(self) -> float:
        return self.true_origin / self.total if self.total else 0.0


@dataclass
class DistributionReport:
    dimension: str
    buckets: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(b.total for b in self.buckets.values())

    def share(self, bucket: str) -> float:
        return self.buckets[bucket].total / self.total if self.total else 0.0

    def records(self) -> list[dict]:
        return [{"dimension": self.dimension, "bucket": key, "true_origin": b.true_origin,
                 "low_evidence": b.low_evidence, "total": b.total,
                 "proportion_true": b.proportion_true, "share": self.share(key)}
                for key, b in self.buckets.items()]

    def format(self) -> str:
        header = ("bucket", "true origin", "low evidence", "total", "% true", "share")
        rows = [header] + [
            (r["bucket"], f"{r['true_origin']:,}", f"{r['low_evidence']:,}", f"{r['total']:,}",
             f"{100 * r['proportion_true']:.1f}%", f"{100 * r['share']:.2f}%")
            for r in self.records()]
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                           for i, (c, w) in enumerate(zip(r, widths))) for r in rows]
        return f"[{self.dimension}]\n" + "\n".join(lines)


def _flag(value) -> str:
    return "unknown" if value is None else str(bool(value)).lower()


def _bucket_key(tweet: Tweet, dimension: str, edges, index) -> str:
    if dimension == "overall":
        return "all"
    if dimension == "possibly_sensitive":
        return _flag(tweet.possibly_sensitive)
    if dimension == "media":
        return _flag(tweet.has_media)
    if dimension == "user_verified":
        return _flag(tweet.user_verified)
    if dimension == "followers_band":
        return band_of(tweet.user_followers, edges)
    if dimension == "friends_band":
        return band_of(tweet.user_friends, edges)
    if dimension == "created_year":
        return "unknown" if tweet.user_created_year is None else str(tweet.user_created_year)
    if dimension == "country":
        if tweet.country:
            return tweet.country
        if index is not None and tweet.coordinates is not None and len(index):
            return index.reverse(*tweet.coordinates).properties["country"]
        return "unknown"
    if dimension == "source":
        return tweet.source or "unknown"
    raise ValueError(f"unknown dimension {dimension!r}; expected one of {DIMENSIONS}")


def distributions(classified: Iterable[tuple[Tweet, EvidenceLabel]], dimension: str,
                  band_edges: Sequence[int] = DEFAULT_BAND_EDGES,
                  index: GeoIndex | None = None) -> DistributionReport:
    """Break classified tweets into buckets along one tweet attribute.

    Band dimensions keep the configured band order; other dimensions are
    sorted by bucket size, largest first. ``index`` lets the country
    dimension fall back to reverse geocoding the tweet's coordinates.
    """
    if dimension not in DIMENSIONS:
        raise ValueError(f"unknown dimension {dimension!r}; expected one of {DIMENSIONS}")
    buckets: dict[str, Bucket] = {}
    for tweet, label in classified:
        key = _bucket_key(tweet, dimension, band_edges, index)
        bucket = buckets.setdefault(key, Bucket())
        if label.is_true_origin:
            bucket.true_origin += 1
        else:
            bucket.low_evidence += 1
    if dimension in ("followers_band", "friends_band"):
        order = {lbl: i for i, lbl in enumerate(
            [f"<{_short(band_edges[0])}", *band_labels(band_edges), "unknown"])}
        keys = sorted(buckets, key=order.__getitem__)
    elif dimension == "created_year":
        keys = sorted(buckets, key=lambda k: (k == "unknown", k))
    else:
        keys = sorted(buckets, key=lambda k: (-buckets[k].total, k))
    return DistributionReport(dimension, {k: buckets[k] for k in keys})


def write_records_jsonl(records: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def write_records_csv(records: Sequence[dict], path) -> None:
    records = list(records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if not records:
            return
        writer = csv.DictWriter(fh, fieldnames=list(records[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)

"""End-to-end geotagging: extract, filter, validate, classify, geocode, vote."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, Iterable, Iterator, Protocol

from .classifier import Classifier, EvidenceLabel, classify, preprocess_tweet
from .gazetteer import GeoFeature, GeoIndex
from .lem import (GENERIC_REGIONS, ExtractedLocation, Extractor,
                  check_location_validity, filter_mentions)
from .locvec import CountryDict, LocationVector, conclusive_vector, vector_from_feature
from .remote import PluginError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tweet:
    id: Any
    text: str
    coordinates: tuple[float, float] | None = None
    source: str | None = None
    possibly_sensitive: bool | None = None
    has_media: bool | None = None
    user_verified: bool | None = None
    user_followers: int | None = None
    user_friends: int | None = None
    user_created_year: int | None = None
    country: str | None = None

    def __post_init__(self):
        if not isinstance(self.text, str) or not self.text.strip():
            raise ValueError(f"tweet {self.id!r}: empty text")
        if self.coordinates is not None:
            lon, lat = self.coordinates
            if not (math.isfinite(lon) and math.isfinite(lat)
                    and -180 <= lon <= 180 and -90 <= lat <= 90):
                raise ValueError(f"tweet {self.id!r}: coordinates out of range")
            object.__setattr__(self, "coordinates", (float(lon), float(lat)))

    @classmethod
    def from_dict(cls, data: dict) -> Tweet:
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in data.items() if k in known}
        coords = kwargs.get("coordinates")
        if isinstance(coords, dict):
            # tweet-payload style {"type": "Point", "coordinates": [lon, lat]}
            coords = coords.get("coordinates")
        if coords is not None:
            kwargs["coordinates"] = tuple(coords)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        if self.coordinates is not None:
            out["coordinates"] = list(self.coordinates)
        return out


def read_corpus(path) -> Iterator[Tweet]:
    """Stream tweets from a JSON-lines file; bad lines are logged and skipped."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield Tweet.from_dict(json.loads(line))
            except (ValueError, TypeError) as exc:
                logger.warning("%s:%d: skipped tweet: %s", path, lineno, exc)


class Disposition(str, Enum):
    NO_MENTIONS = "no_mentions"
    NO_VALID_MENTIONS = "no_valid_mentions"
    LOW_EVIDENCE = "low_evidence"
    NULL_VECTORS = "null_vectors"
    GEOTAGGED = "geotagged"
    FAILED = "failed"


class Geocoder(Protocol):
    def search(self, query: str, limit: int = 10) -> list[GeoFeature]: ...


@dataclass
class PipelineDeps:
    index: GeoIndex
    extractor: Extractor
    classifier: Classifier
    countries: CountryDict | None = None
    generic: frozenset = GENERIC_REGIONS
    # used for vector lookups only; validity checks always go to ``index``
    geocoder: Geocoder | None = None

    def __post_init__(self):
        if self.geocoder is None:
            self.geocoder = self.index


@dataclass
class GeotagResult:
    tweet_id: Any
    disposition: Disposition
    mentions: list[ExtractedLocation] = field(default_factory=list)
    label: EvidenceLabel | None = None
    vectors: list[LocationVector] = field(default_factory=list)
    conclusive: LocationVector | None = None
    # set when any extracted mention (before filtering) geocodes
    raw_valid: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "tweet_id": self.tweet_id,
            "disposition": self.disposition.value,
            "mentions": [m.to_dict() for m in self.mentions],
            "label": self.label.to_dict() if self.label else None,
            "vectors": [v.to_dict() for v in self.vectors],
            "conclusive": self.conclusive.to_dict() if self.conclusive else None,
            "error": self.error,
        }


def geotag_tweet(deps: PipelineDeps, tweet: Tweet) -> GeotagResult:
    """Run one tweet through the gates in order.

    No mentions stops before classification; low evidence stops before any
    vector lookup. Plugin failures propagate as :class:`PluginError`.
    """
    raw = deps.extractor.extract(tweet.text)
    if not raw:
        return GeotagResult(tweet.id, Disposition.NO_MENTIONS)

    validity: dict[str, bool] = {}
    for m in raw:
        if m.surface not in validity:
            validity[m.surface] = check_location_validity(deps.index, m.surface)
    raw_valid = any(validity.values())
    mentions = [replace(m, valid=validity[m.surface])
                for m in filter_mentions(raw, deps.generic)]
    valid = [m for m in mentions if m.valid]
    if not valid:
        return GeotagResult(tweet.id, Disposition.NO_VALID_MENTIONS, mentions,
                            raw_valid=raw_valid)

    label = classify(deps.classifier, preprocess_tweet(tweet.text, tweet.id))
    if not label.is_true_origin:
        return GeotagResult(tweet.id, Disposition.LOW_EVIDENCE, mentions, label,
                            raw_valid=raw_valid)

    vectors = []
    for m in valid:
        features = deps.geocoder.search(m.surface, 1)
        if features:
            vectors.append(vector_from_feature(features[0]))
    if not vectors:
        return GeotagResult(tweet.id, Disposition.NULL_VECTORS, mentions, label,
                            raw_valid=raw_valid)
    conclusive = conclusive_vector(vectors, deps.countries)
    if conclusive.is_null():
        return GeotagResult(tweet.id, Disposition.NULL_VECTORS, mentions, label, vectors,
                            raw_valid=raw_valid)
    return GeotagResult(tweet.id, Disposition.GEOTAGGED, mentions, label, vectors,
                        conclusive, raw_valid=raw_valid)


@dataclass
class FunnelSummary:
    """Per-disposition counts plus the cumulative funnel rows.

    ``with_valid_location`` counts tweets with any geocodable mention before
    generic-name filtering; ``after_preprocessing`` counts those still holding
    one afterwards.
    """

    total: int = 0
    with_mentions: int = 0
    with_valid_location: int = 0
    after_preprocessing: int = 0
    true_origin: int = 0
    low_evidence: int = 0
    available: int = 0
    failed: int = 0
    by_disposition: dict = field(
        default_factory=lambda: {d.value: 0 for d in Disposition})

    def add(self, result: GeotagResult) -> None:
        d = result.disposition
        self.total += 1
        self.by_disposition[d.value] += 1
        if d is Disposition.FAILED:
            self.failed += 1
            return
        self.with_mentions += d is not Disposition.NO_MENTIONS
        self.with_valid_location += result.raw_valid
        if d in (Disposition.LOW_EVIDENCE, Disposition.NULL_VECTORS, Disposition.GEOTAGGED):
            self.after_preprocessing += 1
            if d is Disposition.LOW_EVIDENCE:
                self.low_evidence += 1
            else:
                self.true_origin += 1
        self.available += d is Disposition.GEOTAGGED

    def rows(self) -> list[tuple[str, int]]:
        return [
            ("Total tweets", self.total),
            ("Tweets with at least one valid location", self.with_valid_location),
            ("Tweets after pre-processing", self.after_preprocessing),
            ("Classified true origin", self.true_origin),
            ("Classified low evidence", self.low_evidence),
            ("Available tweets for evaluation", self.available),
            ("Failed tweets", self.failed),
        ]

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "total", "with_mentions", "with_valid_location", "after_preprocessing",
            "true_origin", "low_evidence", "available", "failed")}
        out["by_disposition"] = dict(self.by_disposition)
        return out

    def format(self) -> str:
        rows = self.rows()
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name.ljust(width)}  {count:>8,}" for name, count in rows)


def geotag_corpus(deps: PipelineDeps, corpus: Iterable[Tweet],
                  summary: FunnelSummary | None = None) -> Iterator[GeotagResult]:
    """Lazily geotag a tweet stream, in order.

    Pass a :class:`FunnelSummary` to have it updated as results are yielded.
    A tweet whose plugins fail comes back with disposition ``failed``.
    """
    for tweet in corpus:
        try:
            result = geotag_tweet(deps, tweet)
        except PluginError as exc:
            logger.warning("tweet %r failed: %s", tweet.id, exc)
            result = GeotagResult(tweet.id, Disposition.FAILED, error=str(exc))
        if summary is not None:
            summary.add(result)
        yield result


def run_corpus(deps: PipelineDeps, corpus: Iterable[Tweet]) -> tuple[list[GeotagResult], FunnelSummary]:
    summary = FunnelSummary()
    results = list(geotag_corpus(deps, corpus, summary))
    return results, summary

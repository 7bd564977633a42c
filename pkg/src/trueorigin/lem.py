"""Location mention extraction: plugins, validity checks, filtering, and the
side-by-side comparison harness for extractor candidates."""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Protocol, Sequence

from .gazetteer import GeoIndex, iter_tokens
from .remote import PluginError, RemoteClient

logger = logging.getLogger(__name__)

GENERIC_REGIONS = frozenset({
    "city", "earth", "europe", "asia", "americas", "africa",
    "world", "town", "county", "district",
})

# Gaps allowed inside a multi-word mention: spaces, a hyphen, or "St. Kilda"-style periods.
_JOINER_RE = re.compile(r"\s+|-|\.\s*")
_STRIP_CHARS = " \t\r\n#@.,;:!?\"'’()[]{}<>|*~_-…"
_NUMERIC_RE = re.compile(r"[\d\s.,]+")


@dataclass(frozen=True)
class ExtractedLocation:
    surface: str
    start: int
    end: int
    valid: bool | None = None

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    @classmethod
    def at(cls, text: str, start: int, end: int) -> ExtractedLocation:
        if not 0 <= start < end <= len(text):
            raise ValueError(f"span ({start}, {end}) outside text of length {len(text)}")
        return cls(text[start:end], start, end)

    def to_dict(self) -> dict:
        return {"surface": self.surface, "start": self.start, "end": self.end,
                "valid": self.valid}


class Extractor(Protocol):
    name: str
    thread_safe: bool

    def extract(self, text: str) -> list[ExtractedLocation]: ...


class GazetteerExtractor:
    """Baseline extractor: greedy longest match of gazetteer names and
    aliases over word n-grams, left to right."""

    thread_safe = True

    def __init__(self, index: GeoIndex, max_ngram: int = 4, name: str = "gazetteer"):
        if max_ngram < 1:
            raise ValueError("max_ngram must be >= 1")
        self.index = index
        self.max_ngram = max_ngram
        self.name = name

    def extract(self, text: str) -> list[ExtractedLocation]:
        tokens = list(iter_tokens(text))
        found = []
        i = 0
        while i < len(tokens):
            # longest run of tokens starting at i that may form one phrase
            run = 1
            while (run < self.max_ngram and i + run < len(tokens)
                   and _JOINER_RE.fullmatch(text[tokens[i + run - 1][2]:tokens[i + run][1]])):
                run += 1
            for n in range(run, 0, -1):
                key = " ".join(tok for tok, _, _ in tokens[i:i + n])
                if self.index.has_phrase(key):
                    found.append(ExtractedLocation.at(text, tokens[i][1], tokens[i + n - 1][2]))
                    i += n
                    break
            else:
                i += 1
        return found


class StaticExtractor:
    """Replays precomputed mentions (e.g. exported NER output) keyed by text.

    Each surface is located at its next occurrence after the previous one.
    """

    thread_safe = True

    def __init__(self, mentions: Mapping[str, Sequence[str]], name: str = "static"):
        self.mentions = dict(mentions)
        self.name = name

    def extract(self, text: str) -> list[ExtractedLocation]:
        out = []
        cursor = 0
        for surface in self.mentions.get(text, ()):
            start = text.find(surface, cursor)
            if start < 0:
                start = text.find(surface)
            if start < 0:
                raise PluginError(f"{self.name}: mention {surface!r} not in text")
            out.append(ExtractedLocation.at(text, start, start + len(surface)))
            cursor = start + len(surface)
        return out


class RemoteExtractor:
    """Client for an NER service exposing ``POST /extract``."""

    thread_safe = True

    def __init__(self, base_url: str, timeout: float = 10.0, max_inflight: int = 4,
                 name: str = "remote"):
        self.client = RemoteClient(base_url, timeout, max_inflight)
        self.name = name

    def extract(self, text: str) -> list[ExtractedLocation]:
        return self.extract_many([text])[0]

    def extract_many(self, texts: Sequence[str]) -> list[list[ExtractedLocation]]:
        body = self.client.post("/extract", {"texts": list(texts)})
        entities = body.get("entities")
        if not isinstance(entities, list) or len(entities) != len(texts):
            raise PluginError("/extract: 'entities' must be one list per input text")
        out = []
        for text, ents in zip(texts, entities):
            try:
                spans = [ExtractedLocation.at(text, int(e["start"]), int(e["end"])) for e in ents]
            except (KeyError, TypeError, ValueError) as exc:
                raise PluginError(f"/extract: malformed entity: {exc}") from exc
            for span, ent in zip(spans, ents):
                if "surface" in ent and ent["surface"] != span.surface:
                    raise PluginError(
                        f"/extract: surface {ent['surface']!r} does not match text slice {span.surface!r}")
            out.append(spans)
        return out


def extract_locations(extractor: Extractor, text: str) -> list[ExtractedLocation]:
    if not text:
        raise ValueError("text must be non-empty")
    return extractor.extract(text)


def check_location_validity(index: GeoIndex, surface: str) -> bool:
    """A mention is valid when forward geocoding returns at least one feature."""
    return bool(index.search(surface, 1))


def clean_surface(surface: str) -> str:
    return surface.strip(_STRIP_CHARS)


def is_generic(surface: str, generic: Iterable[str] = GENERIC_REGIONS) -> bool:
    cleaned = clean_surface(surface)
    return (len(cleaned) < 2
            or bool(_NUMERIC_RE.fullmatch(cleaned))
            or cleaned.casefold() in {g.casefold() for g in generic})


def filter_mentions(mentions: Sequence[ExtractedLocation],
                    generic: Iterable[str] = GENERIC_REGIONS) -> list[ExtractedLocation]:
    """Drop short, purely numeric, and generic-region mentions; order kept."""
    generic = frozenset(g.casefold() for g in generic)
    return [m for m in mentions if not is_generic(m.surface, generic)]


def expand_and_check_validity(index: GeoIndex, mentions: Sequence[ExtractedLocation],
                              generic: Iterable[str] = GENERIC_REGIONS) -> list[ExtractedLocation]:
    """Filter mentions, then stamp each survivor with its validity."""
    return [replace(m, valid=check_location_validity(index, m.surface))
            for m in filter_mentions(mentions, generic)]


@dataclass
class LemStats:
    idloc: int = 0
    tloc: int = 0
    vloc: int = 0
    tvloc: int = 0
    failed_tweets: int = 0
    failures: list = field(default_factory=list)

    @property
    def invalid_locations(self) -> int:
        return self.idloc - self.vloc

    @property
    def invalid_tweets(self) -> int:
        return self.tloc - self.tvloc

    def check(self) -> None:
        if not (0 <= self.vloc <= self.idloc and 0 <= self.tvloc <= self.tloc):
            raise AssertionError(f"inconsistent LEM counts: {self}")
        if self.tloc > self.idloc or self.tvloc > self.vloc:
            raise AssertionError(f"inconsistent LEM counts: {self}")

    def as_row(self) -> dict:
        return {"idloc": self.idloc, "tloc": self.tloc, "vloc": self.vloc,
                "tvloc": self.tvloc, "invalid_locations": self.invalid_locations,
                "invalid_tweets": self.invalid_tweets, "failed_tweets": self.failed_tweets}


def _tweet_text(tweet) -> str:
    return tweet if isinstance(tweet, str) else tweet.text


def _tweet_id(tweet, i: int):
    return i if isinstance(tweet, str) else tweet.id


def compare_lem_candidates(extractors: Sequence[Extractor], corpus: Sequence,
                           index: GeoIndex, max_workers: int = 1) -> dict[str, LemStats]:
    """Count identified and valid mentions per extractor over ``corpus``.

    Mentions are counted per occurrence. A tweet whose extraction fails is
    recorded in ``failures`` and left out of every count.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    report = {}
    validity: dict[str, bool] = {}

    def is_valid(surface):
        if surface not in validity:
            validity[surface] = check_location_validity(index, surface)
        return validity[surface]

    for extractor in extractors:
        stats = LemStats()

        def run(item):
            i, tweet = item
            try:
                return i, extractor.extract(_tweet_text(tweet)), None
            except PluginError as exc:
                return i, None, exc

        items = list(enumerate(corpus))
        if max_workers > 1 and getattr(extractor, "thread_safe", False):
            with ThreadPoolExecutor(max_workers) as pool:
                outcomes = list(pool.map(run, items))
        else:
            outcomes = [run(item) for item in items]

        for i, mentions, error in outcomes:
            if error is not None:
                stats.failed_tweets += 1
                stats.failures.append((_tweet_id(corpus[i], i), str(error)))
                continue
            n_valid = sum(is_valid(m.surface) for m in mentions)
            stats.idloc += len(mentions)
            stats.vloc += n_valid
            stats.tloc += bool(mentions)
            stats.tvloc += bool(n_valid)
        stats.check()
        report[extractor.name] = stats
    return report


def format_lem_report(report: Mapping[str, LemStats]) -> str:
    header = ("model", "#idloc", "#tloc", "#vloc", "#tvloc",
              "invalid locations", "invalid tweets", "failed")
    rows = [(name, s.idloc, s.tloc, s.vloc, s.tvloc, s.invalid_locations,
             s.invalid_tweets, s.failed_tweets) for name, s in report.items()]
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(str(v).ljust(w) if i == 0 else str(v).rjust(w)
                       for i, (v, w) in enumerate(zip(r, widths)))
             for r in [header, *rows]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)

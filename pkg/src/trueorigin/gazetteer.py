"""In-memory forward and reverse geocoding over a point gazetteer.

Entries are ingested from JSON-lines files. Forward lookups go through a
token inverted index, reverse lookups through a KD-tree over unit-sphere
coordinates, re-ranked by exact haversine distance.
"""

from __future__ import annotations

import json
import logging
import math
import re
import struct
import zlib
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from heapq import nsmallest
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)

EARTH_RADIUS_M = 6_371_000.0

KINDS = ("district", "city", "county", "state", "country", "street", "poi")

ENTRY_KEYS = (
    "id", "name", "alt_names", "lon", "lat", "kind", "street", "district",
    "city", "county", "state", "country", "countrycode", "postcode",
)
_REQUIRED_KEYS = ("id", "name", "lon", "lat", "kind", "country", "countrycode")

# Payload key order is part of the wire contract (golden tests depend on it).
PROPERTY_KEYS = (
    "country", "city", "countrycode", "postcode", "type", "street",
    "district", "name", "state",
)

# Administrative slots a coarse place must leave unset.
_UNSET_FOR_KIND = {
    "country": ("street", "district", "city", "county", "state"),
    "state": ("street", "district", "city", "county"),
}

SNAPSHOT_MAGIC = b"TOMG"
SNAPSHOT_VERSION = 1

_TOKEN_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")
_COUNTRYCODE_RE = re.compile(r"[A-Z]{2}")


class GazetteerError(ValueError):
    """Raised for malformed gazetteer records or inconsistent indexes."""


class NoCoverageError(LookupError):
    """Raised when a reverse lookup has nothing to resolve against."""


def normalize_token(raw: str) -> str:
    return raw.lower().replace("'", "").replace("’", "")


def iter_tokens(text: str):
    """Yield ``(normalized_token, start, end)`` for every word in ``text``.

    Punctuation (including ``#`` and ``@``) separates tokens and is never
    part of one, so ``#NewYork`` yields ``newyork``.
    """
    for m in _TOKEN_RE.finditer(text):
        yield normalize_token(m.group()), m.start(), m.end()


def tokenize(text: str) -> list[str]:
    return [tok for tok, _, _ in iter_tokens(text)]


def phrase_key(text: str) -> str:
    return " ".join(tokenize(text))


def haversine_m(lon1, lat1, lon2, lat2):
    """Great-circle distance in metres; broadcasts over numpy arrays."""
    lon1, lat1, lon2, lat2 = map(np.radians, (lon1, lat1, lon2, lat2))
    a = (np.sin((lat2 - lat1) / 2.0) ** 2
         + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2.0) ** 2)
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.minimum(a, 1.0)))


def _unit_xyz(lons, lats) -> np.ndarray:
    lon = np.radians(np.asarray(lons, dtype=float))
    lat = np.radians(np.asarray(lats, dtype=float))
    return np.column_stack((np.cos(lat) * np.cos(lon),
                            np.cos(lat) * np.sin(lon),
                            np.sin(lat)))


def id_sort_key(entry_id) -> tuple:
    # ints sort numerically and ahead of strings; mixed id types stay totally ordered
    if isinstance(entry_id, int) and not isinstance(entry_id, bool):
        return (0, entry_id, "")
    return (1, 0, str(entry_id))


@dataclass(frozen=True)
class GazetteerEntry:
    id: Any
    name: str
    lon: float
    lat: float
    kind: str
    country: str
    countrycode: str
    alt_names: tuple[str, ...] = ()
    street: str | None = None
    district: str | None = None
    city: str | None = None
    county: str | None = None
    state: str | None = None
    postcode: str | None = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.strip():
            raise GazetteerError(f"entry {self.id!r}: empty name")
        if self.kind not in KINDS:
            raise GazetteerError(f"entry {self.id!r}: unknown kind {self.kind!r}")
        for label, value, bound in (("lon", self.lon, 180.0), ("lat", self.lat, 90.0)):
            if (isinstance(value, bool) or not isinstance(value, (int, float))
                    or not math.isfinite(value) or abs(value) > bound):
                raise GazetteerError(f"entry {self.id!r}: {label}={value!r} out of range")
        if not isinstance(self.countrycode, str) or not _COUNTRYCODE_RE.fullmatch(self.countrycode):
            raise GazetteerError(f"entry {self.id!r}: bad countrycode {self.countrycode!r}")
        if not isinstance(self.country, str) or not self.country.strip():
            raise GazetteerError(f"entry {self.id!r}: empty country")
        for slot in _UNSET_FOR_KIND.get(self.kind, ()):
            if getattr(self, slot):
                raise GazetteerError(
                    f"entry {self.id!r}: kind={self.kind} must not set {slot}")
        object.__setattr__(self, "alt_names", tuple(self.alt_names))

    def to_record(self) -> dict:
        record = asdict(self)
        record["alt_names"] = list(self.alt_names)
        return {key: record[key] for key in ENTRY_KEYS}


def entry_from_record(record: dict) -> GazetteerEntry:
    """Validate one decoded gazetteer line and build its entry.

    A place of administrative kind whose own slot is blank gets its name
    there (a city entry without ``city`` is its own city).
    """
    if not isinstance(record, dict):
        raise GazetteerError("record is not a JSON object")
    unknown = set(record) - set(ENTRY_KEYS)
    if unknown:
        raise GazetteerError(f"unknown keys {sorted(unknown)}")
    missing = [k for k in _REQUIRED_KEYS if record.get(k) is None]
    if missing:
        raise GazetteerError(f"missing required keys {missing}")
    if isinstance(record["id"], (dict, list, float, bool)):
        raise GazetteerError(f"id must be an int or string, got {record['id']!r}")
    fields = {k: record.get(k) for k in ENTRY_KEYS}
    alt = fields.pop("alt_names") or []
    if not isinstance(alt, list) or not all(isinstance(a, str) for a in alt):
        raise GazetteerError("alt_names must be a list of strings")
    for key in ("street", "district", "city", "county", "state", "postcode"):
        value = fields[key]
        if value is not None and not isinstance(value, str):
            value = str(value)
        fields[key] = value.strip() or None if value is not None else None
    kind = fields["kind"]
    if kind in ("district", "city", "county", "state") and not fields[kind]:
        fields[kind] = fields["name"].strip() if isinstance(fields["name"], str) else None
    return GazetteerEntry(alt_names=tuple(a for a in alt if a.strip()), **fields)


def load_gazetteer(path, errors: list | None = None) -> list[GazetteerEntry]:
    """Read a JSON-lines gazetteer.

    Malformed lines are skipped and logged; pass a list as ``errors`` to
    collect ``(line_number, message)`` pairs. An unreadable file raises.
    """
    entries = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                entries.append(entry_from_record(json.loads(line)))
            except (json.JSONDecodeError, GazetteerError, TypeError) as exc:
                skipped += 1
                logger.warning("%s:%d: skipped gazetteer line: %s", path, lineno, exc)
                if errors is not None:
                    errors.append((lineno, str(exc)))
    if skipped:
        logger.info("%s: loaded %d entries, skipped %d", path, len(entries), skipped)
    return entries


def write_gazetteer(entries: Iterable[GazetteerEntry], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry.to_record(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class GeoFeature:
    """One geocoding hit in the search/reverse payload shape.

    ``properties`` always holds exactly the keys in ``PROPERTY_KEYS``; unset
    values are empty strings. ``county`` and ``id`` ride alongside the
    payload because the location vector needs a county slot.
    """

    lon: float
    lat: float
    properties: dict = field(hash=False)
    county: str = ""
    id: Any = None

    @classmethod
    def from_entry(cls, entry: GazetteerEntry) -> GeoFeature:
        props = {
            "country": entry.country,
            "city": entry.city or "",
            "countrycode": entry.countrycode,
            "postcode": entry.postcode or "",
            "type": entry.kind,
            "street": entry.street or "",
            "district": entry.district or "",
            "name": entry.name,
            "state": entry.state or "",
        }
        return cls(entry.lon, entry.lat, props, entry.county or "", entry.id)

    @property
    def coordinates(self) -> tuple[float, float]:
        return (self.lon, self.lat)

    def to_dict(self) -> dict:
        return {
            "coordinates": [self.lon, self.lat],
            "properties": {k: self.properties.get(k, "") for k in PROPERTY_KEYS},
            "county": self.county,
            "id": self.id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> GeoFeature:
        props = data.get("properties") or {}
        lon, lat = data["coordinates"]
        return cls(float(lon), float(lat),
                   {k: props.get(k) or "" for k in PROPERTY_KEYS},
                   data.get("county") or "", data.get("id"))


class GeoIndex:
    """Immutable forward/reverse index over a list of gazetteer entries.

    Build with :func:`build_index`. All query methods are read-only, so one
    instance can be shared across threads.
    """

    def __init__(self, entries: Sequence[GazetteerEntry]):
        self.entries: tuple[GazetteerEntry, ...] = tuple(entries)
        seen = set()
        for e in self.entries:
            if e.id in seen:
                raise GazetteerError(f"duplicate entry id {e.id!r}")
            seen.add(e.id)
        self._by_id = {e.id: pos for pos, e in enumerate(self.entries)}

        postings: dict[str, list[tuple[int, int]]] = defaultdict(list)
        phrases: dict[str, list[int]] = defaultdict(list)
        for pos, e in enumerate(self.entries):
            name_tokens = tokenize(e.name)
            alt_tokens = []
            for alt in e.alt_names:
                alt_tokens.extend(tokenize(alt))
            for surface in (e.name, *e.alt_names):
                toks = tokenize(surface)
                if not toks:
                    continue
                phrases[" ".join(toks)].append(pos)
                if len(toks) > 1:
                    # compact form so hashtags such as #NewYork resolve
                    compact = "".join(toks)
                    phrases[compact].append(pos)
                    alt_tokens.append(compact)
            name_set = dict.fromkeys(name_tokens)
            for tok in name_set:
                postings[tok].append((pos, 2))
            for tok in dict.fromkeys(alt_tokens):
                if tok not in name_set:
                    postings[tok].append((pos, 1))
        self._postings = {k: tuple(v) for k, v in postings.items()}
        self._phrases = {k: tuple(dict.fromkeys(v)) for k, v in phrases.items()}
        self.max_phrase_tokens = max((k.count(" ") + 1 for k in self._phrases), default=0)

        order = sorted(range(len(self.entries)),
                       key=lambda p: (len(self.entries[p].name), id_sort_key(self.entries[p].id)))
        self._tiebreak = [0] * len(self.entries)
        for rank, pos in enumerate(order):
            self._tiebreak[pos] = rank

        if self.entries:
            self._lons = np.array([e.lon for e in self.entries], dtype=float)
            self._lats = np.array([e.lat for e in self.entries], dtype=float)
            self._tree = cKDTree(_unit_xyz(self._lons, self._lats))
            self._idkeys = [id_sort_key(e.id) for e in self.entries]
        else:
            self._tree = None

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def token_index(self) -> dict[str, tuple]:
        """Normalized token -> ids of entries reachable from it."""
        return {tok: tuple(self.entries[p].id for p, _ in plist)
                for tok, plist in self._postings.items()}

    def get(self, entry_id) -> GazetteerEntry:
        return self.entries[self._by_id[entry_id]]

    def has_phrase(self, key: str) -> bool:
        return key in self._phrases

    def search(self, query: str, limit: int = 10) -> list[GeoFeature]:
        if limit < 1:
            raise ValueError("limit must be >= 1")
        scores: dict[int, int] = defaultdict(int)
        for tok in dict.fromkeys(tokenize(query)):
            for pos, weight in self._postings.get(tok, ()):
                scores[pos] += weight
        if not scores:
            return []
        tiebreak = self._tiebreak
        best = nsmallest(limit, scores.items(), key=lambda kv: (-kv[1], tiebreak[kv[0]]))
        return [GeoFeature.from_entry(self.entries[pos]) for pos, _ in best]

    def nearest(self, lon: float, lat: float) -> GazetteerEntry:
        if self._tree is None:
            raise NoCoverageError("reverse lookup against an empty index")
        if not (-180.0 <= lon <= 180.0 and -90.0 <= lat <= 90.0):
            raise ValueError(f"coordinates out of range: ({lon}, {lat})")
        point = _unit_xyz([lon], [lat])[0]
        chord, _ = self._tree.query(point, k=1)
        # widen slightly so every entry tied (up to rounding) with the best chord is
        # re-ranked by exact haversine distance, then by id
        candidates = self._tree.query_ball_point(point, r=chord * (1 + 1e-9) + 1e-12)
        dists = haversine_m(lon, lat, self._lons[candidates], self._lats[candidates])
        pos = min(zip(dists.tolist(), candidates),
                  key=lambda dc: (dc[0], self._idkeys[dc[1]]))[1]
        return self.entries[pos]

    def reverse(self, lon: float, lat: float) -> GeoFeature:
        return GeoFeature.from_entry(self.nearest(lon, lat))

    def save(self, path) -> None:
        payload = "\n".join(json.dumps(e.to_record(), ensure_ascii=False, sort_keys=True)
                            for e in self.entries).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(SNAPSHOT_MAGIC)
            fh.write(struct.pack(">I", SNAPSHOT_VERSION))
            fh.write(zlib.compress(payload, 6))

    @classmethod
    def load(cls, path) -> GeoIndex:
        blob = Path(path).read_bytes()
        if blob[:4] != SNAPSHOT_MAGIC:
            raise GazetteerError(f"{path}: not an index snapshot")
        (version,) = struct.unpack(">I", blob[4:8])
        if version != SNAPSHOT_VERSION:
            raise GazetteerError(f"{path}: unsupported snapshot version {version}")
        text = zlib.decompress(blob[8:]).decode("utf-8")
        entries = [entry_from_record(json.loads(line)) for line in text.splitlines() if line]
        return cls(entries)


def build_index(entries: Sequence[GazetteerEntry]) -> GeoIndex:
    return GeoIndex(entries)


def forward_geocode(index: GeoIndex, query: str, limit: int = 10) -> list[GeoFeature]:
    """Rank entries by query-token overlap.

    A token matching an entry's name scores 2, an alias-only match scores 1.
    Ties go to the shorter name, then the smaller id.
    """
    return index.search(query, limit)


def reverse_geocode(index: GeoIndex, lon: float, lat: float) -> GeoFeature:
    """Feature of the entry nearest to ``(lon, lat)`` by great-circle distance."""
    return index.reverse(lon, lat)


def load_index(path) -> GeoIndex:
    """Load either a snapshot file or a JSON-lines gazetteer."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == SNAPSHOT_MAGIC:
        return GeoIndex.load(path)
    return build_index(load_gazetteer(path))

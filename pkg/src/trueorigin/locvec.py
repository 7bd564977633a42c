"""Five-level location vectors and slot-wise majority voting."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Hashable, Iterable, NamedTuple, Sequence

from .gazetteer import GeoFeature

logger = logging.getLogger(__name__)

LEVELS = ("district", "county", "city", "state", "country")


@dataclass(frozen=True)
class LocationVector:
    district: str | None = None
    county: str | None = None
    city: str | None = None
    state: str | None = None
    country: str | None = None

    def as_list(self) -> list[str | None]:
        return [getattr(self, level) for level in LEVELS]

    @classmethod
    def from_list(cls, values: Sequence[str | None]) -> LocationVector:
        if len(values) != len(LEVELS):
            raise ValueError(f"expected {len(LEVELS)} components, got {len(values)}")
        return cls(*(_blank_to_none(v) for v in values))

    def is_null(self) -> bool:
        return all(v is None for v in self.as_list())

    def to_dict(self) -> dict:
        return {level: getattr(self, level) for level in LEVELS}

    @classmethod
    def from_dict(cls, data: dict) -> LocationVector:
        return cls(*(_blank_to_none(data.get(level)) for level in LEVELS))


def _blank_to_none(value):
    if value is None:
        return None
    value = str(value).strip()
    return value or None


class CountryMatch(NamedTuple):
    value: str
    known: bool


class CountryDict:
    """Bijective ISO-3166 alpha-2 code <-> canonical country name table.

    Lookups are case-insensitive. ``aliases`` maps extra spellings (alpha-3
    codes, "USA", "UK") onto codes without breaking the bijection.
    """

    def __init__(self, pairs: Iterable[tuple[str, str]], aliases: dict[str, str] | None = None):
        self._name_by_code: dict[str, str] = {}
        self._code_by_name: dict[str, str] = {}
        for code, name in pairs:
            code, name = code.strip().upper(), name.strip()
            if code in self._name_by_code:
                raise ValueError(f"duplicate country code {code!r}")
            if name.casefold() in self._code_by_name:
                raise ValueError(f"duplicate country name {name!r}")
            self._name_by_code[code] = name
            self._code_by_name[name.casefold()] = code
        self._aliases = {}
        for alias, code in (aliases or {}).items():
            code = code.strip().upper()
            if code not in self._name_by_code:
                raise ValueError(f"alias {alias!r} points at unknown code {code!r}")
            self._aliases[alias.strip().casefold()] = code

    @classmethod
    def from_csv(cls, path, aliases_path=None) -> CountryDict:
        with open(path, newline="", encoding="utf-8") as fh:
            pairs = [(row["code"], row["name"]) for row in csv.DictReader(fh)]
        aliases = {}
        if aliases_path is not None:
            with open(aliases_path, newline="", encoding="utf-8") as fh:
                aliases = {row["alias"]: row["code"] for row in csv.DictReader(fh)}
        return cls(pairs, aliases)

    @classmethod
    def default(cls) -> CountryDict:
        data = resources.files("trueorigin") / "data"
        with resources.as_file(data / "countries.csv") as codes, \
                resources.as_file(data / "country_aliases.csv") as aliases:
            return cls.from_csv(codes, aliases)

    def __len__(self) -> int:
        return len(self._name_by_code)

    def name(self, code: str) -> str | None:
        return self._name_by_code.get(code.strip().upper())

    def code(self, name: str) -> str | None:
        return self._code_by_name.get(name.strip().casefold())

    def normalize(self, value: str) -> CountryMatch:
        key = value.strip()
        if not key:
            return CountryMatch(value, False)
        if len(key) == 2 and key.upper() in self._name_by_code:
            return CountryMatch(self._name_by_code[key.upper()], True)
        code = self._code_by_name.get(key.casefold()) or self._aliases.get(key.casefold())
        if code is not None:
            return CountryMatch(self._name_by_code[code], True)
        return CountryMatch(value, False)


_default_countries: CountryDict | None = None


def default_country_dict() -> CountryDict:
    global _default_countries
    if _default_countries is None:
        _default_countries = CountryDict.default()
    return _default_countries


def normalize_country(value: str, countries: CountryDict | None = None) -> CountryMatch:
    """ISO code or known spelling -> canonical name; unknown input comes back
    unchanged with ``known=False``."""
    return (countries or default_country_dict()).normalize(value)


def vector_from_feature(feature: GeoFeature) -> LocationVector:
    props = feature.properties
    return LocationVector(
        district=_blank_to_none(props.get("district")),
        county=_blank_to_none(feature.county),
        city=_blank_to_none(props.get("city")),
        state=_blank_to_none(props.get("state")),
        country=_blank_to_none(props.get("country")),
    )


def normalize_vector(vector: LocationVector, countries: CountryDict | None = None) -> LocationVector:
    """Trim every slot and map the country slot to its canonical name."""
    values = [_blank_to_none(v) for v in vector.as_list()]
    if values[-1] is not None:
        values[-1] = normalize_country(values[-1], countries).value
    return LocationVector(*values)


def vote(values: Iterable[Hashable | None], key: Callable | None = None):
    """Most frequent non-None value.

    Ties go to whichever tied value occurred first. With ``key``, values are
    grouped by ``key(value)`` and the first member of the winning group is
    returned.
    """
    counts: dict = {}
    first: dict = {}
    for value in values:
        if value is None:
            continue
        k = key(value) if key else value
        if k not in counts:
            counts[k] = 0
            first[k] = value
        counts[k] += 1
    if not counts:
        return None
    best = max(counts.values())
    # dicts keep insertion order, so this is the earliest value with the top count
    winner = next(k for k, c in counts.items() if c == best)
    return first[winner]


def _fold(value: str) -> str:
    return value.strip().casefold()


def conclusive_vector(vectors: Sequence[LocationVector],
                      countries: CountryDict | None = None) -> LocationVector:
    if not vectors:
        raise ValueError("no location vectors")
    normalized = [normalize_vector(v, countries) for v in vectors]
    columns = zip(*(v.as_list() for v in normalized))
    return LocationVector(*(vote(column, key=_fold) for column in columns))


def slots_match(a: str | None, b: str | None, countries: CountryDict | None = None,
                level: str = "") -> bool:
    """Case-insensitive exact comparison after trimming (and country
    normalization on the country level)."""
    if a is None or b is None:
        return False
    if level == "country":
        a = normalize_country(a, countries).value
        b = normalize_country(b, countries).value
    return _fold(a) == _fold(b)

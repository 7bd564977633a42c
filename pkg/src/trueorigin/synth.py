"""Synthetic gazetteers for scale tests and demos."""

from __future__ import annotations

import numpy as np

from .gazetteer import GazetteerEntry

_ONSETS = ("b", "k", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "v", "z",
           "br", "st", "tr", "gl", "kr", "pl", "sh", "th")
_VOWELS = ("a", "e", "i", "o", "u", "ai", "ou", "ea")
_CODAS = ("", "", "n", "r", "l", "s", "m", "x")

_COUNTRIES = (("AU", "Australia"), ("NZ", "New Zealand"), ("US", "United States"),
              ("CA", "Canada"), ("GB", "United Kingdom"), ("IE", "Ireland"),
              ("IN", "India"), ("NP", "Nepal"), ("ZA", "South Africa"), ("BR", "Brazil"),
              ("AR", "Argentina"), ("FR", "France"), ("DE", "Germany"), ("IT", "Italy"),
              ("ES", "Spain"), ("JP", "Japan"), ("PH", "Philippines"), ("NG", "Nigeria"),
              ("KE", "Kenya"), ("MX", "Mexico"))


def _words(rng: np.random.Generator, count: int) -> list[str]:
    seen: dict[str, None] = {}
    while len(seen) < count:
        n_syll = int(rng.integers(2, 4))
        word = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                       for _ in range(n_syll)) + _CODAS[rng.integers(len(_CODAS))]
        seen.setdefault(word, None)
    return list(seen)


def synthetic_entries(n: int, seed: int = 0, vocab_size: int | None = None) -> list[GazetteerEntry]:
    """``n`` point entries with distinct coordinates and distinct name token sets.

    Names are one to three distinct pseudo-words; no two entries share the same set
    of name tokens, so each entry is the top forward hit for its own name.
    """
    rng = np.random.default_rng(seed)
    vocab = _words(rng, vocab_size or max(200, n // 30))
    cities = [w.capitalize() for w in _words(rng, 400)]
    states = [w.capitalize() for w in _words(rng, 60)]
    districts = [w.capitalize() for w in _words(rng, 800)]

    names: list[str] = []
    token_sets: set[frozenset] = set()
    while len(names) < n:
        k = int(rng.choice((1, 2, 3), p=(0.1, 0.5, 0.4)))
        words = [vocab[i] for i in rng.choice(len(vocab), size=k, replace=False)]
        key = frozenset(words)
        if key in token_sets:
            continue
        token_sets.add(key)
        names.append(" ".join(w.capitalize() for w in words))

    coords: set[tuple[float, float]] = set()
    entries = []
    for i, name in enumerate(names):
        while True:
            lon = round(float(rng.uniform(-180.0, 180.0)), 7)
            lat = round(float(np.degrees(np.arcsin(rng.uniform(-1.0, 1.0)))), 7)
            if (lon, lat) not in coords:
                coords.add((lon, lat))
                break
        code, country = _COUNTRIES[rng.integers(len(_COUNTRIES))]
        kind = ("poi", "street", "district", "city")[rng.integers(4)]
        city = cities[rng.integers(len(cities))]
        entries.append(GazetteerEntry(
            id=i, name=name, lon=lon, lat=lat, kind=kind,
            country=country, countrycode=code,
            district=name if kind == "district" else districts[rng.integers(len(districts))],
            city=name if kind == "city" else city,
            county=f"{city} County",
            state=states[rng.integers(len(states))],
            street=name if kind == "street" else None,
            postcode=f"{int(rng.integers(1000, 99999)):05d}",
        ))
    return entries

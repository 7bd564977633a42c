"""JSON payloads shared by the CLI and the HTTP service.

Both front ends serialize through :func:`dumps`, so identical inputs give
byte-identical bodies. Feature key order: ``coordinates``, ``properties``
(country, city, countrycode, postcode, type, street, district, name, state),
``county``, ``id``.
"""

from __future__ import annotations

import json

from ..gazetteer import GeoIndex
from ..pipeline import PipelineDeps, Tweet, geotag_tweet


def dumps(payload) -> str:
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def search_payload(index: GeoIndex, query: str, limit: int = 10) -> dict:
    return {"features": [f.to_dict() for f in index.search(query, limit)]}


def reverse_payload(index: GeoIndex, lon: float, lat: float) -> dict:
    return {"features": [index.reverse(lon, lat).to_dict()]}


def geotag_payload(deps: PipelineDeps, tweet: Tweet) -> dict:
    return geotag_tweet(deps, tweet).to_dict()

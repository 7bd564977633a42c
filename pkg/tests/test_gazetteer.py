from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trueorigin.gazetteer import (
    PROPERTY_KEYS, GazetteerEntry, GazetteerError, GeoFeature, GeoIndex, NoCoverageError,
    build_index, forward_geocode, haversine_m, load_gazetteer, load_index, reverse_geocode,
    tokenize, write_gazetteer,
)
from trueorigin.synth import synthetic_entries

from conftest import GAZETTEER

MELBOURNE = {"id": 3, "name": "Melbourne", "lon": 144.9631, "lat": -37.8136, "kind": "city",
             "county": "City of Melbourne", "state": "Victoria", "country": "Australia",
             "countrycode": "AU"}


def _write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def _entry(i, lon, lat, name=None, **kw):
    return GazetteerEntry(id=i, name=name or f"Place {i}", lon=lon, lat=lat, kind="poi",
                          country="Australia", countrycode="AU", **kw)


def brute_nearest(entries, lon, lat):
    """Independent oracle: exact haversine against every entry, ties by id."""
    R = 6_371_000.0
    best = None
    for e in entries:
        p1, p2 = math.radians(lat), math.radians(e.lat)
        dp, dl = p2 - p1, math.radians(e.lon - lon)
        a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
        d = 2 * R * math.asin(min(1.0, math.sqrt(a)))
        key = (d, e.id)
        if best is None or key < best[0]:
            best = (key, e)
    return best[1]


def brute_rank(entries, query, limit):
    """Independent oracle for the declared ranking rule."""
    q = set(tokenize(query))
    scored = []
    for e in entries:
        name = set(tokenize(e.name))
        alias = set()
        for alt in e.alt_names:
            alias |= set(tokenize(alt))
        for surface in (e.name, *e.alt_names):
            toks = tokenize(surface)
            if len(toks) > 1:
                alias.add("".join(toks))
        score = sum(2 if t in name else 1 if t in alias else 0 for t in q)
        if score:
            scored.append((-score, len(e.name), e.id))
    scored.sort()
    return [s[2] for s in scored[:limit]]


# ---- loading -----------------------------------------------------------------

def test_load_empty_file(tmp_path):
    assert load_gazetteer(_write_lines(tmp_path / "g.jsonl", [])) == []


def test_load_single_melbourne_line(tmp_path):
    path = _write_lines(tmp_path / "g.jsonl", [json.dumps(MELBOURNE)])
    [entry] = load_gazetteer(path)
    assert (entry.id, entry.lon, entry.lat, entry.city) == (3, 144.9631, -37.8136, "Melbourne")


def test_load_skips_out_of_range_latitude(tmp_path, caplog):
    bad = dict(MELBOURNE, id=4, lat=95.0)
    path = _write_lines(tmp_path / "g.jsonl", [json.dumps(MELBOURNE), json.dumps(bad)])
    errors = []
    entries = load_gazetteer(path, errors)
    assert len(entries) == 1
    assert len(errors) == 1 and errors[0][0] == 2 and "lat" in errors[0][1]
    assert "skipped" in caplog.text


@pytest.mark.parametrize("line", [
    "{not json",
    json.dumps({**MELBOURNE, "kind": "planet"}),
    json.dumps({**MELBOURNE, "countrycode": "aus"}),
    json.dumps({k: v for k, v in MELBOURNE.items() if k != "country"}),
    json.dumps({**MELBOURNE, "extra": 1}),
    json.dumps({**MELBOURNE, "kind": "state", "city": "Melbourne"}),
    json.dumps([1, 2]),
])
def test_load_rejects_malformed_lines(tmp_path, line):
    errors = []
    assert load_gazetteer(_write_lines(tmp_path / "g.jsonl", [line]), errors) == []
    assert len(errors) == 1


def test_load_missing_file_raises(tmp_path):
    with pytest.raises(OSError):
        load_gazetteer(tmp_path / "absent.jsonl")


def test_fixture_gazetteer_loads_cleanly(entries):
    errors = []
    assert len(load_gazetteer(GAZETTEER, errors)) == len(entries) == 37
    assert errors == []


def test_admin_entries_fill_their_own_slot(index):
    assert index.get(2).state == "Victoria"
    assert index.get(4).district == "Carlton"


# ---- build -------------------------------------------------------------------

def test_duplicate_ids_rejected():
    with pytest.raises(GazetteerError, match="duplicate"):
        build_index([_entry(1, 0, 0), _entry(1, 1, 1)])


def test_empty_index_answers_nothing():
    index = build_index([])
    assert forward_geocode(index, "Melbourne") == []
    assert index.token_index == {}
    with pytest.raises(NoCoverageError):
        reverse_geocode(index, 0, 0)


def test_single_entry_forward():
    e = _entry(7, 10.0, 20.0, name="Lonely Hill")
    hits = forward_geocode(build_index([e]), "Lonely Hill")
    assert [h.id for h in hits] == [7]


def test_token_index_maps_tokens_to_ids(index):
    assert set(index.token_index["melbourne"]) == {3, 6}
    assert index.token_index["nyc"] == (22,)


# ---- forward -----------------------------------------------------------------

def test_forward_street_address(index):
    top = forward_geocode(index, "700 Swanston Street, Carlton, Melbourne, VIC")[0]
    assert top.coordinates == (144.96449828, -37.80011159)
    assert top.properties["district"] == "Carlton"


def test_forward_alias(index):
    top = forward_geocode(index, "melbourne uni")[0]
    assert top.coordinates == (144.96130134, -37.7970796)
    assert top.properties["name"] == "University of Melbourne"


def test_forward_unmatched_is_empty(index):
    assert forward_geocode(index, "zzqxv") == []
    assert forward_geocode(index, "") == []
    assert forward_geocode(index, "!!! ...") == []


def test_forward_case_and_hashtag_insensitive(index):
    plain = [f.to_dict() for f in forward_geocode(index, "new york city")]
    assert plain == [f.to_dict() for f in forward_geocode(index, "NEW YORK CITY")]
    assert forward_geocode(index, "#NewYork")[0].id == 21


def test_forward_prefers_shorter_name_on_tie(index):
    assert [f.id for f in forward_geocode(index, "Melbourne", 2)] == [3, 6]


def test_forward_limit(index):
    assert len(forward_geocode(index, "new york city", 2)) == 2
    with pytest.raises(ValueError):
        forward_geocode(index, "Melbourne", 0)


def test_forward_is_byte_deterministic(index):
    a = json.dumps([f.to_dict() for f in forward_geocode(index, "London Camden")])
    b = json.dumps([f.to_dict() for f in build_index(list(index.entries)).search("London Camden")])
    assert a == b


def test_feature_payload_shape(index):
    d = forward_geocode(index, "Carlton")[0].to_dict()
    assert list(d) == ["coordinates", "properties", "county", "id"]
    assert tuple(d["properties"]) == PROPERTY_KEYS
    assert d["properties"]["street"] == "" and d["county"] == "City of Melbourne"
    assert GeoFeature.from_dict(d).to_dict() == d


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(
    ["new", "york", "city", "melbourne", "uni", "park", "central", "london", "nyc", "vic",
     "newyork", "jersey", "st", "kilda", "zzqxv", "42", "the", "of"]), min_size=1, max_size=5),
    st.integers(1, 6))
def test_forward_matches_rank_oracle(entries, index, words, limit):
    query = " ".join(words)
    assert [f.id for f in forward_geocode(index, query, limit)] == brute_rank(entries, query, limit)


# ---- reverse -----------------------------------------------------------------

def test_reverse_exact_coordinates(index, entries):
    for e in entries:
        assert reverse_geocode(index, e.lon, e.lat).id == e.id


def test_reverse_tie_goes_to_smaller_id():
    index = build_index([_entry(5, 10, 10), _entry(2, -10, -10)])
    assert reverse_geocode(index, 0, 0).id == 2
    index = build_index([_entry(2, 10, 10), _entry(5, -10, -10)])
    assert reverse_geocode(index, 0, 0).id == 2


def test_reverse_between_two_entries_picks_nearer(index, entries):
    carlton, street = index.get(4), index.get(5)
    probe_lon = 0.4 * carlton.lon + 0.6 * street.lon
    probe_lat = 0.4 * carlton.lat + 0.6 * street.lat
    assert reverse_geocode(index, probe_lon, probe_lat).id == brute_nearest(
        entries, probe_lon, probe_lat).id == 5


def test_reverse_rejects_out_of_range(index):
    with pytest.raises(ValueError):
        reverse_geocode(index, 181, 0)
    with pytest.raises(ValueError):
        reverse_geocode(index, 0, -90.5)


def test_reverse_across_antimeridian():
    index = build_index([_entry(1, 179.9, 0), _entry(2, -170, 0)])
    assert reverse_geocode(index, -179.95, 0).id == 1


@settings(max_examples=150, deadline=None)
@given(st.floats(-180, 180), st.floats(-90, 90))
def test_reverse_matches_brute_force(entries, index, lon, lat):
    assert reverse_geocode(index, lon, lat).id == brute_nearest(entries, lon, lat).id


def test_haversine_known_distance():
    # one degree of longitude on the equator
    assert haversine_m(0, 0, 1, 0) == pytest.approx(6_371_000 * math.pi / 180, rel=1e-12)
    assert float(haversine_m(0, 0, 0, 0)) == 0.0


# ---- persistence -------------------------------------------------------------

def test_snapshot_round_trip(index, tmp_path):
    path = tmp_path / "index.bin"
    index.save(path)
    loaded = GeoIndex.load(path)
    assert loaded.entries == index.entries
    for q in ("melbourne uni", "New York", "#NYC", "Park"):
        assert [f.to_dict() for f in loaded.search(q)] == [f.to_dict() for f in index.search(q)]
    assert load_index(path).entries == index.entries
    assert load_index(GAZETTEER).entries == index.entries


def test_snapshot_rejects_foreign_file(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"nope")
    with pytest.raises(GazetteerError):
        GeoIndex.load(path)


def test_write_gazetteer_round_trip(entries, tmp_path):
    path = tmp_path / "copy.jsonl"
    write_gazetteer(entries, path)
    assert load_gazetteer(path) == entries


def test_synthetic_round_trip_small():
    entries = synthetic_entries(2000, seed=3)
    index = build_index(entries)
    for e in entries:
        top = index.search(e.name, 1)[0]
        assert top.id == e.id
        assert index.reverse(*top.coordinates).id == e.id
    rng = np.random.default_rng(1)
    for lon, lat in zip(rng.uniform(-180, 180, 200), rng.uniform(-90, 90, 200)):
        assert index.nearest(lon, lat).id == brute_nearest(entries, lon, lat).id

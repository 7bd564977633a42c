"""Paths to the small fixture data the demos run against."""

from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
GAZETTEER = DATA / "gazetteer.jsonl"
TWEETS = DATA / "tweets50.jsonl"
LEM_TWEETS = DATA / "lem20.jsonl"
LEM_MENTIONS = DATA / "lem20_ner.jsonl"

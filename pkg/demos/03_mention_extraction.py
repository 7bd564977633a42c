"""
Comparing location-mention extractors
=====================================

Extractors are plugins. The bundled baseline matches gazetteer names over
word n-grams; precomputed output from any external tagger can be replayed
and scored against the same corpus.
"""

import json

from trueorigin import build_index, load_gazetteer, read_corpus
from trueorigin.lem import (GazetteerExtractor, StaticExtractor, compare_lem_candidates,
                            filter_mentions, format_lem_report)
from _data import GAZETTEER, LEM_MENTIONS, LEM_TWEETS

index = build_index(load_gazetteer(GAZETTEER))
baseline = GazetteerExtractor(index, name="baseline")

text = ("Off to the Park for a morning walk #NJ #NewJersey. First visit to #Manhattan, "
        "in #NewYork for a few days #NYC")
mentions = baseline.extract(text)
print([m.surface for m in mentions])

# Generic names and bare numbers are dropped before anything else happens.
print([m.surface for m in filter_mentions(baseline.extract("Happy Earth Day from table 42"))])

# Score the baseline next to replayed tagger output on a 20-tweet corpus.
corpus = list(read_corpus(LEM_TWEETS))
planted = {r["id"]: r["mentions"] for r in map(json.loads, open(LEM_MENTIONS))}
tagger = StaticExtractor({t.text: planted[t.id] for t in corpus}, name="tagger")
print(format_lem_report(compare_lem_candidates([baseline, tagger], corpus, index)))

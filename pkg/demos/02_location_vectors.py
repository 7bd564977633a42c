"""
Location vectors and slot-wise voting
=====================================

Every geocoded mention becomes a five-slot vector
(district, county, city, state, country). A tweet's conclusive vector is
the per-slot most frequent value over its mentions.
"""

from trueorigin import build_index, conclusive_vector, load_gazetteer, vector_from_feature, vote
from trueorigin.locvec import normalize_country
from _data import GAZETTEER

index = build_index(load_gazetteer(GAZETTEER))

# Three mentions from one tweet: a neighbourhood, a city alias, a state alias.
vectors = [vector_from_feature(index.search(q, 1)[0]) for q in ("Manhattan", "NYC", "NJ")]
for v in vectors:
    print(v.as_list())

# Two of the three say New York, so the state slot goes there. Slots nobody
# fills stay empty rather than being guessed.
print("conclusive:", conclusive_vector(vectors).as_list())

# vote() ignores missing values and breaks ties by first appearance.
print(vote(["Melbourne", None, "Sydney", "Sydney"]), vote(["Perth", "Hobart"]), vote([None]))

# Country slots are normalised, so codes and names compare equal.
for raw in ("AU", "Australia", "USA", "ZZ"):
    print(raw, "->", normalize_country(raw))

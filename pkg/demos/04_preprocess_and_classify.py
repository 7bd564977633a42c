"""
Normalising tweets and gating on origin evidence
================================================

Before classification, tweets are normalised: entities decoded, links,
user handles and emoji replaced by placeholders. A classifier then decides
whether the text says the author is at the mentioned place.
"""

from trueorigin import HeuristicClassifier, classify_batch, preprocess_tweet

for raw in ("A &amp; B", "see https://t.co/x @bob \U0001F600", "Love it ❤️ &lt;3"):
    print(f"{raw!r:40} -> {preprocess_tweet(raw).normalized!r}")

tweets = [
    "Fun 3 Mile Interval Run along the Riverwalk! Supporting our beautiful city of Chicago",
    "@friend and I traveled to #Miami at the beginning of June for his birthday",
    "I drove to the brewery this evening, closing their downtown Yakima taproom",
    "Melbourne",
]
# The heuristic is a keyword stand-in for a trained model: presence cues push
# towards true origin, retrospection and travel narratives push away, and no
# cue at all means low evidence.
labels = classify_batch(HeuristicClassifier(), [preprocess_tweet(t) for t in tweets])
for text, label in zip(tweets, labels):
    print(f"{label.label.name.lower():13} {label.score:.2f}  {text[:60]}")

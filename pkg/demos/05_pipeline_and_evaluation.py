"""
End-to-end geotagging and scoring
=================================

The pipeline chains extraction, filtering, validation, the evidence gate
and vector voting. Tweets that carry coordinates can then be scored level
by level against the place nearest to their true position.
"""

from trueorigin import (OracleClassifier, PipelineDeps, build_index, cohen_kappa,
                        default_country_dict, evaluate, ground_truths, load_gazetteer,
                        read_corpus, run_corpus)
from trueorigin.evalkit import distributions
from trueorigin.lem import GazetteerExtractor
from trueorigin.classifier import HeuristicClassifier, classify_batch, preprocess_tweet
from trueorigin.pipeline import Disposition
from _data import GAZETTEER, TWEETS

index = build_index(load_gazetteer(GAZETTEER))
countries = default_country_dict()
corpus = list(read_corpus(TWEETS))

# The oracle replays hand labels, so every error below would be the
# pipeline's own rather than the classifier's.
oracle = OracleClassifier.from_jsonl(TWEETS)
deps = PipelineDeps(index, GazetteerExtractor(index), oracle, countries)
results, summary = run_corpus(deps, corpus)
print(summary.format(), "\n")

geotagged = [r for r in results if r.disposition is Disposition.GEOTAGGED]
truths = ground_truths(index, [t for t in corpus if t.id in {r.tweet_id for r in geotagged}],
                       countries)
print(evaluate(geotagged, truths, countries).format(), "\n")

# How far does the keyword heuristic agree with the hand labels?
prepared = [preprocess_tweet(t.text, t.id) for t in corpus]
heuristic = classify_batch(HeuristicClassifier(), prepared)
hand = classify_batch(oracle, prepared)
print("kappa(heuristic, hand labels) =",
      round(cohen_kappa([int(l.label) for l in heuristic], [int(l.label) for l in hand]), 3))

# Label shares broken down by a tweet attribute.
print(distributions(list(zip(corpus, hand)), "source").format())

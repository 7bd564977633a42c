"""Geotag tweets by the place they were posted from.

Location mentions are extracted from the text, checked against a gazetteer,
and kept only when the tweet reads as written *at* the place. The surviving
mentions are geocoded and merged slot by slot into one
[district, county, city, state, country] vector.
"""

from .classifier import (EvidenceLabel, HeuristicClassifier, Label, OracleClassifier,
                         PreprocessedTweet, RemoteClassifier, classify, classify_batch,
                         preprocess_tweet)
from .evalkit import (DistributionReport, LevelAccuracy, cohen_kappa, distributions,
                      evaluate, ground_truth_vector, ground_truths)
from .gazetteer import (GazetteerEntry, GeoFeature, GeoIndex, build_index, forward_geocode,
                        load_gazetteer, load_index, reverse_geocode)
from .lem import (ExtractedLocation, GazetteerExtractor, LemStats, RemoteExtractor,
                  StaticExtractor, check_location_validity, compare_lem_candidates,
                  extract_locations, filter_mentions)
from .locvec import (CountryDict, LocationVector, conclusive_vector, default_country_dict,
                     normalize_country, vector_from_feature, vote)
from .pipeline import (Disposition, FunnelSummary, GeotagResult, PipelineDeps, Tweet,
                       geotag_corpus, geotag_tweet, read_corpus, run_corpus)
from .remote import PluginError

__version__ = "0.1.0"

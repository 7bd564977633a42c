"""Application configuration and component wiring.

The config file is INI (``configparser``)::

    [paths]
    gazetteer = data/gazetteer.jsonl
    snapshot = data/index.bin
    countries = data/countries.csv

    [extractor]
    kind = baseline            ; baseline | remote
    url = http://localhost:9001
    timeout = 10
    max_inflight = 4
    max_ngram = 4

    [classifier]
    kind = heuristic           ; heuristic | remote | oracle
    url = http://localhost:9002
    timeout = 30
    max_inflight = 2
    batch_size = 32
    threshold =                ; empty means argmax
    oracle_path = labels.jsonl

    [filter]
    generic = city, earth, europe, asia, americas, africa, world, town, county, district

    [analysis]
    band_edges = 0, 50, 100, 200, 300, 400, 500, 1000, ...

    [service]
    bind = 127.0.0.1:8080

Environment variables ``TRUEORIGIN_GAZETTEER``, ``TRUEORIGIN_SNAPSHOT``,
``TRUEORIGIN_COUNTRIES`` and ``TRUEORIGIN_BIND`` override the file.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..classifier import HeuristicClassifier, OracleClassifier, RemoteClassifier
from ..evalkit import DEFAULT_BAND_EDGES
from ..gazetteer import GeoIndex, build_index, load_gazetteer
from ..lem import GENERIC_REGIONS, GazetteerExtractor, RemoteExtractor
from ..locvec import CountryDict, default_country_dict
from ..pipeline import PipelineDeps

ENV_OVERRIDES = {
    "TRUEORIGIN_GAZETTEER": "gazetteer_path",
    "TRUEORIGIN_SNAPSHOT": "snapshot_path",
    "TRUEORIGIN_COUNTRIES": "countries_path",
    "TRUEORIGIN_BIND": "bind",
}

EXTRACTORS = ("baseline", "remote")
CLASSIFIERS = ("heuristic", "remote", "oracle")


class ConfigError(ValueError):
    pass


@dataclass
class AppConfig:
    gazetteer_path: str | None = None
    snapshot_path: str | None = None
    countries_path: str | None = None
    extractor: str = "baseline"
    extractor_url: str | None = None
    extractor_timeout: float = 10.0
    extractor_max_inflight: int = 4
    max_ngram: int = 4
    classifier: str = "heuristic"
    classifier_url: str | None = None
    classifier_timeout: float = 30.0
    classifier_max_inflight: int = 2
    batch_size: int = 32
    threshold: float | None = None
    oracle_path: str | None = None
    generic: tuple[str, ...] = tuple(sorted(GENERIC_REGIONS))
    band_edges: tuple[int, ...] = DEFAULT_BAND_EDGES
    bind: str = "127.0.0.1:8080"
    _index: GeoIndex | None = field(default=None, repr=False, compare=False)

    def validate(self, need_index: bool = True) -> None:
        if self.extractor not in EXTRACTORS:
            raise ConfigError(f"extractor must be one of {EXTRACTORS}, got {self.extractor!r}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"classifier must be one of {CLASSIFIERS}, got {self.classifier!r}")
        if self.extractor == "remote" and not self.extractor_url:
            raise ConfigError("remote extractor needs extractor url")
        if self.classifier == "remote" and not self.classifier_url:
            raise ConfigError("remote classifier needs classifier url")
        if self.classifier == "oracle":
            if not self.oracle_path:
                raise ConfigError("oracle classifier needs oracle_path")
            _require_file(self.oracle_path, "oracle_path")
        if need_index:
            if self.snapshot_path and Path(self.snapshot_path).is_file():
                pass
            elif self.gazetteer_path:
                _require_file(self.gazetteer_path, "gazetteer")
            else:
                raise ConfigError("no gazetteer or index snapshot configured")
        if self.countries_path:
            _require_file(self.countries_path, "countries")
        if list(self.band_edges) != sorted(set(self.band_edges)) or not self.band_edges:
            raise ConfigError("band_edges must be strictly increasing")
        self.bind_address()

    def bind_address(self) -> tuple[str, int]:
        host, sep, port = self.bind.rpartition(":")
        if not sep or not port.isdigit():
            raise ConfigError(f"bind must look like host:port, got {self.bind!r}")
        return host or "127.0.0.1", int(port)

    def index(self) -> GeoIndex:
        """Snapshot if present, else a fresh build from the gazetteer file."""
        if self._index is None:
            if self.snapshot_path and Path(self.snapshot_path).is_file():
                self._index = GeoIndex.load(self.snapshot_path)
            elif self.gazetteer_path:
                self._index = build_index(load_gazetteer(self.gazetteer_path))
            else:
                raise ConfigError("no gazetteer or index snapshot configured")
        return self._index

    def countries(self) -> CountryDict:
        if self.countries_path:
            return CountryDict.from_csv(self.countries_path)
        return default_country_dict()

    def build_extractor(self, index: GeoIndex):
        if self.extractor == "remote":
            return RemoteExtractor(self.extractor_url, self.extractor_timeout,
                                   self.extractor_max_inflight)
        return GazetteerExtractor(index, self.max_ngram, name="baseline")

    def build_classifier(self):
        if self.classifier == "remote":
            return RemoteClassifier(self.classifier_url, self.classifier_timeout,
                                    self.classifier_max_inflight, self.batch_size,
                                    self.threshold)
        if self.classifier == "oracle":
            return OracleClassifier.from_jsonl(self.oracle_path)
        return HeuristicClassifier(self.threshold)

    def deps(self) -> PipelineDeps:
        index = self.index()
        return PipelineDeps(index, self.build_extractor(index), self.build_classifier(),
                            self.countries(), frozenset(g.casefold() for g in self.generic))


def _require_file(path, what):
    if not Path(path).is_file():
        raise ConfigError(f"{what} file not found: {path}")


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def load_config(path=None, env=None, **overrides) -> AppConfig:
    """Defaults, then the INI file, then environment, then keyword overrides
    (``None`` values are ignored)."""
    cfg = AppConfig()
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        if not parser.read(path, encoding="utf-8"):
            raise ConfigError(f"config file not found: {path}")
        get = parser.get
        if parser.has_section("paths"):
            cfg.gazetteer_path = get("paths", "gazetteer", fallback=None) or None
            cfg.snapshot_path = get("paths", "snapshot", fallback=None) or None
            cfg.countries_path = get("paths", "countries", fallback=None) or None
        if parser.has_section("extractor"):
            sec = parser["extractor"]
            cfg.extractor = sec.get("kind", cfg.extractor)
            cfg.extractor_url = sec.get("url") or None
            cfg.extractor_timeout = sec.getfloat("timeout", cfg.extractor_timeout)
            cfg.extractor_max_inflight = sec.getint("max_inflight", cfg.extractor_max_inflight)
            cfg.max_ngram = sec.getint("max_ngram", cfg.max_ngram)
        if parser.has_section("classifier"):
            sec = parser["classifier"]
            cfg.classifier = sec.get("kind", cfg.classifier)
            cfg.classifier_url = sec.get("url") or None
            cfg.classifier_timeout = sec.getfloat("timeout", cfg.classifier_timeout)
            cfg.classifier_max_inflight = sec.getint("max_inflight", cfg.classifier_max_inflight)
            cfg.batch_size = sec.getint("batch_size", cfg.batch_size)
            threshold = sec.get("threshold", "").strip()
            cfg.threshold = float(threshold) if threshold else None
            cfg.oracle_path = sec.get("oracle_path") or None
        if parser.has_option("filter", "generic"):
            cfg.generic = tuple(_split(get("filter", "generic")))
        if parser.has_option("analysis", "band_edges"):
            cfg.band_edges = tuple(int(v) for v in _split(get("analysis", "band_edges")))
        if parser.has_option("service", "bind"):
            cfg.bind = get("service", "bind")
        base = Path(path).resolve().parent
        for attr in ("gazetteer_path", "snapshot_path", "countries_path", "oracle_path"):
            value = getattr(cfg, attr)
            if value and not Path(value).is_absolute():
                setattr(cfg, attr, str(base / value))
    env = os.environ if env is None else env
    for var, attr in ENV_OVERRIDES.items():
        if env.get(var):
            setattr(cfg, attr, env[var])
    for attr, value in overrides.items():
        if value is not None:
            if not hasattr(cfg, attr):
                raise ConfigError(f"unknown config field {attr!r}")
            setattr(cfg, attr, value)
    return cfg

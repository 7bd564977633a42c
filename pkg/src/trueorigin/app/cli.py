"""Command-line front end.

Exit status: 0 on success, 1 on usage errors, 2 on runtime failures. Corpus
commands still write every result when some tweets fail, then exit 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..classifier import PartialBatchError, classify_batch, preprocess_tweet
from ..evalkit import DIMENSIONS, cohen_kappa, distributions, evaluate, ground_truths
from ..evalkit import write_records_csv, write_records_jsonl
from ..gazetteer import GazetteerError, NoCoverageError, build_index, load_gazetteer
from ..lem import StaticExtractor, compare_lem_candidates, format_lem_report
from ..pipeline import Disposition, FunnelSummary, geotag_corpus, read_corpus
from ..remote import PluginError
from . import payloads
from .config import AppConfig, ConfigError, load_config

log = logging.getLogger("trueorigin")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--gazetteer", help="JSON-lines gazetteer file")
    common.add_argument("--index", help="index snapshot file")
    common.add_argument("--countries", help="code,name country CSV")
    common.add_argument("--extractor", choices=("baseline", "remote"))
    common.add_argument("--extractor-url")
    common.add_argument("--classifier", choices=("heuristic", "remote", "oracle"))
    common.add_argument("--classifier-url")
    common.add_argument("--oracle", help="JSON-lines file with id/text and label")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="trueorigin", description="Tweet origin geotagging toolkit.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("build-index", parents=[common], help="build an index snapshot")
    s.add_argument("--out", required=True, help="snapshot file to write")

    s = sub.add_parser("search", parents=[common], help="forward geocode a query")
    s.add_argument("query")
    s.add_argument("--limit", type=int, default=10)

    s = sub.add_parser("reverse", parents=[common], help="reverse geocode a point")
    s.add_argument("lon", type=float)
    s.add_argument("lat", type=float)

    s = sub.add_parser("geotag", parents=[common], help="geotag a JSON-lines corpus")
    s.add_argument("corpus")
    s.add_argument("--out", help="write results here instead of stdout")

    s = sub.add_parser("compare-lem", parents=[common], help="compare extractor candidates")
    s.add_argument("corpus")
    s.add_argument("--mentions", action="append", default=[], metavar="NAME=PATH",
                   help="precomputed mentions, JSON lines of {id, mentions: [...]}")
    s.add_argument("--no-baseline", action="store_true")

    s = sub.add_parser("evaluate", parents=[common], help="geotag and score against coordinates")
    s.add_argument("corpus")
    s.add_argument("--csv", help="write per-level accuracy as CSV")
    s.add_argument("--jsonl", help="write per-level accuracy as JSON lines")

    s = sub.add_parser("analyze", parents=[common], help="distribution of evidence labels")
    s.add_argument("corpus")
    s.add_argument("--dimension", required=True, choices=DIMENSIONS)
    s.add_argument("--csv")
    s.add_argument("--jsonl")

    s = sub.add_parser("kappa", help="Cohen's kappa between two label files")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("-v", "--verbose", action="store_true")

    s = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    s.add_argument("--bind", help="host:port")
    return p


def _config(args) -> AppConfig:
    oracle = getattr(args, "oracle", None)
    classifier = getattr(args, "classifier", None) or ("oracle" if oracle else None)
    return load_config(
        getattr(args, "config", None),
        gazetteer_path=getattr(args, "gazetteer", None),
        snapshot_path=getattr(args, "index", None),
        countries_path=getattr(args, "countries", None),
        extractor=getattr(args, "extractor", None),
        extractor_url=getattr(args, "extractor_url", None),
        classifier=classifier,
        classifier_url=getattr(args, "classifier_url", None),
        oracle_path=oracle,
        bind=getattr(args, "bind", None),
    )


def _emit(payload) -> None:
    print(payloads.dumps(payload))


def _failed_status(summary: FunnelSummary) -> int:
    if summary.failed:
        print(f"{summary.failed} tweet(s) failed", file=sys.stderr)
        return 2
    return 0


def cmd_build_index(args, cfg: AppConfig) -> None:
    if not cfg.gazetteer_path:
        raise UsageError("build-index needs --gazetteer")
    cfg.snapshot_path = None
    cfg.validate()
    errors = []
    index = build_index(load_gazetteer(cfg.gazetteer_path, errors))
    index.save(args.out)
    print(f"indexed {len(index)} entries ({len(errors)} lines skipped) -> {args.out}")


def cmd_search(args, cfg):
    if args.limit < 1:
        raise UsageError("--limit must be >= 1")
    cfg.validate()
    _emit(payloads.search_payload(cfg.index(), args.query, args.limit))


def cmd_reverse(args, cfg):
    if not (-180 <= args.lon <= 180 and -90 <= args.lat <= 90):
        raise UsageError("coordinates out of range")
    cfg.validate()
    _emit(payloads.reverse_payload(cfg.index(), args.lon, args.lat))


def cmd_geotag(args, cfg):
    cfg.validate()
    deps = cfg.deps()
    summary = FunnelSummary()
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for result in geotag_corpus(deps, read_corpus(args.corpus), summary):
            out.write(payloads.dumps(result.to_dict()) + "\n")
    finally:
        if args.out:
            out.close()
    print(summary.format(), file=sys.stderr)
    return _failed_status(summary)


def cmd_compare_lem(args, cfg):
    cfg.validate()
    index = cfg.index()
    corpus = list(read_corpus(args.corpus))
    if not corpus:
        raise UsageError("corpus is empty")
    text_by_id = {t.id: t.text for t in corpus}
    extractors = [] if args.no_baseline else [cfg.build_extractor(index)]
    for item in args.mentions:
        name, sep, path = item.partition("=")
        if not sep:
            raise UsageError(f"--mentions expects NAME=PATH, got {item!r}")
        mentions = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    text = rec.get("text") or text_by_id.get(rec.get("id"))
                    if text is not None:
                        mentions[text] = rec.get("mentions", [])
        extractors.append(StaticExtractor(mentions, name=name))
    if not extractors:
        raise UsageError("no extractors to compare")
    print(format_lem_report(compare_lem_candidates(extractors, corpus, index)))


def cmd_evaluate(args, cfg):
    cfg.validate()
    deps = cfg.deps()
    corpus = list(read_corpus(args.corpus))
    summary = FunnelSummary()
    results = list(geotag_corpus(deps, corpus, summary))
    geotagged = {r.tweet_id for r in results if r.disposition is Disposition.GEOTAGGED}
    truths = ground_truths(deps.index, (t for t in corpus if t.id in geotagged), deps.countries)
    scored = [r for r in results if r.tweet_id in truths]
    acc = evaluate(scored, truths, deps.countries)
    print(summary.format())
    print(f"{'Evaluation set':<40}  {len(scored):>8,}")
    print()
    print(acc.format())
    if args.csv:
        write_records_csv(acc.records(), args.csv)
    if args.jsonl:
        write_records_jsonl(acc.records(), args.jsonl)
    return _failed_status(summary)


def cmd_analyze(args, cfg):
    cfg.validate()
    index = cfg.index()
    classifier = cfg.build_classifier()
    corpus = list(read_corpus(args.corpus))
    prepared = [preprocess_tweet(t.text, t.id) for t in corpus]
    try:
        labels = classify_batch(classifier, prepared, cfg.batch_size)
        pairs = list(zip(corpus, labels))
    except PartialBatchError as exc:
        log.warning("%s", exc)
        pairs = [(t, lab) for t, lab in zip(corpus, exc.labels) if lab is not None]
        status = 2
    else:
        status = 0
    report = distributions(pairs, args.dimension, cfg.band_edges, index)
    print(report.format())
    if args.csv:
        write_records_csv(report.records(), args.csv)
    if args.jsonl:
        write_records_jsonl(report.records(), args.jsonl)
    return status


def _read_labels(path) -> list[str]:
    return [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line.strip()]


def cmd_kappa(args, cfg=None):
    a, b = _read_labels(args.a), _read_labels(args.b)
    if len(a) != len(b) or not a:
        raise UsageError(f"label files must be non-empty and equal length ({len(a)} vs {len(b)})")
    print(cohen_kappa(a, b))


def cmd_serve(args, cfg):
    from .service import serve
    serve(cfg)


COMMANDS = {
    "build-index": cmd_build_index, "search": cmd_search, "reverse": cmd_reverse,
    "geotag": cmd_geotag, "compare-lem": cmd_compare_lem, "evaluate": cmd_evaluate,
    "analyze": cmd_analyze, "kappa": cmd_kappa, "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = None if args.command == "kappa" else _config(args)
        status = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"trueorigin {args.command}: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, GazetteerError, NoCoverageError, PluginError, OSError, ValueError) as exc:
        print(f"trueorigin {args.command}: {exc}", file=sys.stderr)
        return 2
    return status or 0


if __name__ == "__main__":
    sys.exit(main())

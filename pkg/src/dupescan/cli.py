"""``dupescan`` command line.

Exit codes: 0 success, 1 validation error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import PipelineConfig
from .corpus import ValidationError, ingest_file
from .journeys import export_journeys, journeys_to_jsonl, recommend_transfers
from .lsh import ConfigurationError, pairs_to_csv, pairs_to_jsonl
from .dedup import flags_to_jsonl
from .pipeline import StageError, analyze, detect, effective_threads, run_pipeline, screen, shingle_records
from .snapshot import SnapshotError, load_snapshot_with_config, save_snapshot
from .synth import InfeasibleSpecError, SynthSpec, generate_synthetic

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2

_CONFIG_FLAGS = {
    "shingle_k": "k",
    "num_hashes": "num_hashes",
    "bands": "bands",
    "rows": "rows",
    "threshold": "threshold",
    "seed": "seed",
    "analysis_date": "analysis_date",
    "min_support": "min_support",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline configuration (overrides $DUPESCAN_CONFIG)")
    g.add_argument("--shingle-k", type=int, help="words per shingle (default 3)")
    g.add_argument("--num-hashes", type=int, help="MinHash signature length (default 128)")
    g.add_argument("--bands", type=int, help="LSH bands (default 16)")
    g.add_argument("--rows", type=int, help="rows per band (default 8)")
    g.add_argument("--threshold", type=float, help="Jaccard threshold, inclusive (default 0.8)")
    g.add_argument("--seed", type=int, help="seed for shingle hashing and the hash family")
    g.add_argument("--analysis-date", help="YYYY-MM-DD closing pending intervals (default: latest date)")
    g.add_argument("--min-support", type=int, help="minimum transfers per recommended destination")
    g.add_argument("--withdrawn-as-rejection", action="store_true", default=None,
                   help="count withdrawals as rejections when labelling resubmissions")
    g.add_argument("--threads", type=int, default=1, help="worker threads (output is unaffected)")


def _config(args) -> PipelineConfig:
    overrides = {field: getattr(args, flag) for flag, field in _CONFIG_FLAGS.items()}
    overrides["withdrawn_as_rejection"] = args.withdrawn_as_rejection
    return PipelineConfig.load(overrides)


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args):
    return ingest_file(args.input, skip_duplicate_ids=args.skip_duplicate_ids)


def _detect_and_analyze(args):
    config = _config(args)
    corpus = _load(args)
    det = detect(corpus, config, effective_threads(args.threads))
    return config, corpus, det, analyze(corpus, det.pairs, config)


def cmd_ingest(args) -> int:
    config = _config(args)
    corpus = _load(args)
    print(f"{len(corpus)} records loaded, {len(corpus.rejected)} line(s) rejected")
    for err in corpus.rejected:
        print(f"  {err}", file=sys.stderr)
    if args.snapshot:
        det = detect(corpus, config, effective_threads(args.threads))
        save_snapshot(args.snapshot, corpus, det.index, config.to_dict())
        print(f"snapshot written to {args.snapshot}")
    return EXIT_VALIDATION if corpus.rejected else EXIT_OK


def cmd_run(args) -> int:
    config = _config(args)
    res = run_pipeline(config, args.input, args.out_dir, effective_threads(args.threads),
                       skip_duplicate_ids=args.skip_duplicate_ids)
    sys.stdout.write(res.analysis.stats.to_table())
    print(f"outputs written to {args.out_dir}")
    return EXIT_OK


def cmd_query(args) -> int:
    corpus, index, stored = load_snapshot_with_config(args.snapshot)
    config = PipelineConfig.from_mapping(stored) if stored else _config(args)
    probes = ingest_file(args.probes)
    indexed, _ = shingle_records([corpus[m] for m in index.ids], config)
    hits = screen(index, indexed, probes.records, config)
    lines = []
    for probe_id, pairs in hits.items():
        for p in pairs:
            d = p.to_dict()
            d["probe"] = probe_id
            lines.append(json.dumps(d, sort_keys=True) + "\n")
    _emit("".join(lines), args.output)
    return EXIT_OK


def cmd_pairs(args) -> int:
    config = _config(args)
    det = detect(_load(args), config, effective_threads(args.threads))
    text = pairs_to_csv(det.pairs) if args.format == "csv" else pairs_to_jsonl(det.pairs)
    _emit(text, args.output)
    return EXIT_OK


def cmd_simultaneous(args) -> int:
    *_, ana = _detect_and_analyze(args)
    _emit(flags_to_jsonl(ana.simultaneous), args.output)
    return EXIT_OK


def cmd_published(args) -> int:
    *_, ana = _detect_and_analyze(args)
    _emit(flags_to_jsonl(ana.published_duplicates), args.output)
    return EXIT_OK


def cmd_journeys(args) -> int:
    *_, ana = _detect_and_analyze(args)
    text = export_journeys(ana.journeys) if args.format == "dot" else journeys_to_jsonl(ana.journeys)
    _emit(text, args.output)
    return EXIT_OK


def cmd_recommend(args) -> int:
    config, *_, ana = _detect_and_analyze(args)
    rec = recommend_transfers(ana.journeys, args.from_journal, config.min_support)
    _emit(json.dumps(rec.to_dict(), indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def cmd_stats(args) -> int:
    *_, ana = _detect_and_analyze(args)
    text = ana.stats.to_json() if args.format == "json" else ana.stats.to_table()
    _emit(text, args.output)
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SynthSpec(
        size=args.size,
        near_duplicate_rate=args.near_duplicate_rate,
        simultaneous_rate=args.simultaneous_rate,
        bad_transfer_rate=args.bad_transfer_rate,
        published_duplicates=args.published_duplicates,
        replace_fraction=args.replace_fraction,
        delete_fraction=args.delete_fraction,
        journals=args.journals,
        seed=args.seed if args.seed is not None else 0,
        threshold=args.threshold if args.threshold is not None else 0.8,
        k=args.shingle_k if args.shingle_k is not None else 3,
    )
    sc = generate_synthetic(spec)
    sc.write(args.out, args.truth)
    print(f"{len(sc.records)} records -> {args.out}; ground truth -> {args.truth}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dupescan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def corpus_cmd(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("input", help="JSONL manuscript records")
        p.add_argument("--skip-duplicate-ids", action="store_true",
                       help="skip repeated ids instead of failing")
        _add_config_flags(p)
        p.set_defaults(func=func)
        return p

    p = corpus_cmd("ingest", cmd_ingest, "validate a JSONL corpus")
    p.add_argument("--snapshot", help="also build the index and save a snapshot here")

    p = corpus_cmd("run", cmd_run, "full pipeline into an output directory")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("query", help="screen probe records against a snapshot")
    p.add_argument("probes", help="JSONL probe records")
    p.add_argument("--snapshot", required=True)
    p.add_argument("-o", "--output")
    _add_config_flags(p)
    p.set_defaults(func=cmd_query)

    p = corpus_cmd("pairs", cmd_pairs, "verified near-duplicate pairs")
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.add_argument("-o", "--output")

    for name, func, help_ in [("simultaneous", cmd_simultaneous, "simultaneous-submission flags"),
                              ("published-dups", cmd_published, "duplicate published pairs")]:
        p = corpus_cmd(name, func, help_)
        p.add_argument("-o", "--output")

    p = corpus_cmd("journeys", cmd_journeys, "manuscript journeys")
    p.add_argument("--format", choices=["jsonl", "dot"], default="jsonl")
    p.add_argument("-o", "--output")

    p = corpus_cmd("recommend", cmd_recommend, "rank transfer destinations")
    p.add_argument("--from-journal", required=True)
    p.add_argument("-o", "--output")

    p = corpus_cmd("stats", cmd_stats, "corpus statistics")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument("-o", "--output")

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--size", type=int, default=1000)
    p.add_argument("--near-duplicate-rate", type=float, default=0.0)
    p.add_argument("--simultaneous-rate", type=float, default=0.0)
    p.add_argument("--bad-transfer-rate", type=float, default=0.0)
    p.add_argument("--published-duplicates", type=int, default=0)
    p.add_argument("--replace-fraction", type=float, default=0.005)
    p.add_argument("--delete-fraction", type=float, default=0.0)
    p.add_argument("--journals", type=int, default=200)
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--shingle-k", type=int)
    p.add_argument("--out", required=True, help="corpus JSONL path")
    p.add_argument("--truth", required=True, help="ground-truth JSON path")
    p.set_defaults(func=cmd_synth)
    return parser


def _exit_code(exc: BaseException) -> Optional[int]:
    if isinstance(exc, StageError):
        exc = exc.original
    if isinstance(exc, (ConfigurationError, InfeasibleSpecError)):
        return EXIT_CONFIG
    if isinstance(exc, (ValidationError, SnapshotError, FileNotFoundError)):
        return EXIT_VALIDATION
    return None


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        code = _exit_code(exc)
        if code is None:
            raise
        print(f"dupescan: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())

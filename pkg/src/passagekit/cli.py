"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 external-service failure. Every command is deterministic for fixed
inputs and flags, independent of --threads.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bm25, dense, io as pkio, pipelines
from .errors import DataError, ExternalServiceError, UsageError
from .evaluation import evaluate
from .scoring import parse_scorer_spec
from .text import Lexicon, analyze
from .types import PairDataset, dataset_stats


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; our contract is 1
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker parallelism cap (results are independent of this)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="passagekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("index", help="build a BM25 index directory from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="index directory to create")
    p.add_argument("--lemmas", help="lemma dictionary TSV (surface<TAB>lemma)")
    p.add_argument("--analyzed", choices=("surface", "lemma"), default="surface")
    p.add_argument("--k1", type=float, default=bm25.DEFAULT_K1)
    p.add_argument("--b", type=float, default=bm25.DEFAULT_B)
    p.add_argument("--use-title", action="store_true", help="index title + text, not text alone")
    _add_common(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="top-k retrieval (BM25 index or dense embeddings)")
    p.add_argument("--index", help="BM25 index directory")
    p.add_argument("--embeddings", help="passage vector file (dense mode)")
    p.add_argument("--ids", help="passage id file (dense mode)")
    p.add_argument("--queries", required=True, help="question JSONL, or query vector file in dense mode")
    p.add_argument("--query-ids", help="query id file (dense mode)")
    p.add_argument("--normalize", action="store_true", help="L2-normalize vectors at load")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--format", choices=("jsonl", "trec"), default="jsonl")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("match", help="match questions to passages: BM25 -> rerank -> verify")
    p.add_argument("--questions", required=True, help="question JSONL ({id, text})")
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--scorer", required=True, help="overlap | file:PATH | remote:URL")
    p.add_argument("--verifier", required=True, help="overlap | file:PATH | remote:URL")
    p.add_argument("--bm25-top", type=int, default=None)
    p.add_argument("--rerank-top", type=int, default=None)
    p.add_argument("--verify-threshold", type=float, default=None)
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--use-title", action="store_true")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("mine", help="mine hard negatives from BM25 candidates")
    p.add_argument("--pairs", required=True)
    p.add_argument("--corpus", required=True, help="negative-source corpus JSONL")
    p.add_argument("--index", required=True, help="BM25 index over that corpus")
    p.add_argument("--scorer", required=True)
    p.add_argument("--bm25-top", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None, help="scores >= this stay relevant")
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--use-title", action="store_true")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("denoise", help="filter noisy pairs through the cascade")
    p.add_argument("--pairs", required=True)
    p.add_argument("--scorer", required=True)
    p.add_argument("--config", help="pipeline config JSON with a 'denoise' section")
    p.add_argument("--lemmas", help="lemma dictionary TSV for the overlap filter")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--report", help="write rejection report JSON here")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("convert-nli", help="convert NLI records to labeled pairs")
    p.add_argument("--in", dest="input", required=True, help="NLI JSONL (premise/hypothesis/label)")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_convert_nli)

    p = sub.add_parser("eval", help="Accuracy@k and NDCG@k of a run against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--run-format", choices=("jsonl", "trec"), default=None)
    p.add_argument("--qrels", required=True, help="TREC qrels or pairs JSONL")
    p.add_argument("--qrels-format", choices=("jsonl", "trec_qrels"), default=None)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", help="write report JSON here")
    p.add_argument("--per-question", help="write per-question breakdown JSONL here")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="dataset statistics row (questions / passages)")
    p.add_argument("--pairs", required=True, nargs="+")
    p.add_argument("--format", choices=("jsonl", "trec_qrels"), default="jsonl")
    p.add_argument("--questions", help="question JSONL counted toward the total")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export-train", help="write trainer-ready records (one per question)")
    p.add_argument("--pairs", required=True)
    p.add_argument("--format", choices=("dpr_jsonl",), default="dpr_jsonl")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_export_train)

    return parser


def _require_k(k: int) -> None:
    if k < 1:
        raise UsageError(f"--k must be >= 1, got {k}")


def _load_lexicon(path: str | None) -> Lexicon:
    return Lexicon.load(path) if path else Lexicon.empty()


def _config_section(path: str | None, section: str) -> tuple[dict, Path | None]:
    if not path:
        return {}, None
    config = pkio.load_config(path)
    raw = config.get(section, {})
    if not isinstance(raw, dict):
        raise DataError(f"{path}: section {section!r} must be an object")
    return raw, Path(path).parent


def cmd_index(args) -> int:
    corpus = pkio.load_corpus(args.corpus, use_title=args.use_title)
    lexicon = _load_lexicon(args.lemmas)
    index = bm25.build_index(corpus, lexicon, analyzed=args.analyzed, k1=args.k1, b=args.b)
    bm25.save_index(index, args.out)
    print(f"indexed {index.N} passages ({args.analyzed}) -> {args.out}")
    return 0


def cmd_search(args) -> int:
    _require_k(args.k)
    run_format = "trec_run" if args.format == "trec" else "jsonl"
    if args.index and args.embeddings:
        raise UsageError("pass either --index or --embeddings, not both")
    if args.index:
        index = bm25.load_index(args.index)
        lexicon = index.lexicon()
        questions = pkio.load_questions(args.queries)

        def one(question):
            tokens = analyze(question.text, lexicon, mode=index.analyzed)
            return bm25.search(index, tokens, args.k, query_id=question.id)

        runs = pipelines._map_ordered(one, questions, args.threads)
    elif args.embeddings:
        if not args.ids or not args.query_ids:
            raise UsageError("dense search needs --ids and --query-ids")
        matrix = dense.load_embeddings(args.embeddings, args.ids, normalize=args.normalize)
        queries = dense.load_embeddings(args.queries, args.query_ids, normalize=args.normalize)
        runs = dense.dense_search_batch(matrix, queries, args.k, threads=args.threads)
    else:
        raise UsageError("pass --index DIR or --embeddings VEC --ids IDS")
    pkio.write_run(runs, args.out, format=run_format)
    print(f"wrote {len(runs)} runs -> {args.out}")
    return 0


def cmd_match(args) -> int:
    raw, _ = _config_section(args.config, "match")
    if args.bm25_top is not None:
        raw["bm25_top"] = args.bm25_top
    if args.rerank_top is not None:
        raw["rerank_top"] = args.rerank_top
    if args.verify_threshold is not None:
        raw["verify_threshold"] = args.verify_threshold
    cfg = pipelines.MatchConfig.from_dict(raw)

    corpus = pkio.load_corpus(args.corpus, use_title=args.use_title)
    index = bm25.load_index(args.index)
    questions = pkio.load_questions(args.questions)
    scorer = parse_scorer_spec(args.scorer, batch_size=args.batch_size)
    verifier = parse_scorer_spec(args.verifier, batch_size=args.batch_size)
    pairs = pipelines.match_questions(
        questions, corpus, index, scorer, verifier, cfg, threads=args.threads
    )
    dataset = PairDataset(
        pairs=pairs,
        questions={q.id: q for q in questions},
        passages={p.id: p for p in corpus},
    )
    pkio.write_pairs(dataset, args.out)
    n_pos = sum(1 for p in pairs if p.relevance.to_bool())
    print(f"matched {len(pairs)} pairs ({n_pos} positive) -> {args.out}")
    return 0


def cmd_mine(args) -> int:
    raw, _ = _config_section(args.config, "mine")
    if args.bm25_top is not None:
        raw["bm25_top"] = args.bm25_top
    if args.threshold is not None:
        raw["negative_threshold"] = args.threshold
    cfg = pipelines.MineConfig.from_dict(raw)

    dataset = pkio.load_pairs(args.pairs)
    corpus = pkio.load_corpus(args.corpus, use_title=args.use_title)
    index = bm25.load_index(args.index)
    scorer = parse_scorer_spec(args.scorer, batch_size=args.batch_size)
    negatives = pipelines.mine_hard_negatives(
        dataset, corpus, index, scorer, cfg, threads=args.threads
    )
    out = PairDataset(
        pairs=negatives,
        questions=dataset.questions,
        passages={p.id: p for p in corpus},
    )
    pkio.write_pairs(out, args.out)
    print(f"mined {len(negatives)} hard negatives -> {args.out}")
    return 0


def cmd_denoise(args) -> int:
    raw, base = _config_section(args.config, "denoise")
    cfg = pipelines.DenoiseConfig.from_dict(raw, base_dir=base)
    dataset = pkio.load_pairs(args.pairs)
    scorer = parse_scorer_spec(args.scorer, batch_size=args.batch_size)
    lexicon = _load_lexicon(args.lemmas)
    kept, report = pipelines.denoise(dataset, scorer, cfg, lexicon=lexicon)
    out = PairDataset(pairs=kept, questions=dataset.questions, passages=dataset.passages)
    pkio.write_pairs(out, args.out)
    if args.report:
        import json

        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(report.format_summary())
    return 0


def cmd_convert_nli(args) -> int:
    records = pkio.load_nli_records(args.input)
    dataset = pipelines.convert_nli(records)
    pkio.write_pairs(dataset, args.out)
    print(f"converted {len(records)} NLI records -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    _require_k(args.k)
    run_format = args.run_format
    if run_format is None:
        run_format = "jsonl" if str(args.run).endswith(".jsonl") else "trec"
    runs = pkio.load_run(args.run, format="trec_run" if run_format == "trec" else "jsonl")
    qrels = pkio.load_qrels(args.qrels, format=args.qrels_format)
    report = evaluate(runs, qrels, k=args.k)
    print(report.format_table(label=Path(args.run).name))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    if args.per_question:
        with open(args.per_question, "w", encoding="utf-8") as fh:
            fh.write(report.per_question_jsonl())
    return 0


def cmd_stats(args) -> int:
    dataset = PairDataset()
    for path in args.pairs:
        dataset = dataset.merge(pkio.load_pairs(path, format=args.format))
    if args.questions:
        for q in pkio.load_questions(args.questions):
            dataset.questions.setdefault(q.id, q)
    stats = dataset_stats(dataset)
    header = (
        f"{'# Questions':>37}  {'# Passages':>27}\n"
        f"{'Positive':>12} {'Negative':>12} {'Total':>11}  "
        f"{'Positive':>8} {'Negative':>9} {'Total':>8}"
    )
    row = (
        f"{stats.questions_with_positive:>12,} {stats.questions_with_negative:>12,} "
        f"{stats.questions_total:>11,}  {stats.passages_positive:>8,} "
        f"{stats.passages_negative:>9,} {stats.passages_total:>8,}"
    )
    print(header)
    print(row)
    return 0


def cmd_export_train(args) -> int:
    dataset = pkio.load_pairs(args.pairs)
    written = pipelines.export_training(dataset, args.out, format=args.format)
    print(f"wrote {written} training records -> {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help(sys.stderr)
            return 1
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ExternalServiceError as exc:
        print(f"external service error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

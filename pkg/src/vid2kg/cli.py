"""Command-line interface.

Subcommands chain the pipeline pieces: parse captions, link senses,
build the dataset, train and run the model, materialize inference, and
score or query the results.  Exit codes: 0 success, 1 usage error,
2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from vid2kg.atoms import DatasetRecord, KnowledgeGraph
from vid2kg.dataset import (
    BuildConfig,
    assemble_dataset,
    compute_stats,
    read_vocabulary,
    stats_table,
    stats_to_obj,
    write_vocabulary,
)
from vid2kg.embeddings import load_embeddings
from vid2kg.errors import DataError, Vid2kgError
from vid2kg.extract import parse_caption_file, read_fragments, write_fragments
from vid2kg.kgio import read_dataset, read_kg_store, write_dataset, write_kg_store
from vid2kg.linking import link_atoms
from vid2kg.metrics import (
    AGGREGATION_MODES,
    evaluate_corpus,
    evaluate_example,
    report_json,
    report_table,
)
from vid2kg.model import (
    ModelConfig,
    load_features,
    predict_kg,
    read_params,
    resolve_encoding,
    train,
    write_params,
)
from vid2kg.ontology import closure, load_ontology
from vid2kg.pipeline import load_pipeline_config, run_pipeline
from vid2kg.query import parse_pattern, query_store


class UsageError(Exception):
    """Bad command line; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the contract reserves 2
    # for data errors, so raise and let main() translate
    def error(self, message):
        raise UsageError(message)


def _add_common(sub):
    sub.add_argument(
        "--seed",
        type=int,
        default=None,
        help="rng seed for the seeded stages (required by build and train)",
    )
    sub.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="parallel workers where supported; output is identical for any value",
    )


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"{args.command} requires --seed")
    if args.seed < 0:
        raise UsageError("--seed must be non-negative")
    return args.seed


def build_parser() -> _Parser:
    parser = _Parser(prog="vid2kg", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("parse", help="extract caption atoms from CoNLL-U")
    p.add_argument("--conllu", required=True)
    p.add_argument("--video-map", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("repaired", "faithful"), default="repaired")
    _add_common(p)

    p = commands.add_parser("link", help="attach ontology senses to atoms")
    p.add_argument("--fragments", required=True)
    p.add_argument("--ontology", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = commands.add_parser("build", help="merge captions into a training dataset")
    p.add_argument("--fragments", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--vocab-out", required=True)
    p.add_argument("--min-count", type=int, default=50)
    p.add_argument("--negatives-per-fact", type=int, default=1)
    _add_common(p)

    p = commands.add_parser("stats", help="dataset summary table")
    p.add_argument("--dataset", required=True)
    p.add_argument("--json-out", default=None)
    _add_common(p)

    p = commands.add_parser("train", help="fit the fact-prediction model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--trace-out", default=None)
    p.add_argument("--encoding-dim", type=int, default=None,
                   help="defaults to the feature file's dimension")
    p.add_argument("--individual-dim", type=int, default=300)
    p.add_argument("--classifier-hidden", type=int, default=64)
    p.add_argument("--predicate-hidden", type=int, default=64)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--learning-rate", type=float, default=0.001)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--no-reflexive-pairs", action="store_true")
    _add_common(p)

    p = commands.add_parser("predict", help="predict per-video knowledge graphs")
    p.add_argument("--params", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dataset", default=None,
                   help="restrict to this dataset's videos (default: all features)")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--no-reflexive-pairs", action="store_true")
    _add_common(p)

    p = commands.add_parser("infer", help="materialize ontology closure")
    p.add_argument("--kgs", required=True)
    p.add_argument("--ontology", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = commands.add_parser("eval", help="score predictions against a dataset")
    p.add_argument("--predicted", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--mode", choices=AGGREGATION_MODES, default="micro")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--json-out", default=None)
    _add_common(p)

    p = commands.add_parser("query", help="match a fact pattern against a store")
    p.add_argument("pattern", help="e.g. 'change(male,?x)'")
    p.add_argument("--kgs", required=True)
    p.add_argument("--with-closure", action="store_true")
    p.add_argument("--ontology", default=None)
    _add_common(p)

    p = commands.add_parser("pipeline", help="run every stage from one config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None,
                   help="overrides the config's out_dir")
    _add_common(p)

    return parser


def cmd_parse(args) -> int:
    extractions = parse_caption_file(args.conllu, args.video_map, mode=args.mode)
    write_fragments(args.out, extractions)
    print(f"wrote {len(extractions)} caption entries to {args.out}")
    return 0


def cmd_link(args) -> int:
    ont = load_ontology(args.ontology)
    emb = load_embeddings(args.embeddings)
    linked = link_atoms(read_fragments(args.fragments), ont, emb)
    write_fragments(args.out, linked)
    print(f"wrote {len(linked)} linked entries to {args.out}")
    return 0


def cmd_build(args) -> int:
    seed = _need_seed(args)
    entries = [(e.video_id, e.atoms) for e in read_fragments(args.fragments)]
    cfg = BuildConfig(
        rng_seed=seed,
        min_count=args.min_count,
        negatives_per_fact=args.negatives_per_fact,
    )
    kgs, vocab = assemble_dataset(entries, cfg)
    write_dataset([DatasetRecord.from_graph(kg) for kg in kgs], args.out)
    write_vocabulary(vocab, args.vocab_out)
    print(f"wrote {len(kgs)} videos to {args.out}")
    return 0


def cmd_stats(args) -> int:
    records = read_dataset(args.dataset)
    stats = compute_stats([r.graph() for r in records])
    print(stats_table(stats))
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(stats_to_obj(stats), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_train(args) -> int:
    seed = _need_seed(args)
    records = read_dataset(args.dataset)
    vocab = read_vocabulary(args.vocab)
    features = load_features(args.features)
    emb = load_embeddings(args.embeddings) if args.embeddings else None
    encoding_dim = args.encoding_dim if args.encoding_dim else features.dim
    try:
        cfg = ModelConfig(
            rng_seed=seed,
            encoding_dim=encoding_dim,
            individual_dim=args.individual_dim,
            classifier_hidden=args.classifier_hidden,
            predicate_hidden=args.predicate_hidden,
            threshold=args.threshold,
            learning_rate=args.learning_rate,
            epochs=args.epochs,
            optimizer=args.optimizer,
            reflexive_pairs=not args.no_reflexive_pairs,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = train(records, features, cfg, vocab, emb=emb)
    write_params(result.params, args.out)
    if args.trace_out:
        trace = {
            "loss": result.loss_trace,
            "classifier": result.classifier_trace,
            "facts": result.facts_trace,
        }
        with open(args.trace_out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(trace, fh, indent=2, sort_keys=True)
            fh.write("\n")
    final = result.loss_trace[-1] if result.loss_trace else float("nan")
    print(f"trained {cfg.epochs} epochs, final mean loss {final:.6f}")
    return 0


def _inference_config(params, args, seed) -> ModelConfig:
    return ModelConfig(
        rng_seed=seed,
        encoding_dim=params.encoding_dim,
        individual_dim=max(params.individual_dim, 1),
        classifier_hidden=params.classifier.n_hidden,
        predicate_hidden=params.classifier.n_hidden,
        threshold=args.threshold,
        reflexive_pairs=not args.no_reflexive_pairs,
    )


def cmd_predict(args) -> int:
    params = read_params(args.params)
    features = load_features(args.features)
    cfg = _inference_config(params, args, args.seed if args.seed else 0)
    if args.dataset:
        targets = [
            (r.video_id, r.feature) for r in read_dataset(args.dataset)
        ]
    else:
        targets = [(vid, None) for vid in features.video_ids()]

    def predict_one(target):
        video_id, fallback = target
        e, _ = resolve_encoding(video_id, features, params, fallback)
        return predict_kg(video_id, e, params, cfg)

    jobs = max(args.jobs, 1)
    if jobs > 1:
        # read-only params; map preserves input order, so output is
        # identical to the serial path
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            kgs = list(pool.map(predict_one, targets))
    else:
        kgs = [predict_one(t) for t in targets]
    write_kg_store(kgs, args.out)
    print(f"wrote predictions for {len(kgs)} videos to {args.out}")
    return 0


def cmd_infer(args) -> int:
    ont = load_ontology(args.ontology)
    augmented = []
    for kg in read_kg_store(args.kgs):
        derived = closure(kg.facts, ont)
        augmented.append(
            KnowledgeGraph.build(
                kg.video_id,
                facts=kg.facts | derived,
                individuals=kg.individuals,
            )
        )
    write_kg_store(augmented, args.out)
    print(f"wrote {len(augmented)} closure-augmented graphs to {args.out}")
    return 0


def cmd_eval(args) -> int:
    truth = {r.video_id: r for r in read_dataset(args.truth)}
    predicted = {kg.video_id: kg for kg in read_kg_store(args.predicted)}
    unknown = sorted(set(predicted) - set(truth))
    if unknown:
        raise DataError(
            f"predictions for videos missing from the truth set: "
            f"{', '.join(unknown[:5])}"
        )
    results = []
    for vid in sorted(truth):
        pred = predicted.get(vid)
        facts = pred.facts if pred is not None else frozenset()
        record = truth[vid]
        results.append(
            evaluate_example(
                facts, record.facts, record.negated_facts, strict=args.strict
            )
        )
    summary = evaluate_corpus(results, args.mode)
    print(report_table(summary))
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report_json(summary))
    return 0


def cmd_query(args) -> int:
    if args.with_closure and not args.ontology:
        raise UsageError("--with-closure requires --ontology")
    pattern = parse_pattern(args.pattern)
    ont = load_ontology(args.ontology) if args.ontology else None
    kgs = read_kg_store(args.kgs)
    rows = query_store(kgs, pattern, ont, with_closure=args.with_closure)
    for video_id, bindings in rows:
        if bindings:
            pairs = " ".join(f"{k}={v}" for k, v in sorted(bindings.items()))
            print(f"{video_id}\t{pairs}")
        else:
            print(video_id)
    return 0


def cmd_pipeline(args) -> int:
    cfg = load_pipeline_config(args.config, out_dir=args.out_dir)
    run_pipeline(cfg, progress=print)
    return 0


_COMMANDS = {
    "parse": cmd_parse,
    "link": cmd_link,
    "build": cmd_build,
    "stats": cmd_stats,
    "train": cmd_train,
    "predict": cmd_predict,
    "infer": cmd_infer,
    "eval": cmd_eval,
    "query": cmd_query,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be at least 1")
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 2
    except Vid2kgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return int(code) if code else 0
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

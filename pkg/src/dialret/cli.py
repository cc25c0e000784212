"""Command line interface.

Exit codes: 0 success, 2 configuration errors (also argparse usage errors),
3 data errors, 4 numeric failures. Error messages are a single line on
stderr prefixed E_CONFIG / E_DATA / E_NUMERIC.

The pipeline output directory resolves as: --output-dir flag, then the
DIALRET_OUTPUT_DIR environment variable, then "output_dir" in the config
file, then ./dialret-out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .corpus import Dataset, Split, corpus_stats, load_dataset, save_dataset
from .dense import (
    ToyEncoder,
    corpus_vocabulary,
    dense_search,
    encode_contexts,
    encode_corpus,
    load_encoder,
    save_embeddings,
    save_encoder,
)
from .errors import ConfigError, DataError, NumericError
from .evaluation import load_qrels, paired_ttest, recall_at_k, save_qrels
from .expansion import ExpansionRecord, apply_expansions, expansion_stats, load_expansions, save_expansions
from .negatives import SamplerSpec, sample_negatives, save_negatives
from .pipeline import load_config, run_pipeline
from .ranking import read_run, write_run
from .rm3 import RM3Params, rm3_search, sweep_grid
from .seeding import derive_seed
from .sparse import Analyzer, BM25Params, bm25_search, build_index
from .synthetic import LexicalSpec, lexical_dataset, plant_duplicates
from .trainer import TrainConfig, build_rerank_sets, train


def _ks(value: str) -> list[int]:
    try:
        ks = [int(v) for v in value.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cutoff list {value!r}") from None
    if not ks or any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError(f"cutoffs must be positive: {value!r}")
    return ks


def _floats(value: str) -> list[float]:
    try:
        return [float(v) for v in value.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list {value!r}") from None


def _ints(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad int list {value!r}") from None


def _split_queries(dataset, split_name: str, analyzer: Analyzer):
    split = dataset.split(split_name)
    return {ctx.id: analyzer(ctx.text()) for ctx in split.contexts}


def cmd_ingest(args) -> int:
    dataset = load_dataset(args.data)
    save_dataset(dataset, args.out)
    if args.qrels_dir:
        qdir = Path(args.qrels_dir)
        qdir.mkdir(parents=True, exist_ok=True)
        for name, split in sorted(dataset.splits.items()):
            qrels = {cid: {rid} for cid, rid in split.positives().items()}
            save_qrels(qrels, str(qdir / f"qrels-{name}.txt"))
    for name, split in sorted(dataset.splits.items()):
        print(f"{name}: {len(split.contexts)} contexts, {len(split.pairs)} pairs")
    print(f"collection: {len(dataset.corpus)} responses")
    return 0


def cmd_stats(args) -> int:
    dataset = load_dataset(args.data)
    stats = corpus_stats(dataset)
    print("split  contexts  responses  avg_ctx_words  avg_resp_words")
    for name, s in stats.items():
        print(
            f"{name:<6} {s.num_contexts:>8}  {s.num_responses:>9}  "
            f"{s.avg_context_words:>13.4f}  {s.avg_response_words:>14.4f}"
        )
    if args.expanded:
        expanded = load_dataset(args.expanded)
        es = expansion_stats(dataset.corpus, expanded.corpus)
        print(
            f"expansion: {es.num_expanded} responses, "
            f"avg appended words {es.avg_appended_words:.4f}, "
            f"new words {es.pct_new_words:.4f}%"
        )
    return 0


def cmd_search(args) -> int:
    dataset = load_dataset(args.data)
    analyzer = Analyzer()
    corpus = dataset.corpus
    tag = args.tag or "bm25"
    if args.expansions:
        records = load_expansions(args.expansions)
        corpus = apply_expansions(corpus, records, args.num_predictions)
        tag = args.tag or "bm25-expanded"
    index = build_index(corpus, analyzer)
    queries = _split_queries(dataset, args.split, analyzer)
    params = BM25Params(k1=args.k1, b=args.b)
    results = []
    if args.rm3:
        rm3 = RM3Params(fb_docs=args.fb_docs, fb_terms=args.fb_terms,
                        orig_weight=args.orig_weight)
        tag = args.tag or "bm25-rm3"
        for qid in sorted(queries):
            results.append(rm3_search(index, queries[qid], rm3, k=args.k,
                                      bm25=params, query_id=qid))
    else:
        for qid in sorted(queries):
            results.append(bm25_search(index, queries[qid], params, k=args.k,
                                       query_id=qid))
    write_run(args.out, results, tag=tag)
    print(f"wrote {sum(len(r) for r in results)} lines for "
          f"{len(results)} queries to {args.out}")
    return 0


def cmd_rm3_sweep(args) -> int:
    dataset = load_dataset(args.data)
    analyzer = Analyzer()
    index = build_index(dataset.corpus, analyzer)
    queries = _split_queries(dataset, args.split, analyzer)
    split = dataset.split(args.split)
    qrels = {cid: {rid} for cid, rid in split.positives().items()}
    rows = sweep_grid(
        index, queries, qrels,
        fb_docs_grid=args.fb_docs,
        fb_terms_grid=args.fb_terms,
        orig_weight_grid=args.orig_weight,
        ks=tuple(args.ks),
        bm25=BM25Params(k1=args.k1, b=args.b),
    )
    header = ["fb_docs", "fb_terms", "orig_weight"] + [f"recall@{k}" for k in args.ks]
    lines = [",".join(header)]
    for row in rows:
        cells = [str(row["fb_docs"]), str(row["fb_terms"]), f"{row['orig_weight']:.2f}"]
        cells += [f"{row[f'recall@{k}']:.4f}" for k in args.ks]
        lines.append(",".join(cells))
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_expand(args) -> int:
    dataset = load_dataset(args.data)
    records = load_expansions(args.expansions)
    expanded = apply_expansions(dataset.corpus, records, args.num_predictions)
    out_dataset = Dataset(
        splits={
            name: Split(contexts=split.contexts, pairs=split.pairs, corpus=expanded)
            for name, split in dataset.splits.items()
        },
        corpus=expanded,
    )
    save_dataset(out_dataset, args.out)
    stats = expansion_stats(dataset.corpus, expanded)
    print(
        f"expanded {stats.num_expanded} responses; "
        f"avg appended words {stats.avg_appended_words:.4f}; "
        f"new words {stats.pct_new_words:.4f}%"
    )
    return 0


def _encoder_from_args(args, dataset) -> ToyEncoder:
    if args.encoder:
        return load_encoder(args.encoder)
    contexts = [c for name in sorted(dataset.splits) for c in dataset.splits[name].contexts]
    vocab = corpus_vocabulary(dataset.corpus, contexts)
    return ToyEncoder.init_random(vocab, args.dim, seed=derive_seed(args.seed, "encoder-init"),
                                  scale=args.init_scale)


def cmd_embed(args) -> int:
    dataset = load_dataset(args.data)
    encoder = _encoder_from_args(args, dataset)
    if args.what == "responses":
        store = encode_corpus(encoder, dataset.corpus, provenance=args.provenance)
    else:
        contexts = dataset.split(args.split).contexts
        store = encode_contexts(encoder, contexts, provenance=args.provenance)
    save_embeddings(store, args.out)
    print(f"wrote {len(store)} vectors of dim {store.dim} to {args.out}")
    return 0


def cmd_train(args) -> int:
    dataset = load_dataset(args.data)
    train_split = dataset.split("train")
    pairs = [
        (ctx, dataset.corpus.get(train_split.positives()[ctx.id]))
        for ctx in train_split.contexts
    ]
    encoder = _encoder_from_args(args, dataset)
    negmap = None
    if args.negatives:
        from .negatives import load_negatives

        negsets = load_negatives(args.negatives)
        negmap = {
            ns.context_id: [dataset.corpus.get(i) for i in ns.negative_ids]
            for ns in negsets
        }
    rerank = None
    if "valid" in dataset.splits:
        valid = dataset.split("valid")
        rerank = build_rerank_sets(
            [(c, dataset.corpus.get(valid.positives()[c.id])) for c in valid.contexts],
            list(dataset.corpus.docs),
            num_candidates=args.rerank_candidates,
            seed=derive_seed(args.seed, "rerank-candidates"),
        )
    config = TrainConfig(
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        weight_decay=args.weight_decay,
        total_steps=args.steps,
        warmup_fraction=args.warmup,
        eval_every=args.eval_every,
        seed=args.seed,
        loss_variant=args.loss_variant,
    )
    trained, history = train(encoder, pairs, config, negatives=negmap, rerank_sets=rerank)
    save_encoder(trained, args.out, provenance=f"toy-encoder:{args.loss_variant}")
    if args.history:
        lines = ["step,loss"]
        lines += [f"{i + 1},{loss:.6f}" for i, loss in enumerate(history.losses)]
        lines.append("")
        lines.append("eval_step,rerank_map")
        lines += [f"{s},{m:.4f}" for s, m in history.evals]
        Path(args.history).write_text("\n".join(lines) + "\n", encoding="utf-8")
    final_loss = history.losses[-1] if history.losses else float("nan")
    best = f"{history.best_map:.4f} at step {history.best_step}" if history.best_map is not None else "n/a"
    print(f"trained {config.total_steps} steps; final loss {final_loss:.4f}; best MAP {best}")
    print(f"checkpoint: {args.out}")
    return 0


def cmd_sample_negatives(args) -> int:
    dataset = load_dataset(args.data)
    split = dataset.split(args.split)
    positives = split.positives()
    spec = SamplerSpec(kind=args.kind, n=args.n, depth=args.depth,
                       window=args.window, seed=args.seed)
    retriever = None
    if args.kind in ("sparse_top", "dense_top", "denoised"):
        if args.retriever == "sparse":
            analyzer = Analyzer()
            index = build_index(dataset.corpus, analyzer)
            params = BM25Params(k1=args.k1, b=args.b)

            def retriever(ctx, k):
                return bm25_search(index, analyzer(ctx.text()), params, k=k,
                                   query_id=ctx.id)
        else:
            if not args.encoder:
                raise ConfigError("dense retrieval needs --encoder")
            encoder = load_encoder(args.encoder)
            store = encode_corpus(encoder, dataset.corpus)

            def retriever(ctx, k):
                return dense_search(store, encoder.encode_context(ctx), k=k,
                                    query_id=ctx.id)
    negsets = [
        sample_negatives(spec, ctx, positives[ctx.id], dataset.corpus.ids(), retriever)
        for ctx in split.contexts
    ]
    save_negatives(negsets, args.out)
    print(f"wrote {len(negsets)} negative sets ({spec.tag()}) to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    runs = read_run(args.run)
    qrels = load_qrels(args.qrels)
    report = recall_at_k(runs, qrels, args.ks)
    for k in report.ks:
        print(f"recall@{k} {report.means[k]:.4f}")
    if args.out:
        lines = ["metric,value"]
        lines += [f"recall@{k},{report.means[k]:.4f}" for k in report.ks]
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.per_query:
        lines = ["query_id," + ",".join(f"hit@{k}" for k in report.ks)]
        for qid in sorted(qrels):
            lines.append(qid + "," + ",".join(str(report.per_query[k][qid]) for k in report.ks))
        Path(args.per_query).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def cmd_significance(args) -> int:
    runs_a = read_run(args.run_a)
    runs_b = read_run(args.run_b)
    qrels = load_qrels(args.qrels)
    report_a = recall_at_k(runs_a, qrels, [args.k])
    report_b = recall_at_k(runs_b, qrels, [args.k])
    qids = sorted(qrels)
    result = paired_ttest(
        [float(report_a.per_query[args.k][q]) for q in qids],
        [float(report_b.per_query[args.k][q]) for q in qids],
        alpha=args.alpha,
        num_comparisons=args.num_comparisons,
        system_a=args.run_a,
        system_b=args.run_b,
        metric=f"recall@{args.k}",
    )
    print(f"recall@{args.k}: {result.mean_a:.4f} vs {result.mean_b:.4f}")
    print(
        f"t {result.t_statistic:.4f}  p {result.p_value:.6f}  "
        f"adjusted alpha {result.adjusted_alpha:.6f}  "
        f"{'significant' if result.significant else 'not significant'}"
    )
    return 0


def cmd_synth(args) -> int:
    spec = LexicalSpec(
        num_train=args.num_train,
        num_valid=args.num_valid,
        num_test=args.num_test,
        num_distractors=args.num_distractors,
        num_components=args.num_components,
        seed=args.seed,
    )
    dataset = lexical_dataset(spec)
    equivalence = {}
    if args.duplicates > 0:
        dataset, equivalence = plant_duplicates(dataset, per_positive=args.duplicates,
                                                seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, str(out_dir / "dataset.jsonl"))
    # expansion records predict each paired response's context utterances
    records = []
    for name in sorted(dataset.splits):
        split = dataset.splits[name]
        by_ctx = {c.id: c for c in split.contexts}
        for pair in split.pairs:
            ctx = by_ctx[pair.context_id]
            records.append(
                ExpansionRecord(
                    response_id=pair.response_id,
                    predictions=tuple(u.text for u in ctx.utterances),
                    generator="synthetic-context",
                )
            )
    records.sort(key=lambda r: r.response_id)
    save_expansions(records, str(out_dir / "expansions.jsonl"))
    for name in sorted(dataset.splits):
        qrels = {cid: {rid} for cid, rid in dataset.splits[name].positives().items()}
        save_qrels(qrels, str(out_dir / f"qrels-{name}.txt"))
    if equivalence:
        payload = {k: sorted(v) for k, v in sorted(equivalence.items())}
        (out_dir / "equivalence.json").write_text(
            json.dumps(payload, indent=0, sort_keys=True) + "\n", encoding="utf-8"
        )
    print(f"wrote dataset ({len(dataset.corpus)} responses) and "
          f"{len(records)} expansion records to {out_dir}")
    return 0


def cmd_pipeline(args) -> int:
    config = load_config(args.config)
    out_dir = (
        args.output_dir
        or os.environ.get("DIALRET_OUTPUT_DIR")
        or config.output_dir
        or "dialret-out"
    )
    rows = run_pipeline(config, out_dir)
    print(f"pipeline finished: {len(rows)} systems -> {out_dir}")
    for row in rows:
        recalls = "  ".join(f"R@{k} {row.recalls[k]:.4f}" for k in sorted(row.recalls))
        print(f"  {row.label:<24} {recalls}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dialret",
        description="First-stage retrieval of dialogue responses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a dataset file")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--qrels-dir", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="word-count statistics per split")
    p.add_argument("--data", required=True)
    p.add_argument("--expanded", default=None,
                   help="expanded dataset; adds expansion statistics")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("search", help="BM25 (optionally RM3 or expanded) to a run file")
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--rm3", action="store_true")
    p.add_argument("--fb-docs", type=int, default=10)
    p.add_argument("--fb-terms", type=int, default=10)
    p.add_argument("--orig-weight", type=float, default=0.5)
    p.add_argument("--expansions", default=None)
    p.add_argument("--num-predictions", type=int, default=3)
    p.add_argument("--tag", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("rm3-sweep", help="grid search RM3 parameters")
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="valid")
    p.add_argument("--out", required=True)
    p.add_argument("--fb-docs", type=_ints, default=[5, 10])
    p.add_argument("--fb-terms", type=_ints, default=[5, 10])
    p.add_argument("--orig-weight", type=_floats, default=[0.3, 0.5, 0.7])
    p.add_argument("--ks", type=_ks, default=[1, 10])
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.set_defaults(func=cmd_rm3_sweep)

    p = sub.add_parser("expand", help="apply expansion records to the collection")
    p.add_argument("--data", required=True)
    p.add_argument("--expansions", required=True)
    p.add_argument("--num-predictions", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("embed", help="encode responses or contexts to an embedding file")
    p.add_argument("--data", required=True)
    p.add_argument("--what", choices=("responses", "contexts"), default="responses")
    p.add_argument("--split", default="test")
    p.add_argument("--out", required=True)
    p.add_argument("--encoder", default=None, help="encoder checkpoint; random init if omitted")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--init-scale", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--provenance", default="toy-encoder")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="train the toy encoder on the train split")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--history", default=None, help="loss/eval curve CSV")
    p.add_argument("--negatives", default=None, help="negative sets JSONL")
    p.add_argument("--encoder", default=None, help="warm-start checkpoint")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--init-scale", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=2e-5)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--warmup", type=float, default=0.10)
    p.add_argument("--eval-every", type=int, default=100)
    p.add_argument("--rerank-candidates", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loss-variant", choices=("softmax_full", "paper_literal"),
                   default="softmax_full")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample-negatives", help="mine negatives for a split")
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="train")
    p.add_argument("--kind", choices=("random", "sparse_top", "dense_top", "denoised"),
                   required=True)
    p.add_argument("--retriever", choices=("sparse", "dense"), default=None)
    p.add_argument("--encoder", default=None)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_negatives)

    p = sub.add_parser("evaluate", help="recall of a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--ks", type=_ks, default=[1, 10, 100])
    p.add_argument("--out", default=None, help="metrics CSV")
    p.add_argument("--per-query", default=None, help="per-query indicator CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("significance", help="paired t test between two run files")
    p.add_argument("--run-a", required=True)
    p.add_argument("--run-b", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--num-comparisons", type=int, default=1)
    p.set_defaults(func=cmd_significance)

    p = sub.add_parser("synth", help="generate a synthetic benchmark directory")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--num-train", type=int, default=300)
    p.add_argument("--num-valid", type=int, default=50)
    p.add_argument("--num-test", type=int, default=100)
    p.add_argument("--num-distractors", type=int, default=250)
    p.add_argument("--num-components", type=int, default=30)
    p.add_argument("--duplicates", type=int, default=0,
                   help="near-duplicates per train positive")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="run the full experiment chain from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "retriever", None) is None and getattr(args, "kind", None):
        args.retriever = "sparse" if args.kind == "sparse_top" else "dense"
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"E_CONFIG: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"E_DATA: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"E_NUMERIC: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"E_DATA: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

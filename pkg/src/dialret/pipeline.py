"""End-to-end experiment chain: sparse baselines, expansion, dense training.

A pipeline run loads (or synthesizes) a dataset, then produces one result row
per retrieval system on the test split:

  bm25              plain BM25 over the original collection
  bm25-rm3          BM25 with RM3 feedback
  bm25-expanded     BM25 over the expansion-augmented collection (if records)
  dense-zeroshot    randomly initialized encoder
  dense[in-batch]   encoder trained with in-batch negatives
  dense[<sampler>]  one per configured sampler, trained with mined negatives

Hard-negative mining for dense_top/denoised samplers uses the in-batch
trained encoder; sparse_top mines from the BM25 index. Every row gets
recall at the configured cutoffs plus a paired t test against the bm25
baseline (Bonferroni-corrected across the non-baseline rows).

All artifacts are deterministic: fixed float formats, sorted iteration, no
timestamps. Running twice with one seed yields byte-identical files.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, Dataset, concat_context, load_dataset, save_dataset
from .dense import (
    ToyEncoder,
    corpus_vocabulary,
    dense_search,
    encode_corpus,
    save_embeddings,
    save_encoder,
)
from .errors import ConfigError, DataError
from .evaluation import (
    EvalReport,
    paired_ttest,
    recall_at_k,
    save_qrels,
)
from .expansion import apply_expansions, load_expansions
from .negatives import SamplerSpec, false_negative_rate, sample_negatives, save_negatives
from .ranking import write_run
from .rm3 import RM3Params, rm3_search
from .seeding import derive_seed
from .sparse import Analyzer, BM25Params, bm25_search, build_index
from .synthetic import LexicalSpec, lexical_dataset, plant_duplicates
from .trainer import TrainConfig, build_rerank_sets, train

CONFIG_VERSION = 1

_CONFIG_KEYS = {
    "version", "seed", "data", "synthetic", "output_dir", "ks", "alpha",
    "significance_k", "bm25", "rm3", "num_predictions", "expansions",
    "equivalence", "dense", "train", "samplers", "run_tag",
}

_SYNTH_KEYS = {
    "num_train", "num_valid", "num_test", "num_distractors",
    "num_components", "num_fillers", "seed", "duplicates_per_positive",
}


@dataclass
class PipelineConfig:
    seed: int = 0
    data: str | None = None
    synthetic: dict = field(default_factory=dict)
    ks: tuple[int, ...] = (1, 10, 100)
    alpha: float = 0.05
    significance_k: int = 10
    bm25: BM25Params = field(default_factory=BM25Params)
    rm3: RM3Params = field(default_factory=RM3Params)
    num_predictions: int = 3
    expansions: str | None = None
    equivalence: str | None = None
    dense_dim: int = 64
    dense_scale: float = 0.1
    train: TrainConfig | None = None
    samplers: tuple[dict, ...] = ()
    run_tag: str = "dialret"
    output_dir: str | None = None

    def __post_init__(self):
        if self.data is None and not self.synthetic:
            raise ConfigError("config needs either 'data' or 'synthetic'")
        if self.data is not None and self.synthetic:
            raise ConfigError("'data' and 'synthetic' are mutually exclusive")
        for field, value in (("data", self.data), ("expansions", self.expansions),
                             ("equivalence", self.equivalence)):
            if value is not None and not isinstance(value, str):
                raise ConfigError(f"config field {field} must be a path string")
        if not self.ks or any(k < 1 for k in self.ks):
            raise ConfigError(f"ks must be positive, got {self.ks!r}")
        if self.significance_k not in self.ks:
            raise ConfigError(
                f"significance_k {self.significance_k} must be one of ks {self.ks!r}"
            )
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if self.dense_dim < 1:
            raise ConfigError(f"dense dim must be >= 1, got {self.dense_dim}")
        if self.num_predictions < 1:
            raise ConfigError(f"num_predictions must be >= 1, got {self.num_predictions}")
        for entry in self.samplers:
            kind = entry.get("kind")
            if kind not in ("random", "sparse_top", "dense_top", "denoised"):
                raise ConfigError(f"unknown sampler kind {kind!r}")
            retr = entry.get("retriever", "dense" if kind != "sparse_top" else "sparse")
            if retr not in ("sparse", "dense"):
                raise ConfigError(f"unknown sampler retriever {retr!r}")


def _require_type(value, types, what: str):
    if not isinstance(value, types):
        raise ConfigError(f"config field {what} has the wrong type")
    return value


def load_config(path: str) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if raw.get("version") != CONFIG_VERSION:
        raise ConfigError(
            f"config version must be {CONFIG_VERSION}, got {raw.get('version')!r}"
        )
    synth = _require_type(raw.get("synthetic", {}), dict, "synthetic")
    for key in synth:
        if key not in _SYNTH_KEYS:
            raise ConfigError(f"unknown synthetic key {key!r}")
    bm25_raw = _require_type(raw.get("bm25", {}), dict, "bm25")
    rm3_raw = _require_type(raw.get("rm3", {}), dict, "rm3")
    dense_raw = _require_type(raw.get("dense", {}), dict, "dense")
    train_raw = raw.get("train")
    train_cfg = None
    if train_raw is not None:
        _require_type(train_raw, dict, "train")
        try:
            train_cfg = TrainConfig(**train_raw)
        except TypeError as exc:
            raise ConfigError(f"bad train config: {exc}") from None
    try:
        return PipelineConfig(
            seed=int(raw.get("seed", 0)),
            data=raw.get("data"),
            synthetic=synth,
            ks=tuple(int(k) for k in raw.get("ks", (1, 10, 100))),
            alpha=float(raw.get("alpha", 0.05)),
            significance_k=int(raw.get("significance_k", 10)),
            bm25=BM25Params(**bm25_raw),
            rm3=RM3Params(**rm3_raw),
            num_predictions=int(raw.get("num_predictions", 3)),
            expansions=raw.get("expansions"),
            equivalence=raw.get("equivalence"),
            dense_dim=int(dense_raw.get("dim", 64)),
            dense_scale=float(dense_raw.get("init_scale", 0.1)),
            train=train_cfg,
            samplers=tuple(raw.get("samplers", ())),
            run_tag=str(raw.get("run_tag", "dialret")),
            output_dir=raw.get("output_dir"),
        )
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from None


def _slug(label: str) -> str:
    return re.sub(r"[^0-9A-Za-z]+", "-", label).strip("-")


def _load_equivalence(path: str) -> dict[str, set[str]]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise DataError("equivalence file must map positive ids to lists")
    return {k: set(v) for k, v in raw.items()}


@dataclass
class PipelineRow:
    label: str
    recalls: dict[int, float]
    report: EvalReport
    fnr: float | None = None
    t_statistic: float | None = None
    p_value: float | None = None
    significant: bool | None = None


def _format_report_csv(rows: list[PipelineRow], ks, sig_k, path: Path) -> None:
    header = ["system"] + [f"recall@{k}" for k in ks]
    header += [f"t_vs_bm25@{sig_k}", f"p_vs_bm25@{sig_k}", "significant", "fnr"]
    lines = [",".join(header)]
    for row in rows:
        cells = [row.label] + [f"{row.recalls[k]:.4f}" for k in ks]
        if row.t_statistic is None:
            cells += ["", "", ""]
        else:
            cells += [
                f"{row.t_statistic:.4f}",
                f"{row.p_value:.6f}",
                "yes" if row.significant else "no",
            ]
        cells.append("" if row.fnr is None else f"{row.fnr:.4f}")
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _format_report_txt(rows: list[PipelineRow], ks, sig_k, path: Path) -> None:
    header = ["system"] + [f"R@{k}" for k in ks] + [f"p vs bm25 (R@{sig_k})", "sig"]
    table = [header]
    for row in rows:
        cells = [row.label] + [f"{row.recalls[k]:.4f}" for k in ks]
        cells.append("-" if row.p_value is None else f"{row.p_value:.6f}")
        if row.significant is None:
            cells.append("-")
        else:
            cells.append("*" if row.significant else "ns")
        table.append(cells)
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    out = []
    for r in table:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    path.write_text("\n".join(out) + "\n", encoding="utf-8")


def run_pipeline(config: PipelineConfig, out_dir: str) -> list[PipelineRow]:
    out = Path(out_dir)
    for sub in ("runs", "checkpoints", "negatives", "history"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    equivalence: dict[str, set[str]] = {}
    if config.synthetic:
        synth = dict(config.synthetic)
        dupes = int(synth.pop("duplicates_per_positive", 0))
        spec = LexicalSpec(**{**synth, "seed": int(synth.get("seed", config.seed))})
        dataset = lexical_dataset(spec)
        if dupes > 0:
            dataset, equivalence = plant_duplicates(
                dataset, per_positive=dupes, seed=spec.seed
            )
        save_dataset(dataset, str(out / "dataset.jsonl"))
    else:
        dataset = load_dataset(config.data)
    if config.equivalence:
        equivalence = _load_equivalence(config.equivalence)

    test = dataset.split("test")
    qrels = {cid: {rid} for cid, rid in test.positives().items()}
    save_qrels(qrels, str(out / "qrels-test.txt"))
    ks = config.ks
    depth = max(ks)
    sig_k = config.significance_k

    analyzer = Analyzer()
    index = build_index(dataset.corpus, analyzer)
    query_tokens = {
        ctx.id: analyzer(ctx.text()) for ctx in test.contexts
    }

    rows: list[PipelineRow] = []

    def add_row(label: str, results, fnr: float | None = None) -> PipelineRow:
        report = recall_at_k(results, qrels, ks)
        write_run(
            str(out / "runs" / f"{_slug(label)}.run.txt"),
            [results[qid] for qid in sorted(results)],
            tag=f"{config.run_tag}-{_slug(label)}",
        )
        row = PipelineRow(label=label, recalls=dict(report.means), report=report, fnr=fnr)
        rows.append(row)
        return row

    bm25_results = {
        qid: bm25_search(index, tokens, config.bm25, k=depth, query_id=qid)
        for qid, tokens in query_tokens.items()
    }
    add_row("bm25", bm25_results)

    rm3_results = {
        qid: rm3_search(index, tokens, config.rm3, k=depth, bm25=config.bm25, query_id=qid)
        for qid, tokens in query_tokens.items()
    }
    add_row("bm25-rm3", rm3_results)

    if config.expansions:
        records = load_expansions(config.expansions)
        expanded = apply_expansions(dataset.corpus, records, config.num_predictions)
        exp_index = build_index(expanded, analyzer)
        exp_results = {
            qid: bm25_search(exp_index, tokens, config.bm25, k=depth, query_id=qid)
            for qid, tokens in query_tokens.items()
        }
        add_row("bm25-expanded", exp_results)

    all_contexts = [c for name in sorted(dataset.splits) for c in dataset.splits[name].contexts]
    vocab = corpus_vocabulary(dataset.corpus, all_contexts)
    encoder0 = ToyEncoder.init_random(
        vocab, config.dense_dim, seed=derive_seed(config.seed, "encoder-init"),
        scale=config.dense_scale,
    )

    def dense_results(enc: ToyEncoder):
        store = encode_corpus(enc, dataset.corpus, provenance="toy-encoder:responses")
        return store, {
            ctx.id: dense_search(store, enc.encode_context(ctx), k=depth, query_id=ctx.id)
            for ctx in test.contexts
        }

    store0, zero_results = dense_results(encoder0)
    save_embeddings(store0, str(out / "checkpoints" / "dense-zeroshot.responses.demb"))
    add_row("dense-zeroshot", zero_results)

    trained_base: ToyEncoder | None = None
    if config.train is not None:
        if "train" not in dataset.splits:
            raise DataError("training requires a train split")
        train_split = dataset.split("train")
        pairs = [
            (ctx, dataset.corpus.get(train_split.positives()[ctx.id]))
            for ctx in train_split.contexts
        ]
        rerank = None
        if "valid" in dataset.splits:
            valid = dataset.split("valid")
            rerank = build_rerank_sets(
                [(c, dataset.corpus.get(valid.positives()[c.id])) for c in valid.contexts],
                list(dataset.corpus.docs),
                num_candidates=10,
                seed=derive_seed(config.seed, "rerank-candidates"),
            )

        def train_row(label: str, negmap, fnr=None):
            enc, history = train(encoder0, pairs, config.train,
                                 negatives=negmap, rerank_sets=rerank)
            slug = _slug(label)
            save_encoder(enc, str(out / "checkpoints" / f"{slug}.demb"),
                         provenance=f"toy-encoder:{slug}")
            hist_lines = ["step,loss"]
            hist_lines += [f"{i + 1},{loss:.6f}" for i, loss in enumerate(history.losses)]
            hist_lines.append("")
            hist_lines.append("eval_step,rerank_map")
            hist_lines += [f"{s},{m:.4f}" for s, m in history.evals]
            (out / "history" / f"{slug}.csv").write_text(
                "\n".join(hist_lines) + "\n", encoding="utf-8"
            )
            _, results = dense_results(enc)
            add_row(label, results, fnr=fnr)
            return enc

        trained_base = train_row("dense[in-batch]", None)

        positives = train_split.positives()
        collection_ids = dataset.corpus.ids()
        by_id = {doc.id: doc for doc in dataset.corpus}
        base_store = encode_corpus(trained_base, dataset.corpus)

        def sparse_retriever(ctx, k):
            return bm25_search(index, analyzer(ctx.text()), config.bm25, k=k,
                               query_id=ctx.id)

        def dense_retriever(ctx, k):
            return dense_search(base_store, trained_base.encode_context(ctx), k=k,
                                query_id=ctx.id)

        for entry in config.samplers:
            entry = dict(entry)
            kind = entry.pop("kind")
            retr_name = entry.pop("retriever", "sparse" if kind == "sparse_top" else "dense")
            seed_base = entry.pop("seed", config.seed)
            spec = SamplerSpec(kind=kind, seed=derive_seed(seed_base, "sampler", kind),
                               **entry)
            retriever = None
            if kind != "random":
                retriever = sparse_retriever if retr_name == "sparse" else dense_retriever
            negsets = [
                sample_negatives(spec, ctx, positives[ctx.id], collection_ids, retriever)
                for ctx in train_split.contexts
            ]
            label = f"dense[{kind}]" if kind != "denoised" else f"dense[denoised-{retr_name}]"
            save_negatives(negsets, str(out / "negatives" / f"{_slug(label)}.jsonl"))
            fnr = None
            if equivalence:
                fnr = false_negative_rate(negsets, positives, equivalence)
            negmap = {ns.context_id: [by_id[i] for i in ns.negative_ids] for ns in negsets}
            train_row(label, negmap, fnr=fnr)

    baseline = rows[0]
    comparisons = len(rows) - 1
    for row in rows[1:]:
        base_scores = [float(baseline.report.per_query[sig_k][q]) for q in sorted(qrels)]
        row_scores = [float(row.report.per_query[sig_k][q]) for q in sorted(qrels)]
        result = paired_ttest(
            row_scores, base_scores,
            alpha=config.alpha,
            num_comparisons=max(comparisons, 1),
            system_a=row.label, system_b=baseline.label,
            metric=f"recall@{sig_k}",
        )
        row.t_statistic = result.t_statistic
        row.p_value = result.p_value
        row.significant = result.significant

    _format_report_csv(rows, ks, sig_k, out / "report.csv")
    _format_report_txt(rows, ks, sig_k, out / "report.txt")
    return rows

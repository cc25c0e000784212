"""First-stage retrieval of responses for multi-turn dialogues.

Sparse (BM25, RM3) and dense (bi-encoder) retrieval over a shared response
collection, document expansion, hard-negative sampling, contrastive training
of a toy encoder, and evaluation with paired significance testing.
"""

from .corpus import (
    Corpus,
    Dataset,
    DialogueContext,
    ExamplePair,
    ResponseDoc,
    Split,
    Utterance,
    concat_context,
    corpus_stats,
    load_dataset,
    save_dataset,
    word_tokens,
)
from .dense import (
    EmbeddingStore,
    ToyEncoder,
    corpus_vocabulary,
    dense_search,
    dot_score,
    encode_contexts,
    encode_corpus,
    encoder_tokens,
    load_embeddings,
    load_encoder,
    save_embeddings,
    save_encoder,
)
from .errors import ConfigError, DataError, DialretError, NumericError, TrainingDiverged
from .evaluation import (
    EvalReport,
    SignificanceResult,
    betainc_reg,
    load_qrels,
    paired_ttest,
    recall_at_k,
    rerank_map,
    save_qrels,
    t_sf_two_sided,
)
from .expansion import (
    ExpansionRecord,
    ExpansionStats,
    apply_expansions,
    expansion_stats,
    load_expansions,
    save_expansions,
)
from .negatives import (
    NegativeSet,
    SamplerSpec,
    false_negative_rate,
    load_negatives,
    sample_negatives,
    save_negatives,
)
from .pipeline import PipelineConfig, PipelineRow, load_config, run_pipeline
from .ranking import ScoredList, read_run, top_k, write_run
from .rm3 import RM3Params, build_relevance_model, interpolate_query, rm3_search, sweep_grid
from .seeding import derive_seed
from .sparse import Analyzer, BM25Params, InvertedIndex, bm25_search, build_index, default_stopwords
from .synthetic import LexicalSpec, lexical_dataset, plant_duplicates
from .trainer import (
    RerankSet,
    TrainBatch,
    TrainConfig,
    TrainHistory,
    batch_scores,
    build_rerank_sets,
    evaluate_rerank_map,
    gradient_check,
    mnrl_loss,
    train,
)

__version__ = "0.1.0"

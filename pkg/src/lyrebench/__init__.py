"""Evaluation toolkit for open-ended text generation.

Pipeline stages: corpus ingestion/cleaning, n-gram degeneration metrics,
hashed-ngram featurization, divergence-frontier (MAUVE-style) scoring,
Frechet distance over feature sets, nucleus sampling with a character
n-gram language model, and inter-annotator agreement analytics.
"""

__version__ = "0.1.0"

from .corpus import (
    CleaningRuleSet,
    Corpus,
    CorpusStats,
    Document,
    TokenSequence,
    clean_corpus,
    clean_document,
    compress_newlines,
    corpus_stats,
    load_corpus,
    save_corpus,
    tokenize,
)
from .ngram_metrics import (
    DegenerationReport,
    corpus_degeneration,
    distinct_n,
    diversity,
    rep_n,
)
from .featurize import FeatureSet, hashed_ngram_features, load_features, save_features
from .divergence import (
    DivergenceCurve,
    MauveConfig,
    QuantizedPair,
    divergence_frontier,
    kl_divergence,
    mauve_report,
    mauve_score,
    quantize,
)
from .frechet import GaussianStats, frechet_distance, gaussian_stats, matrix_sqrt_psd
from .sampling import (
    Distribution,
    NgramLM,
    SamplingConfig,
    fit_char_lm,
    generate,
    generate_corpus,
    next_distribution,
    top_p_filter,
)
from .annotations import (
    AgreementReport,
    AnnotationSet,
    Response,
    aggregate,
    filter_responses,
    krippendorff_alpha,
    load_responses,
    normalize_score,
)

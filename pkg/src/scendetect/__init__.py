"""Scenario detection for narrative text.

Topic-segments documents with an LDA-driven TextTiling variant, then labels
the segments with one-vs-all tf.idf classifiers gated by prediction entropy.
Includes evaluation (fractional sentence P/R/F1, Pk, WindowDiff, agreement),
gold-standard merging/adjudication, and synthetic corpus generation.
"""

from .corpus import (
    NONE_LABEL,
    DEFAULT_STOPWORDS,
    Sentence,
    Document,
    Segment,
    AnnotationSet,
    ScenarioCatalog,
    tokenize,
    stem,
    preprocess,
    load_corpus,
    write_corpus,
    load_catalog,
    write_catalog,
    load_stopwords,
    load_annotations,
    write_annotations,
    group_annotations,
    generate_synthetic_corpus,
    scenario_vocab,
    concat_documents,
)
from .features import (
    TfidfVocab,
    FeatureVector,
    fit_vocab,
    vectorize,
    save_vocab,
    load_vocab,
)
from .topics import (
    DEFAULT_BETA,
    LdaModel,
    default_alpha,
    train_lda,
    infer_word_topics,
    sentence_topic_vector,
    document_topic_proportions,
    scenario_topics,
    save_lda,
    load_lda,
)
from .segmenter import (
    SegmentationParams,
    GapScores,
    coherence_scores,
    depth_scores,
    select_boundaries,
    segment,
)
from .classifier import (
    MlpBinary,
    TrainConfig,
    ScenarioClassifier,
    SentencePrediction,
    DetectionResult,
    init_mlp,
    mlp_loss_and_grads,
    train_mlp,
    train_classifier,
    predict_scores,
    rank_labels,
    score_entropy,
    entropy_gate,
    classify_bag,
    baseline_predict,
    save_classifier,
    load_classifier,
)
from .evaluation import (
    MicroCounts,
    PerScenario,
    EvalReport,
    AnalysisBlock,
    sentence_prf,
    auto_k,
    pk,
    window_diff,
    boundaries_from_segments,
    cohen_kappa,
    raw_agreement,
    span_overlap_agreement,
    pmi,
    pearson,
    analysis,
    sentence_labels,
    format_report,
    report_keyvalues,
)
from .pipeline import (
    AffinityModel,
    detect,
    tune_entropy_threshold,
    majority_label,
    mean_segment_length,
    train_affinity,
    affinity_score,
    affinity_select,
)
from .goldbuild import (
    AdjudicationItem,
    auto_merge,
    apply_decisions,
    validate_decision,
    write_queue,
    read_queue,
    write_decisions,
    load_decisions,
    attach_decisions,
    merge_statistics,
)

__version__ = "0.1.0"

"""End-to-end detection (segment, vectorize, classify, gate) and
affinity-based corpus selection over document topic proportions."""

import math
from dataclasses import dataclass

import numpy as np

from .corpus import NONE_LABEL, Segment
from .classifier import DetectionResult, SentencePrediction, classify_bag
from .evaluation import sentence_prf
from .segmenter import SegmentationParams, segment
from .topics import document_topic_proportions


def detect(doc, lda, clf, params=SegmentationParams(), tau=0.3,
           iterations=20, seed=0):
    """Detect scenario spans in a preprocessed document.

    Topic-segments the document, classifies each span on the union of its
    content lemmas, and gates by entropy. Emitted span labels are the top
    scenario plus any whose normalized probability exceeds tau; gated spans
    emit {NONE}. Sentences inherit their span's ranking and gate decision.
    """
    spans = segment(doc, lda, params, iterations=iterations, seed=seed)
    sentences = [None] * len(doc.sentences)
    out_segments = []
    for span in spans:
        bag = [
            w
            for i in range(span.start, span.end + 1)
            for w in doc.sentences[i].content_lemmas
        ]
        ranked, is_none, h, normalized = classify_bag(clf, bag)
        if is_none or not ranked:
            labels = frozenset({NONE_LABEL})
        else:
            top = ranked[0][0]
            labels = frozenset(
                {top} | {lab for lab, _ in ranked if normalized[lab] > tau}
            )
        out_segments.append(
            Segment(doc.doc_id, span.start, span.end, labels, "system")
        )
        pred = SentencePrediction(ranked=tuple(ranked), is_none=is_none, entropy=h)
        for i in range(span.start, span.end + 1):
            sentences[i] = pred
    return DetectionResult(doc_id=doc.doc_id, sentences=tuple(sentences),
                           segments=tuple(out_segments))


def tune_entropy_threshold(docs, gold, lda, clf, params=SegmentationParams(),
                           grid=50, iterations=20, seed=0):
    """Pick the entropy threshold maximizing sentence micro-F1 on a dev set.

    gold maps (doc_id, sentence index) -> label set. Segmentation and
    classification run once; only the gate decision is swept over `grid`
    evenly spaced thresholds in [0, ln L]. Ties resolve to the lowest
    threshold. Returns (threshold, f1); the classifier is not modified.
    """
    cached = {}
    for doc in docs:
        result = detect(doc, lda, clf, params, iterations=iterations, seed=seed)
        for i, pred in enumerate(result.sentences):
            cached[(doc.doc_id, i)] = (pred.ranked, pred.entropy)
    if set(cached) != set(gold):
        raise ValueError("dev gold and corpus cover different sentences")
    best = None
    for threshold in np.linspace(0.0, math.log(len(clf.models)), grid):
        pred = {
            key: (ranked, h > threshold) for key, (ranked, h) in cached.items()
        }
        f1 = sentence_prf(gold, pred).f1
        if best is None or f1 > best[1]:
            best = (float(threshold), f1)
    return best


def majority_label(gold_segments):
    """Most frequent label over the sentences the training gold covers."""
    counts = {}
    for seg in gold_segments:
        for lab in seg.labels:
            counts[lab] = counts.get(lab, 0) + len(seg)
    if not counts:
        raise ValueError("no gold segments")
    return min(counts, key=lambda lab: (-counts[lab], lab))


def mean_segment_length(gold_segments):
    if not gold_segments:
        raise ValueError("no gold segments")
    return sum(len(s) for s in gold_segments) / len(gold_segments)


# ---------------------------------------------------------------------------
# affinity


@dataclass
class AffinityModel:
    weights: dict          # label -> (w: K array, b: float)


def train_affinity(docs_by_scenario, lda, epochs=300, learning_rate=0.5,
                   iterations=20, seed=0):
    """One binary logistic regression per scenario on document topic
    proportions, full-batch gradient descent from zero init (deterministic;
    the seed only drives topic inference)."""
    labels = [lab for lab, docs in docs_by_scenario.items() if docs]
    if len(labels) < 2:
        raise ValueError("need documents from at least 2 scenarios")
    feats, owners = [], []
    for lab in labels:
        for doc in docs_by_scenario[lab]:
            feats.append(document_topic_proportions(lda, doc, iterations, seed))
            owners.append(lab)
    X = np.stack(feats)
    weights = {}
    for lab in labels:
        y = np.array([o == lab for o in owners], dtype=np.float64)
        w = np.zeros(X.shape[1])
        b = 0.0
        for _ in range(epochs):
            z = X @ w + b
            p = 1.0 / (1.0 + np.exp(-z))
            err = (p - y) / len(y)
            w -= learning_rate * (X.T @ err)
            b -= learning_rate * err.sum()
        weights[lab] = (w, b)
    return AffinityModel(weights=weights)


def affinity_score(model, proportions):
    """(best label, best score) for one document's topic proportions."""
    best = None
    for lab in sorted(model.weights):
        w, b = model.weights[lab]
        score = float(1.0 / (1.0 + math.exp(-(proportions @ w + b))))
        if best is None or score > best[1]:
            best = (lab, score)
    return best


def affinity_select(corpus_docs, lda, model, top_m, iterations=20, seed=0):
    """Rank documents by their best per-scenario affinity; returns the top_m
    (doc_id, label, score) triples, ordering independent of input order."""
    rows = []
    for doc in corpus_docs:
        props = document_topic_proportions(lda, doc, iterations, seed)
        lab, score = affinity_score(model, props)
        rows.append((doc.doc_id, lab, score))
    rows.sort(key=lambda r: (-r[2], r[0]))
    return rows[: max(0, top_m)]

"""One-vs-all scenario classification over tf.idf features.

Each scenario gets a small multilayer perceptron: V -> 100 ReLU units with
inverted dropout (0.2, training only) -> sigmoid score. Binary cross-entropy
optimized with the adaptive-moment estimator. Scores across scenarios are
normalized to a distribution whose entropy drives the None gate.
"""

import base64
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .corpus import NONE_LABEL, Segment, _mix_seed
from .features import TfidfVocab, vectorize

DEGENERATE_BIAS = -5.0        # constant-negative output for unseen labels


@dataclass
class MlpBinary:
    W1: np.ndarray           # V x H
    b1: np.ndarray           # H
    W2: np.ndarray           # H
    b2: float
    dropout_rate: float = 0.2


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 100
    dropout: float = 0.2
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0


@dataclass
class ScenarioClassifier:
    models: dict                  # label -> MlpBinary, catalog order
    vocab: TfidfVocab
    entropy_threshold: float
    train_seed: int
    degenerate: frozenset = frozenset()


def init_mlp(n_features, hidden, rng, dropout_rate=0.2):
    limit1 = math.sqrt(6.0 / (n_features + hidden))
    limit2 = math.sqrt(6.0 / (hidden + 1))
    return MlpBinary(
        W1=rng.uniform(-limit1, limit1, size=(n_features, hidden)),
        b1=np.zeros(hidden),
        W2=rng.uniform(-limit2, limit2, size=hidden),
        b2=0.0,
        dropout_rate=dropout_rate,
    )


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))


def mlp_loss_and_grads(mlp, X, y, dropout_mask=None):
    """Mean binary cross-entropy and gradients for a batch.

    dropout_mask, when given, is the inverted-dropout scale matrix for the
    hidden layer (entries 0 or 1/(1-rate)); None disables dropout.
    """
    pre = X @ mlp.W1 + mlp.b1
    hidden = np.maximum(pre, 0.0)
    if dropout_mask is not None:
        hidden = hidden * dropout_mask
    z = hidden @ mlp.W2 + mlp.b2
    # stable log(1 + e^z) - z*y
    loss = float(np.mean(np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z))) - z * y))
    m = X.shape[0]
    dz = (_sigmoid(z) - y) / m
    grads = {
        "W2": hidden.T @ dz,
        "b2": float(dz.sum()),
    }
    dhidden = np.outer(dz, mlp.W2)
    if dropout_mask is not None:
        dhidden = dhidden * dropout_mask
    dhidden[pre <= 0.0] = 0.0
    grads["W1"] = X.T @ dhidden
    grads["b1"] = dhidden.sum(axis=0)
    return loss, grads


def train_mlp(X, y, config, rng, collect_loss=False):
    """Adam over mini-batches; deterministic given the rng state."""
    mlp = init_mlp(X.shape[1], config.hidden, rng, config.dropout)
    params = {"W1": mlp.W1, "b1": mlp.b1, "W2": mlp.W2}
    m_state = {k: np.zeros_like(v) for k, v in params.items()}
    v_state = {k: np.zeros_like(v) for k, v in params.items()}
    m_b2 = v_b2 = 0.0
    step = 0
    losses = []
    n = X.shape[0]
    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for lo in range(0, n, config.batch_size):
            batch = order[lo: lo + config.batch_size]
            mask = None
            if config.dropout > 0.0:
                keep = rng.random((len(batch), config.hidden)) >= config.dropout
                mask = keep / (1.0 - config.dropout)
            loss, grads = mlp_loss_and_grads(mlp, X[batch], y[batch], mask)
            epoch_loss += loss * len(batch)
            step += 1
            c1 = 1.0 - config.beta1 ** step
            c2 = 1.0 - config.beta2 ** step
            for k in params:
                m_state[k] = config.beta1 * m_state[k] + (1 - config.beta1) * grads[k]
                v_state[k] = config.beta2 * v_state[k] + (1 - config.beta2) * grads[k] ** 2
                params[k] -= config.learning_rate * (m_state[k] / c1) / (
                    np.sqrt(v_state[k] / c2) + config.eps
                )
            m_b2 = config.beta1 * m_b2 + (1 - config.beta1) * grads["b2"]
            v_b2 = config.beta2 * v_b2 + (1 - config.beta2) * grads["b2"] ** 2
            mlp.b2 -= config.learning_rate * (m_b2 / c1) / (
                math.sqrt(v_b2 / c2) + config.eps
            )
        if collect_loss:
            losses.append(epoch_loss / n)
    return mlp, losses


def train_classifier(segments, catalog, vocab, config=TrainConfig()):
    """One binary model per catalog label from (FeatureVector, label set)
    training segments. Labels without positive examples get a constant
    negative model and are flagged degenerate."""
    if not segments:
        raise ValueError("empty training set")
    X = np.stack([fv.to_dense() for fv, _ in segments])
    models = {}
    degenerate = set()
    for label in catalog:
        y = np.array([label in labels for _, labels in segments], dtype=np.float64)
        if y.sum() == 0:
            warnings.warn(f"label {label!r} has no positive examples; "
                          "trained as constant-negative")
            hidden = config.hidden
            models[label] = MlpBinary(
                W1=np.zeros((vocab.size, hidden)), b1=np.zeros(hidden),
                W2=np.zeros(hidden), b2=DEGENERATE_BIAS,
                dropout_rate=config.dropout,
            )
            degenerate.add(label)
            continue
        rng = np.random.default_rng(_mix_seed(config.seed, label))
        models[label], _ = train_mlp(X, y, config, rng)
    return ScenarioClassifier(
        models=models,
        vocab=vocab,
        entropy_threshold=math.log(len(catalog)),
        train_seed=config.seed,
        degenerate=frozenset(degenerate),
    )


def _forward_score(mlp, x):
    hidden = np.maximum(x @ mlp.W1 + mlp.b1, 0.0)
    return float(_sigmoid(hidden @ mlp.W2 + mlp.b2))


def predict_scores(clf, fv):
    """Raw per-label sigmoid scores, no gating."""
    x = fv.to_dense()
    return {label: _forward_score(m, x) for label, m in clf.models.items()}


def rank_labels(clf, scores):
    """Scores sorted descending, ties by label id; degenerate labels are
    excluded so they can never be ranked above trained evidence."""
    return sorted(
        ((lab, s) for lab, s in scores.items() if lab not in clf.degenerate),
        key=lambda kv: (-kv[1], kv[0]),
    )


def score_entropy(scores):
    """Normalize a score map to a distribution (uniform when all zero) and
    return (entropy, normalized)."""
    labels = sorted(scores)
    vals = np.array([scores[lab] for lab in labels], dtype=np.float64)
    total = vals.sum()
    if total == 0.0:
        probs = np.full(len(vals), 1.0 / len(vals))
    else:
        probs = vals / total
    nz = probs[probs > 0]
    h = float(-(nz * np.log(nz)).sum())
    return h, dict(zip(labels, probs))


def entropy_gate(scores, threshold):
    """(is_none, normalized distribution); None when entropy exceeds the
    threshold, meaning no scenario dominates."""
    if len(scores) < 2:
        raise ValueError("need at least 2 labels to gate")
    h, normalized = score_entropy(scores)
    return h > threshold, normalized


@dataclass(frozen=True)
class SentencePrediction:
    ranked: tuple              # ((label, score), ...) descending
    is_none: bool
    entropy: float


@dataclass
class DetectionResult:
    doc_id: str
    sentences: tuple           # SentencePrediction per sentence
    segments: tuple            # labeled Segments partitioning the document


def classify_bag(clf, bag):
    """Score one word bag: (ranked labels, is_none, entropy, normalized)."""
    scores = predict_scores(clf, vectorize(clf.vocab, bag))
    ranked = rank_labels(clf, scores)
    h, normalized = score_entropy(scores)
    return ranked, h > clf.entropy_threshold, h, normalized


def _span_result(doc, source, spans_and_bags, clf):
    sentences = [None] * len(doc.sentences)
    segments = []
    for (start, end), bag in spans_and_bags:
        ranked, is_none, h, _ = classify_bag(clf, bag)
        labels = frozenset({NONE_LABEL}) if is_none or not ranked else \
            frozenset({ranked[0][0]})
        segments.append(Segment(doc.doc_id, start, end, labels, source))
        pred = SentencePrediction(ranked=tuple(ranked), is_none=is_none, entropy=h)
        for i in range(start, end + 1):
            sentences[i] = pred
    return DetectionResult(doc_id=doc.doc_id, sentences=tuple(sentences),
                           segments=tuple(segments))


def baseline_predict(strategy, doc, clf=None, majority_label=None,
                     mean_segment_length=None, seed=0):
    """The three reference strategies.

    sent_maj labels every sentence with the training majority label;
    sent_tfidf classifies each sentence as its own segment; random_tfidf
    draws boundaries uniformly at random with the segment count matched to
    round(n / mean_segment_length), then classifies each random segment.
    """
    if strategy not in ("sent_maj", "sent_tfidf", "random_tfidf"):
        raise ValueError(f"unknown baseline strategy {strategy!r}")
    n = len(doc.sentences)
    if strategy == "sent_maj":
        if majority_label is None:
            raise ValueError("sent_maj needs the training majority label")
        pred = SentencePrediction(ranked=((majority_label, 1.0),),
                                  is_none=majority_label == NONE_LABEL,
                                  entropy=0.0)
        return DetectionResult(
            doc_id=doc.doc_id,
            sentences=tuple(pred for _ in range(n)),
            segments=tuple(
                Segment(doc.doc_id, i, i, frozenset({majority_label}), "sent_maj")
                for i in range(n)
            ),
        )
    if clf is None:
        raise ValueError(f"{strategy} needs a trained classifier")
    if strategy == "sent_tfidf":
        spans = [((i, i), doc.sentences[i].content_lemmas) for i in range(n)]
        return _span_result(doc, "sent_tfidf", spans, clf)
    if strategy == "random_tfidf":
        if not mean_segment_length or mean_segment_length <= 0:
            raise ValueError("random_tfidf needs the mean gold segment length")
        rng = np.random.default_rng(_mix_seed(seed, doc.doc_id))
        n_segments = min(n, max(1, round(n / mean_segment_length)))
        cuts = sorted(rng.choice(n - 1, size=n_segments - 1, replace=False)) \
            if n_segments > 1 else []
        spans = []
        start = 0
        for g in [int(c) for c in cuts] + [n - 1]:
            bag = [w for i in range(start, g + 1)
                   for w in doc.sentences[i].content_lemmas]
            spans.append(((start, g), bag))
            start = g + 1
        return _span_result(doc, "random_tfidf", spans, clf)
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# model file


def _encode(arr):
    data = np.ascontiguousarray(arr, dtype=np.float64).tobytes()
    return base64.b64encode(data).decode("ascii")


def _decode(text, shape):
    arr = np.frombuffer(base64.b64decode(text), dtype=np.float64)
    return arr.reshape(shape).copy()


def save_classifier(clf, path):
    words = sorted(clf.vocab.index, key=clf.vocab.index.get)
    first = next(iter(clf.models.values()))
    rec = {
        "format": "clf-v1",
        "hidden": int(first.W2.shape[0]),
        "dropout": first.dropout_rate,
        "entropy_threshold": clf.entropy_threshold,
        "train_seed": clf.train_seed,
        "degenerate": sorted(clf.degenerate),
        "vocab": {
            "n_docs": clf.vocab.n_docs,
            "words": words,
            "df": [int(d) for d in clf.vocab.df],
        },
        "labels": [
            {
                "label": label,
                "W1": _encode(m.W1),
                "b1": _encode(m.b1),
                "W2": _encode(m.W2),
                "b2": _encode(np.array([m.b2])),
            }
            for label, m in clf.models.items()
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rec, fh, ensure_ascii=False)
        fh.write("\n")


def load_classifier(path):
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    if rec.get("format") != "clf-v1":
        raise ValueError(f"{path}: not a classifier file")
    words = rec["vocab"]["words"]
    vocab = TfidfVocab(
        index={w: i for i, w in enumerate(words)},
        df=np.asarray(rec["vocab"]["df"], dtype=np.int64),
        n_docs=rec["vocab"]["n_docs"],
    )
    hidden = rec["hidden"]
    models = {}
    for block in rec["labels"]:
        models[block["label"]] = MlpBinary(
            W1=_decode(block["W1"], (vocab.size, hidden)),
            b1=_decode(block["b1"], (hidden,)),
            W2=_decode(block["W2"], (hidden,)),
            b2=float(_decode(block["b2"], (1,))[0]),
            dropout_rate=rec["dropout"],
        )
    return ScenarioClassifier(
        models=models,
        vocab=vocab,
        entropy_threshold=rec["entropy_threshold"],
        train_seed=rec["train_seed"],
        degenerate=frozenset(rec["degenerate"]),
    )

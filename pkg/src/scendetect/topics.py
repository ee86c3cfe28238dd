"""Latent Dirichlet Allocation via collapsed Gibbs sampling.

Training estimates topic-word counts from document bags of content lemmas.
Inference holds the trained counts fixed and resamples only the local
assignments (fold-in), so a trained model is immutable and shareable.
"""

import json
from dataclasses import dataclass

import numpy as np


@dataclass
class LdaModel:
    """Sampler state after the final sweep. Treated as immutable."""

    K: int
    alpha: float
    beta: float
    words: list            # id -> word, lexicographic
    vocab: dict            # word -> id
    topic_word_counts: np.ndarray   # K x V, int64
    topic_totals: np.ndarray        # K, int64
    seed: int

    @property
    def V(self):
        return len(self.words)

    def topic_word_dist(self):
        """Row-stochastic K x V matrix: (n_kw + beta) / (n_k + V*beta)."""
        num = self.topic_word_counts + self.beta
        den = self.topic_totals + self.V * self.beta
        return num / den[:, None]


def default_alpha(K):
    return 50.0 / K


DEFAULT_BETA = 0.01


def _doc_bags(docs, vocab):
    bags = []
    for doc in docs:
        ids = [
            vocab[w]
            for s in doc.sentences
            for w in s.content_lemmas
            if w in vocab
        ]
        bags.append(np.asarray(ids, dtype=np.int64))
    return bags


def train_lda(docs, K, alpha=None, beta=DEFAULT_BETA, iterations=200, seed=0,
              check_invariants=False):
    """Collapsed Gibbs sampling over the corpus bags.

    Sampling distribution for token w in document d, own assignment excluded:
        p(z = k) ∝ (n_dk + alpha) * (n_kw + beta) / (n_k + V*beta)
    Deterministic for a fixed seed. check_invariants verifies count
    conservation after every sweep (slow, for tests).
    """
    if K < 1 or iterations < 1:
        raise ValueError("K and iterations must be >= 1")
    alpha = default_alpha(K) if alpha is None else alpha
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    words = sorted({w for d in docs for s in d.sentences for w in s.content_lemmas})
    vocab = {w: i for i, w in enumerate(words)}
    bags = _doc_bags(docs, vocab)
    total = sum(len(b) for b in bags)
    if total == 0:
        raise ValueError("no trainable tokens")
    V = len(words)

    rng = np.random.default_rng(seed)
    n_dk = np.zeros((len(bags), K), dtype=np.int64)
    n_kw = np.zeros((K, V), dtype=np.int64)
    n_k = np.zeros(K, dtype=np.int64)
    assignments = []
    for d, bag in enumerate(bags):
        z = rng.integers(0, K, size=len(bag))
        assignments.append(z)
        np.add.at(n_dk[d], z, 1)
        np.add.at(n_kw, (z, bag), 1)
        np.add.at(n_k, z, 1)

    # n_wk layout keeps the per-word column contiguous in the hot loop
    n_wk = np.ascontiguousarray(n_kw.T)
    del n_kw
    vbeta = V * beta
    denom = n_k.astype(np.float64) + vbeta
    doc_lengths = np.array([len(b) for b in bags])

    for _ in range(iterations):
        u = rng.random(total)
        pos = 0
        for d, bag in enumerate(bags):
            z = assignments[d]
            row = n_dk[d].astype(np.float64) + alpha
            for t in range(len(bag)):
                w = bag[t]
                k = z[t]
                row[k] -= 1.0
                denom[k] -= 1.0
                n_wk[w, k] -= 1
                n_k[k] -= 1
                p = row * (n_wk[w] + beta)
                p /= denom
                cum = np.cumsum(p)
                k = int(np.searchsorted(cum, u[pos] * cum[-1], side="right"))
                if k >= K:
                    k = K - 1
                row[k] += 1.0
                denom[k] += 1.0
                n_wk[w, k] += 1
                n_k[k] += 1
                z[t] = k
                pos += 1
            n_dk[d] = np.bincount(z, minlength=K)
        if check_invariants:
            if int(n_k.sum()) != total:
                raise RuntimeError("topic totals no longer conserve token count")
            if not np.array_equal(n_dk.sum(axis=1), doc_lengths):
                raise RuntimeError("per-document topic counts broke")
            if not np.array_equal(n_wk.sum(axis=0), n_k):
                raise RuntimeError("topic-word counts disagree with topic totals")

    return LdaModel(
        K=K,
        alpha=float(alpha),
        beta=float(beta),
        words=list(words),
        vocab=vocab,
        topic_word_counts=np.ascontiguousarray(n_wk.T),
        topic_totals=n_k.copy(),
        seed=seed,
    )


def _sample_local(phi_t, alpha, K, iterations, rng):
    """Gibbs over local assignments with the model fixed; phi_t is the
    m x K per-token topic likelihood. Returns per-token vote counts over
    the last half of the sweeps."""
    m = phi_t.shape[0]
    z = rng.integers(0, K, size=m)
    loc = np.bincount(z, minlength=K).astype(np.float64)
    votes = np.zeros((m, K), dtype=np.int64)
    first_voting = iterations // 2
    rows = np.arange(m)
    for it in range(iterations):
        u = rng.random(m)
        for t in range(m):
            k = z[t]
            loc[k] -= 1.0
            p = (loc + alpha) * phi_t[t]
            cum = np.cumsum(p)
            k = int(np.searchsorted(cum, u[t] * cum[-1], side="right"))
            if k >= K:
                k = K - 1
            loc[k] += 1.0
            z[t] = k
        if it >= first_voting:
            votes[rows, z] += 1
    return votes


def _infer_ids(model, token_ids, iterations, seed):
    phi = model.topic_word_dist()[:, token_ids]       # K x m
    phi_t = np.ascontiguousarray(phi.T)
    rng = np.random.default_rng(seed)
    votes = _sample_local(phi_t, model.alpha, model.K, iterations, rng)
    return votes.argmax(axis=1)       # ties -> lowest topic id


def infer_word_topics(model, sentence, iterations=20, seed=0):
    """Most relevant topic per in-vocabulary word: the majority assignment
    over the last half of the sweeps, ties toward the lowest topic id.
    Out-of-vocabulary words are omitted."""
    pairs = [(w, model.vocab[w]) for w in sentence.content_lemmas if w in model.vocab]
    if not pairs:
        return []
    ids = np.array([i for _, i in pairs], dtype=np.int64)
    winners = _infer_ids(model, ids, iterations, seed)
    return [(w, int(k)) for (w, _), k in zip(pairs, winners)]


def sentence_topic_vector(model, sentence, iterations=20, seed=0):
    """Normalized histogram of per-word winning topics; all-zero when the
    sentence has no in-vocabulary words."""
    assigned = infer_word_topics(model, sentence, iterations, seed)
    vec = np.zeros(model.K)
    if not assigned:
        return vec
    for _, k in assigned:
        vec[k] += 1.0
    return vec / len(assigned)


def document_topic_proportions(model, doc, iterations=20, seed=0):
    """Like sentence_topic_vector but over the whole document bag."""
    ids = np.array(
        [model.vocab[w] for s in doc.sentences for w in s.content_lemmas
         if w in model.vocab],
        dtype=np.int64,
    )
    vec = np.zeros(model.K)
    if ids.size == 0:
        return vec
    winners = _infer_ids(model, ids, iterations, seed)
    np.add.at(vec, winners, 1.0)
    return vec / ids.size


def scenario_topics(model, docs_by_scenario, top_n, iterations=20, seed=0):
    """Per scenario: average document topic proportions, keep topics above
    the uniform weight 1/K, rank words by prevalence-weighted topic-word
    probability. Returns label -> top_n words."""
    phi = model.topic_word_dist()
    out = {}
    for label, docs in docs_by_scenario.items():
        if not docs:
            raise ValueError(f"scenario {label!r} has no documents")
        props = np.mean(
            [document_topic_proportions(model, d, iterations, seed) for d in docs],
            axis=0,
        )
        prevalent = np.where(props > 1.0 / model.K)[0]
        if prevalent.size == 0:       # exactly uniform; fall back to the mode
            prevalent = np.where(props == props.max())[0]
        scores = props[prevalent] @ phi[prevalent]
        ranked = sorted(range(model.V), key=lambda i: (-scores[i], model.words[i]))
        out[label] = [model.words[i] for i in ranked[:top_n]]
    return out


def save_lda(model, path):
    rec = {
        "format": "lda-v1",
        "K": model.K,
        "alpha": model.alpha,
        "beta": model.beta,
        "seed": model.seed,
        "words": model.words,
        "topic_word_counts": model.topic_word_counts.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rec, fh, ensure_ascii=False)
        fh.write("\n")


def load_lda(path):
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    if rec.get("format") != "lda-v1":
        raise ValueError(f"{path}: not a topic model file")
    counts = np.asarray(rec["topic_word_counts"], dtype=np.int64)
    words = rec["words"]
    return LdaModel(
        K=rec["K"],
        alpha=rec["alpha"],
        beta=rec["beta"],
        words=words,
        vocab={w: i for i, w in enumerate(words)},
        topic_word_counts=counts,
        topic_totals=counts.sum(axis=1),
        seed=rec["seed"],
    )

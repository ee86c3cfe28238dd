"""tf.idf vectorization over a vocabulary fitted on training segments.

idf(w) = ln((1+N)/(1+df(w))) + 1, weights L2-normalized. Indices are
assigned lexicographically so a fitted vocabulary is reproducible from the
training bags alone.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class TfidfVocab:
    index: dict          # word -> dense index
    df: np.ndarray       # document frequency per index
    n_docs: int

    @property
    def size(self):
        return len(self.index)

    def idf(self):
        return np.log((1.0 + self.n_docs) / (1.0 + self.df)) + 1.0


@dataclass(frozen=True)
class FeatureVector:
    """Sparse L2-normalized vector: parallel (indices, weights), indices
    strictly increasing, zero entries omitted."""

    indices: tuple
    weights: tuple
    dim: int

    def to_dense(self):
        v = np.zeros(self.dim)
        if self.indices:
            v[list(self.indices)] = self.weights
        return v


def fit_vocab(training_bags, min_df=1):
    """Count document frequencies over bags; keep words with df >= min_df."""
    if not any(training_bags):
        raise ValueError("no nonempty training segments")
    df_counts = {}
    n = 0
    for bag in training_bags:
        n += 1
        for w in set(bag):
            df_counts[w] = df_counts.get(w, 0) + 1
    kept = sorted(w for w, c in df_counts.items() if c >= min_df)
    if not kept:
        raise ValueError("empty vocabulary after min_df filtering")
    index = {w: i for i, w in enumerate(kept)}
    df = np.array([df_counts[w] for w in kept], dtype=np.int64)
    return TfidfVocab(index=index, df=df, n_docs=n)


def vectorize(vocab, bag):
    """tf.idf weights for one word bag; out-of-vocabulary words ignored."""
    tf = {}
    for w in bag:
        i = vocab.index.get(w)
        if i is not None:
            tf[i] = tf.get(i, 0) + 1
    if not tf:
        return FeatureVector(indices=(), weights=(), dim=vocab.size)
    idf = vocab.idf()
    indices = sorted(tf)
    weights = np.array([tf[i] * idf[i] for i in indices])
    weights /= np.linalg.norm(weights)
    return FeatureVector(indices=tuple(indices), weights=tuple(weights),
                         dim=vocab.size)


def save_vocab(vocab, path):
    words = sorted(vocab.index, key=vocab.index.get)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{vocab.n_docs}\n")
        for w in words:
            fh.write(f"{w}\t{vocab.index[w]}\t{int(vocab.df[vocab.index[w]])}\n")


def load_vocab(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty vocabulary file")
    try:
        n_docs = int(lines[0])
    except ValueError:
        raise ValueError(f"{path}:1: expected the training document count") from None
    index = {}
    df_map = {}
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected word<TAB>index<TAB>df")
        word, idx, df = parts[0], int(parts[1]), int(parts[2])
        index[word] = idx
        df_map[idx] = df
    if sorted(df_map) != list(range(len(index))):
        raise ValueError(f"{path}: vocabulary indices are not dense")
    df = np.array([df_map[i] for i in range(len(index))], dtype=np.int64)
    return TfidfVocab(index=index, df=df, n_docs=n_docs)

"""Topic segmentation over sentence topic vectors.

A gap g sits between sentences g and g+1. Coherence at a gap is the cosine
similarity of the summed topic vectors of the w sentences on either side;
boundaries are the pronounced local minima of that series, selected by the
mu - sigma/x depth threshold.
"""

from dataclasses import dataclass

import numpy as np

from .corpus import Segment
from .topics import sentence_topic_vector


@dataclass(frozen=True)
class SegmentationParams:
    window: int = 2
    x: float = 0.1

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.x <= 0:
            raise ValueError("x must be positive")


@dataclass(frozen=True)
class GapScores:
    coherence: np.ndarray
    depth: np.ndarray
    is_local_min: np.ndarray


def coherence_scores(vectors, w):
    """Cosine similarity across each gap; a zero block scores 0 against
    anything. Windows truncate at the document edges."""
    n = len(vectors)
    if n < 2:
        raise ValueError("nothing to segment")
    V = np.asarray(vectors, dtype=np.float64)
    scores = np.empty(n - 1)
    for g in range(n - 1):
        left = V[max(0, g - w + 1): g + 1].sum(axis=0)
        right = V[g + 1: min(n, g + 1 + w)].sum(axis=0)
        nl = np.linalg.norm(left)
        nr = np.linalg.norm(right)
        scores[g] = 0.0 if nl == 0.0 or nr == 0.0 else float(left @ right / (nl * nr))
    return scores


def _plateau_runs(series):
    """Maximal runs of equal consecutive values as (start, end, value)."""
    runs = []
    start = 0
    for i in range(1, len(series)):
        if series[i] != series[start]:
            runs.append((start, i - 1, series[start]))
            start = i
    runs.append((start, len(series) - 1, series[start]))
    return runs


def depth_scores(coherence):
    """Depth of every local minimum: (hl - c) + (hr - c) with hl/hr the
    nearest peak values on each side, climbing while non-decreasing; series
    endpoints count as peaks. Plateaus count once, at their leftmost gap.
    Non-minima get depth 0."""
    c = np.asarray(coherence, dtype=np.float64)
    if c.size < 1:
        raise ValueError("need at least one gap")
    depth = np.zeros_like(c)
    is_min = np.zeros(c.size, dtype=bool)
    runs = _plateau_runs(c)
    for r, (a, b, value) in enumerate(runs):
        if r == 0 or r == len(runs) - 1:
            continue                      # touching an endpoint: no dip side
        if runs[r - 1][2] < value or runs[r + 1][2] < value:
            continue                      # not a dip
        hl = value
        i = a - 1
        while i >= 0 and c[i] >= hl:
            hl = c[i]
            i -= 1
        hr = value
        i = b + 1
        while i < c.size and c[i] >= hr:
            hr = c[i]
            i += 1
        is_min[a] = True
        depth[a] = (hl - value) + (hr - value)
    return GapScores(coherence=c, depth=depth, is_local_min=is_min)


def select_boundaries(scores, x):
    """Local-minimum gaps whose depth strictly exceeds mu - sigma/x, where
    mu and sigma (population) are taken over local-minimum depths only."""
    candidates = np.flatnonzero(scores.is_local_min)
    if candidates.size == 0:
        return set()
    depths = scores.depth[candidates]
    threshold = depths.mean() - depths.std() / x
    return {int(g) for g in candidates if scores.depth[g] > threshold}


def segment(doc, model, params=SegmentationParams(), iterations=20, seed=0):
    """Partition a document into unlabeled topical spans."""
    n = len(doc.sentences)
    if n < 2:
        return [Segment(doc.doc_id, 0, n - 1, frozenset(), "TT")]
    vectors = [
        sentence_topic_vector(model, s, iterations=iterations, seed=seed)
        for s in doc.sentences
    ]
    scores = depth_scores(coherence_scores(vectors, params.window))
    bounds = sorted(select_boundaries(scores, params.x))
    spans = []
    start = 0
    for g in bounds:
        spans.append(Segment(doc.doc_id, start, g, frozenset(), "TT"))
        start = g + 1
    spans.append(Segment(doc.doc_id, start, n - 1, frozenset(), "TT"))
    return spans

"""Metrics: fractional multi-label micro P/R/F1, Pk, WindowDiff, agreement
statistics (kappa, raw, span overlap), PMI, and the correlation analyses.

Per-sentence inputs are mappings from an opaque sentence key (doc id,
sentence index) to label sets (gold) or ranked labels plus a None flag
(predictions). An empty gold set means the sentence is a None case.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .corpus import NONE_LABEL


@dataclass
class MicroCounts:
    tp: float = 0.0
    fp: float = 0.0
    fn: float = 0.0

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp) if self.tp + self.fp > 0 else 0.0

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn > 0 else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass
class PerScenario:
    precision: float
    recall: float
    f1: float
    gold_sentences: int


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    counts: MicroCounts
    per_scenario: dict = field(default_factory=dict)
    confusion: dict = field(default_factory=dict)
    pk: float = None
    window_diff: float = None
    agreement: dict = None


def _as_gold_set(labels):
    s = frozenset(labels)
    return s if s else frozenset({NONE_LABEL})


def _ranked_labels(ranked):
    out = []
    for item in ranked:
        out.append(item[0] if isinstance(item, tuple) else item)
    return out


def sentence_prf(gold, pred):
    """Fractional micro P/R/F1 with the gold-cardinality top-n rule.

    gold: key -> label set (empty = None case). pred: key -> (ranked, is_none)
    where ranked is already sorted most-relevant-first. A sentence with n gold
    labels is scored on the top n predictions; a gated sentence predicts
    {NONE}. Each matched gold label adds 1/n tp, each missed one 1/n fn, and
    every predicted label outside gold adds 1 fp.
    """
    if set(gold) != set(pred):
        raise ValueError("gold and predictions cover different sentences")
    micro = MicroCounts()
    per_label = {}
    confusion = {}

    def bucket(label):
        return per_label.setdefault(label, MicroCounts())

    for key in gold:
        g = _as_gold_set(gold[key])
        ranked, is_none = pred[key]
        n = len(g)
        p = frozenset([NONE_LABEL]) if is_none else frozenset(_ranked_labels(ranked)[:n])
        share = 1.0 / n
        for label in g:
            if label in p:
                micro.tp += share
                bucket(label).tp += share
            else:
                micro.fn += share
                bucket(label).fn += share
        for label in p - g:
            micro.fp += 1.0
            bucket(label).fp += 1.0
        for missed in g - p:
            for wrong in p - g:
                confusion[(missed, wrong)] = confusion.get((missed, wrong), 0) + 1

    per_scenario = {
        label: PerScenario(
            precision=c.precision,
            recall=c.recall,
            f1=c.f1,
            gold_sentences=sum(1 for key in gold if label in _as_gold_set(gold[key])),
        )
        for label, c in sorted(per_label.items())
    }
    return EvalReport(
        precision=micro.precision,
        recall=micro.recall,
        f1=micro.f1,
        counts=micro,
        per_scenario=per_scenario,
        confusion=confusion,
    )


# ---------------------------------------------------------------------------
# segmentation metrics


def _check_boundaries(bounds, n, name):
    b = sorted(set(int(x) for x in bounds))
    if b and (b[0] < 0 or b[-1] > n - 2):
        raise ValueError(f"{name} boundaries outside [0, {n - 2}]")
    return b


def auto_k(ref_boundaries, n):
    """Half the mean reference segment length, rounded, floor 1."""
    mean_len = n / (len(set(ref_boundaries)) + 1)
    return max(1, round(mean_len / 2))


def _gap_prefix(bounds, n):
    ind = np.zeros(n, dtype=np.int64)       # gap g occupies slot g, g <= n-2
    for g in bounds:
        ind[g] = 1
    return np.concatenate([[0], np.cumsum(ind)])


def pk(ref_boundaries, hyp_boundaries, n, k=None):
    """Beeferman's Pk: fraction of probe pairs (i, i+k) on which reference
    and hypothesis disagree about being in the same segment."""
    if n < 2:
        raise ValueError("need at least 2 sentences")
    ref = _check_boundaries(ref_boundaries, n, "reference")
    hyp = _check_boundaries(hyp_boundaries, n, "hypothesis")
    if k is None:
        k = auto_k(ref, n)
    if k < 1:
        raise ValueError("k must be >= 1")
    probes = n - k
    if probes <= 0:
        return 0.0
    rc = _gap_prefix(ref, n)
    hc = _gap_prefix(hyp, n)
    disagree = 0
    for i in range(probes):
        ref_same = rc[i + k] - rc[i] == 0
        hyp_same = hc[i + k] - hc[i] == 0
        if ref_same != hyp_same:
            disagree += 1
    return disagree / probes


def window_diff(ref_boundaries, hyp_boundaries, n, k=None):
    """Fraction of sliding windows whose internal boundary counts differ."""
    if n < 2:
        raise ValueError("need at least 2 sentences")
    ref = _check_boundaries(ref_boundaries, n, "reference")
    hyp = _check_boundaries(hyp_boundaries, n, "hypothesis")
    if k is None:
        k = auto_k(ref, n)
    if k < 1:
        raise ValueError("k must be >= 1")
    windows = n - k
    if windows <= 0:
        return 0.0
    rc = _gap_prefix(ref, n)
    hc = _gap_prefix(hyp, n)
    differ = 0
    for i in range(windows):
        if rc[i + k] - rc[i] != hc[i + k] - hc[i]:
            differ += 1
    return differ / windows


def boundaries_from_segments(segments, n):
    """Gap indices implied by segment end positions (last end excluded)."""
    return sorted({s.end for s in segments if 0 <= s.end < n - 1})


# ---------------------------------------------------------------------------
# agreement


def _normalized_sets(ann):
    return {key: _as_gold_set(labels) for key, labels in ann.items()}


def _binary_kappa(p_o, p_e):
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


def cohen_kappa(ann1, ann2, method="label_sets"):
    """Chance-corrected sentence-level agreement over label sets.

    label_sets: a sentence agrees only when both annotators assigned the
    identical set; chance model uses each annotator's marginal distribution
    over label sets. per_label: mean of per-label binary kappas.
    """
    if not ann1 or not ann2:
        raise ValueError("empty annotations")
    if set(ann1) != set(ann2):
        raise ValueError("annotations cover different sentences")
    a1 = _normalized_sets(ann1)
    a2 = _normalized_sets(ann2)
    keys = list(a1)
    n = len(keys)
    if method == "label_sets":
        p_o = sum(1 for key in keys if a1[key] == a2[key]) / n
        m1, m2 = {}, {}
        for key in keys:
            m1[a1[key]] = m1.get(a1[key], 0) + 1
            m2[a2[key]] = m2.get(a2[key], 0) + 1
        p_e = sum(m1[s] * m2.get(s, 0) for s in m1) / (n * n)
        return _binary_kappa(p_o, p_e)
    if method == "per_label":
        labels = sorted({lab for key in keys for lab in a1[key] | a2[key]})
        kappas = []
        for lab in labels:
            x = np.array([lab in a1[key] for key in keys])
            y = np.array([lab in a2[key] for key in keys])
            p_o = float(np.mean(x == y))
            px, py = x.mean(), y.mean()
            p_e = float(px * py + (1 - px) * (1 - py))
            kappas.append(_binary_kappa(p_o, p_e))
        return float(np.mean(kappas))
    raise ValueError(f"unknown kappa method {method!r}")


def raw_agreement(ann1, ann2):
    """Fraction of sentences where the two label sets share at least one
    label (both empty counts as shared NONE)."""
    if not ann1 or not ann2:
        raise ValueError("empty annotations")
    if set(ann1) != set(ann2):
        raise ValueError("annotations cover different sentences")
    a1 = _normalized_sets(ann1)
    a2 = _normalized_sets(ann2)
    return sum(1 for key in a1 if a1[key] & a2[key]) / len(a1)


def span_overlap_agreement(ann1, ann2):
    """Mean Jaccard overlap of sentence spans across matched segment pairs:
    segments from the two annotators that share a label and overlap by at
    least one sentence. No matched pairs -> 0.0."""
    if ann1.doc_id != ann2.doc_id:
        raise ValueError("annotation sets reference different documents")
    scores = []
    for s1 in ann1.segments:
        for s2 in ann2.segments:
            if not s1.labels & s2.labels:
                continue
            inter = min(s1.end, s2.end) - max(s1.start, s2.start) + 1
            if inter < 1:
                continue
            union = len(s1) + len(s2) - inter
            scores.append(inter / union)
    return float(np.mean(scores)) if scores else 0.0


# ---------------------------------------------------------------------------
# co-occurrence analyses


def pmi(gold_doc_labels, s1, s2):
    """Pointwise mutual information of two labels over document-level label
    sets; natural log. Zero co-occurrence -> -inf sentinel."""
    if not gold_doc_labels:
        raise ValueError("empty corpus")
    d = len(gold_doc_labels)
    df1 = sum(1 for labels in gold_doc_labels.values() if s1 in labels)
    df2 = sum(1 for labels in gold_doc_labels.values() if s2 in labels)
    if df1 == 0 or df2 == 0:
        missing = s1 if df1 == 0 else s2
        raise ValueError(f"label {missing!r} absent from corpus")
    co = sum(
        1 for labels in gold_doc_labels.values() if s1 in labels and s2 in labels
    )
    if co == 0:
        return float("-inf")
    return math.log(co * d / (df1 * df2))


def pearson(x, y):
    """Pearson r; None for fewer than 2 points or a constant input."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        return None
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return None
    return float(np.corrcoef(x, y)[0, 1])


@dataclass
class AnalysisBlock:
    misclassified: list          # (gold, predicted, count, pmi or None)
    correlations: dict           # name -> r or None


def analysis(report, gold_doc_labels, top_pairs=10):
    """Top misclassified label pairs with their PMI, plus Pearson r between
    per-scenario {recall, f1} and max PMI to any co-occurring scenario, and
    between {precision, f1} and gold sentence counts."""
    ranked_pairs = sorted(report.confusion.items(), key=lambda kv: (-kv[1], kv[0]))
    table = []
    for (g, p), count in ranked_pairs[:top_pairs]:
        try:
            value = pmi(gold_doc_labels, g, p)
        except ValueError:
            value = None
        table.append((g, p, count, value))

    doc_labels = {lab for labels in gold_doc_labels.values() for lab in labels}
    scenarios = [
        lab
        for lab, stats in report.per_scenario.items()
        if lab != NONE_LABEL and stats.gold_sentences > 0
    ]
    max_pmi = {}
    for lab in scenarios:
        if lab not in doc_labels:
            continue
        best = None
        for other in doc_labels:
            if other == lab or other == NONE_LABEL:
                continue
            value = pmi(gold_doc_labels, lab, other)
            if value != float("-inf") and (best is None or value > best):
                best = value
        if best is not None:
            max_pmi[lab] = best

    correlations = {}

    def corr(name, xs, ys):
        if len(xs) < 3:
            warnings.warn(f"{name}: fewer than 3 scenarios with data; omitted")
            correlations[name] = None
            return
        correlations[name] = pearson(xs, ys)

    with_pmi = sorted(max_pmi)
    corr(
        "recall_vs_max_pmi",
        [max_pmi[lab] for lab in with_pmi],
        [report.per_scenario[lab].recall for lab in with_pmi],
    )
    corr(
        "f1_vs_max_pmi",
        [max_pmi[lab] for lab in with_pmi],
        [report.per_scenario[lab].f1 for lab in with_pmi],
    )
    corr(
        "precision_vs_gold_count",
        [report.per_scenario[lab].gold_sentences for lab in scenarios],
        [report.per_scenario[lab].precision for lab in scenarios],
    )
    corr(
        "f1_vs_gold_count",
        [report.per_scenario[lab].gold_sentences for lab in scenarios],
        [report.per_scenario[lab].f1 for lab in scenarios],
    )
    return AnalysisBlock(misclassified=table, correlations=correlations)


# ---------------------------------------------------------------------------
# helpers shared by the CLI and tests


def sentence_labels(segments, doc_len):
    """Per-sentence gold label sets implied by a document's segments
    (union over covering segments; uncovered sentences get the empty set)."""
    out = [set() for _ in range(doc_len)]
    for seg in segments:
        for i in range(seg.start, min(seg.end, doc_len - 1) + 1):
            out[i] |= set(seg.labels)
    return out


def format_float(v):
    if v is None:
        return "n/a"
    if v == float("-inf"):
        return "-inf"
    return f"{v:.6f}"


def format_report(report):
    lines = [
        "metric      value",
        f"precision   {format_float(report.precision)}",
        f"recall      {format_float(report.recall)}",
        f"f1          {format_float(report.f1)}",
    ]
    if report.pk is not None:
        lines.append(f"pk          {format_float(report.pk)}")
    if report.window_diff is not None:
        lines.append(f"window_diff {format_float(report.window_diff)}")
    if report.agreement:
        for name in sorted(report.agreement):
            lines.append(f"{name:<11} {format_float(report.agreement[name])}")
    if report.per_scenario:
        lines.append("")
        lines.append("scenario precision recall f1 gold_sentences")
        for lab, s in report.per_scenario.items():
            lines.append(
                f"{lab} {format_float(s.precision)} {format_float(s.recall)} "
                f"{format_float(s.f1)} {s.gold_sentences}"
            )
    return "\n".join(lines) + "\n"


def report_keyvalues(report):
    pairs = [
        ("precision", format_float(report.precision)),
        ("recall", format_float(report.recall)),
        ("f1", format_float(report.f1)),
        ("tp", format_float(report.counts.tp)),
        ("fp", format_float(report.counts.fp)),
        ("fn", format_float(report.counts.fn)),
    ]
    if report.pk is not None:
        pairs.append(("pk", format_float(report.pk)))
    if report.window_diff is not None:
        pairs.append(("window_diff", format_float(report.window_diff)))
    if report.agreement:
        pairs.extend(
            (name, format_float(value))
            for name, value in sorted(report.agreement.items())
        )
    return "".join(f"{k}={v}\n" for k, v in pairs)

"""
End-to-end scenario detection
=============================

Segment first, then classify each segment's word bag and spread the labels
over its sentences. The detector returns labeled spans plus per-sentence
predictions ready for fractional P/R/F1 scoring; the entropy threshold can
be tuned on development documents.
"""

import numpy as np

from scendetect import (
    ScenarioCatalog,
    SegmentationParams,
    TrainConfig,
    affinity_score,
    affinity_select,
    analysis,
    concat_documents,
    detect,
    document_topic_proportions,
    fit_vocab,
    format_report,
    generate_synthetic_corpus,
    sentence_prf,
    train_affinity,
    train_classifier,
    train_lda,
    tune_entropy_threshold,
    vectorize,
)


def bag(doc):
    return [w for s in doc.sentences for w in s.content_lemmas]


catalog = ScenarioCatalog([(f"s{i}", f"scenario {i}") for i in range(3)])
docs, gold = generate_synthetic_corpus(
    catalog, words_per_scenario=40, docs_per_scenario=8,
    sentences_per_doc=6, words_per_sentence=8, seed=4)
lda = train_lda(docs, K=3, iterations=40, seed=1)
vocab = fit_vocab([bag(d) for d in docs])
training = [(vectorize(vocab, bag(d)), set(ann.segments[0].labels))
            for d, ann in zip(docs, gold)]
clf = train_classifier(training, catalog, vocab, TrainConfig(epochs=20, seed=0))

# a mixed document with known scenario spans
merged, truth = concat_documents(
    [docs[0], docs[8], docs[16]], seed=9, doc_id="mixed",
    labels=[set(gold[0].segments[0].labels),
            set(gold[8].segments[0].labels),
            set(gold[16].segments[0].labels)])

params = SegmentationParams(window=2, x=2.0)
result = detect(merged, lda, clf, params)
print("detected spans:")
for seg in result.segments:
    print(f"  [{seg.start:2d}, {seg.end:2d}] {sorted(seg.labels)}")

# score against the per-sentence gold labels
gold_map = {(merged.doc_id, i): set(seg.labels)
            for seg in truth for i in range(seg.start, seg.end + 1)}
pred_map = {(merged.doc_id, i): (p.ranked, p.is_none)
            for i, p in enumerate(result.sentences)}
report = sentence_prf(gold_map, pred_map)
print(format_report(report))

# scenario co-occurrence analysis needs document-level gold label sets;
# correlations come back None here because a perfect run has no variance
doc_labels = {ann.doc_id: set(ann.segments[0].labels) for ann in gold}
block = analysis(report, doc_labels)
for key, value in sorted(block.correlations.items()):
    print(f"{key} = {value}")

# threshold tuning sweeps the entropy gate over dev documents
threshold, best = tune_entropy_threshold(
    [merged], {k: v for k, v in gold_map.items()}, lda, clf, params)
print(f"\ntuned entropy threshold {threshold:.3f} (dev F1 {best:.3f})")

# affinity: cheap scenario-vs-rest scores over topic proportions,
# for picking promising documents out of a large unlabeled pool
grouped = {}
for d, ann in zip(docs, gold):
    (label,) = next(iter(ann.segments)).labels
    grouped.setdefault(label, []).append(d)
model = train_affinity(grouped, lda, epochs=200)
label, score = affinity_score(
    model, document_topic_proportions(lda, docs[0], iterations=20, seed=3))
print(f"affinity of {docs[0].doc_id}: {label} ({score:.3f})")
picked = affinity_select(docs, lda, model, top_m=3)
print("top pool picks:", [(doc_id, lab) for doc_id, lab, _ in picked])

"""
From two annotators to one gold standard
========================================

Measure agreement, auto-merge overlapping same-label spans, and push the
rest through an adjudication queue. Accepted or resolved items are folded
back in and the result re-merged, so the final gold standard is maximal.
"""

from scendetect import (
    AnnotationSet,
    Segment,
    apply_decisions,
    attach_decisions,
    auto_merge,
    cohen_kappa,
    merge_statistics,
    raw_agreement,
    sentence_labels,
    span_overlap_agreement,
)


def seg(start, end, label, who):
    return Segment("story", start, end, frozenset({label}), who)


# annotator 1 saw one long washing span; annotator 2 split it and also
# marked a bath span annotator 1 missed entirely
ann1 = AnnotationSet("story", "ann1", (
    seg(0, 9, "wash_hair", "ann1"),
    seg(12, 15, "make_tea", "ann1"),
))
ann2 = AnnotationSet("story", "ann2", (
    seg(0, 3, "wash_hair", "ann2"),
    seg(6, 9, "wash_hair", "ann2"),
    seg(10, 13, "take_bath", "ann2"),
))

# sentence-level agreement over 16 sentences, keyed by (doc, index)
a = {("story", i): labs
     for i, labs in enumerate(sentence_labels(ann1.segments, 16))}
b = {("story", i): labs
     for i, labs in enumerate(sentence_labels(ann2.segments, 16))}
print(f"kappa          {cohen_kappa(a, b):.3f}")
print(f"raw agreement  {raw_agreement(a, b):.3f}")
print(f"span overlap   {span_overlap_agreement(ann1, ann2):.3f}")

merged, queue = auto_merge(ann1, ann2)
print("\nauto-merged:")
for s in merged:
    print(f"  [{s.start:2d}, {s.end:2d}] {sorted(s.labels)}")
print("queued for adjudication:")
for item in queue:
    print(f"  {item.item_id} {item.kind} span {item.span} "
          f"candidates {list(item.candidates)}")

stats = merge_statistics(ann1, ann2, merged, queue)
print(f"{stats['auto_merged_fraction']:.0%} of segment annotations auto-merged")

# a reviewer works through the queue; conflicts take choose:<label>,
# accept_both or discard, single-annotator items take accept or discard
decisions = {}
for item in queue:
    if item.kind == "label_conflict":
        decisions[item.item_id] = "choose:take_bath"
    else:
        decisions[item.item_id] = "accept"
resolved = attach_decisions(queue, decisions)

gold = apply_decisions(merged, resolved)
print("\ngold standard:")
for s in gold:
    print(f"  [{s.start:2d}, {s.end:2d}] {sorted(s.labels)} ({s.source})")

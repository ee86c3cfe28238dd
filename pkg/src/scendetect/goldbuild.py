"""Merging double annotations into a gold standard.

Segments from two annotators that overlap and share a scenario label are
merged automatically to their maximal span. What remains is queued for
adjudication: spans only one annotator marked, and overlapping spans with
conflicting labels. Applying the adjudicator's decisions yields per-document
gold segments in which no two segments sharing a label overlap.
"""

from dataclasses import dataclass

from .corpus import Segment

SINGLE = "single_annotator"
CONFLICT = "label_conflict"

_DECISIONS = ("accept", "discard", "accept_both")   # plus choose:<label>


@dataclass
class AdjudicationItem:
    item_id: str
    kind: str
    doc_id: str
    segments: tuple          # source segments involved, span-sorted
    candidates: tuple        # distinct labels involved, sorted
    decision: str = None

    def __post_init__(self):
        if self.kind not in (SINGLE, CONFLICT):
            raise ValueError(f"unknown item kind {self.kind!r}")
        if self.kind == CONFLICT and len(self.candidates) < 2:
            raise ValueError("label_conflict item needs >= 2 candidate labels")
        if not self.segments:
            raise ValueError("adjudication item without segments")

    @property
    def span(self):
        return (min(s.start for s in self.segments),
                max(s.end for s in self.segments))


def validate_decision(item, decision):
    """Check a decision string against the item's kind and candidates."""
    if decision is None:
        raise ValueError(f"item {item.item_id} is undecided")
    if decision == "discard":
        return
    if item.kind == SINGLE:
        if decision != "accept":
            raise ValueError(
                f"item {item.item_id}: single-annotator items take "
                f"accept or discard, got {decision!r}")
        return
    if decision == "accept_both":
        return
    if decision.startswith("choose:"):
        label = decision[len("choose:"):]
        if label not in item.candidates:
            raise ValueError(
                f"item {item.item_id}: {label!r} is not a candidate "
                f"(candidates: {', '.join(item.candidates)})")
        return
    raise ValueError(
        f"item {item.item_id}: conflicts take choose:<label>, "
        f"accept_both or discard, got {decision!r}")


def _interval_components(rows):
    """Group (start, end, payload) rows into maximal chains of mutually
    overlapping intervals (inclusive ends; adjacency does not connect)."""
    rows = sorted(rows, key=lambda r: (r[0], r[1]))
    out, current, reach = [], [], None
    for row in rows:
        if current and row[0] <= reach:
            current.append(row)
            reach = max(reach, row[1])
        else:
            if current:
                out.append(current)
            current, reach = [row], row[1]
    if current:
        out.append(current)
    return out


def _group_identical_spans(rows, doc_id, source):
    """(start, end, label) rows -> Segments, identical spans sharing one
    multi-label segment."""
    by_span = {}
    for start, end, label in rows:
        by_span.setdefault((start, end), set()).add(label)
    return [
        Segment(doc_id, start, end, frozenset(labels), source)
        for (start, end), labels in sorted(by_span.items())
    ]


def auto_merge(ann1, ann2):
    """Merge two annotators' segments; returns (merged, queue).

    Per label, overlapping same-label segments form chains; chains touched
    by both annotators merge to their span union. Chains seen by only one
    annotator are queued, as single_annotator items when nothing from the
    other annotator overlaps them, and grouped into label_conflict items
    when unmerged spans from the two annotators overlap with different
    labels. Commutative in annotator order up to item ids.
    """
    if ann1.doc_id != ann2.doc_id:
        raise ValueError("annotation sets cover different documents")
    doc_id = ann1.doc_id

    rows_by_label = {}
    for who, ann in ((0, ann1), (1, ann2)):
        for seg in ann.segments:
            for label in seg.labels:
                rows_by_label.setdefault(label, []).append(
                    (seg.start, seg.end, (who, seg)))

    merged_rows = []       # (start, end, label)
    leftovers = []         # (start, end, label, who, segments)
    for label in sorted(rows_by_label):
        for comp in _interval_components(rows_by_label[label]):
            whos = {who for _, _, (who, _) in comp}
            lo = min(r[0] for r in comp)
            hi = max(r[1] for r in comp)
            segs = tuple(seg for _, _, (_, seg) in comp)
            if len(whos) == 2:
                merged_rows.append((lo, hi, label))
            else:
                leftovers.append((lo, hi, label, whos.pop(), segs))

    merged = _group_identical_spans(merged_rows, doc_id, "merged")

    # conflict graph over leftovers: cross-annotator overlap (labels
    # necessarily differ, same-label overlaps merged above)
    n = len(leftovers)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            a, b = leftovers[i], leftovers[j]
            if a[3] != b[3] and a[0] <= b[1] and b[0] <= a[1]:
                parent[find(i)] = find(j)

    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(leftovers[i])

    queue = []
    for group in groups.values():
        segs = tuple(sorted(
            {s for *_, ss in group for s in ss},
            key=lambda s: (s.start, s.end, sorted(s.labels))))
        labels = tuple(sorted({lab for _, _, lab, _, _ in group}))
        kind = CONFLICT if len(group) > 1 else SINGLE
        queue.append((segs, labels, kind))
    queue.sort(key=lambda q: (min(s.start for s in q[0]),
                              max(s.end for s in q[0]), q[2], q[1]))
    items = [
        AdjudicationItem(item_id=f"{doc_id}#{k}", kind=kind, doc_id=doc_id,
                         segments=segs, candidates=labels)
        for k, (segs, labels, kind) in enumerate(queue)
    ]
    return merged, items


def apply_decisions(merged, queue):
    """Resolve a decided queue against the auto-merged segments.

    accept adds a single-annotator span verbatim; choose:<label> keeps one
    label on a conflict's span union; accept_both keeps all candidates;
    discard drops the item. Same-label overlaps introduced by acceptance are
    re-merged, so no two result segments sharing a label overlap.
    """
    undecided = [it.item_id for it in queue if it.decision is None]
    if undecided:
        raise ValueError("undecided adjudication items: " + ", ".join(undecided))
    rows = [(s.start, s.end, lab) for s in merged for lab in s.labels]
    doc_id = merged[0].doc_id if merged else (queue[0].doc_id if queue else None)
    for it in queue:
        validate_decision(it, it.decision)
        if it.decision == "discard":
            continue
        lo, hi = it.span
        if it.decision == "accept":
            labels = it.candidates
        elif it.decision == "accept_both":
            labels = it.candidates
        else:
            labels = (it.decision[len("choose:"):],)
        rows.extend((lo, hi, lab) for lab in labels)

    if not rows:
        return []
    by_label = {}
    for start, end, label in rows:
        by_label.setdefault(label, []).append((start, end, None))
    final_rows = []
    for label in sorted(by_label):
        for comp in _interval_components(by_label[label]):
            final_rows.append((min(r[0] for r in comp),
                               max(r[1] for r in comp), label))
    return _group_identical_spans(final_rows, doc_id, "gold")


# ---------------------------------------------------------------------------
# queue and decision files


def _encode_span(seg):
    if seg.labels:
        labels = "|".join(sorted(seg.labels))
        return f"{seg.start}-{seg.end}={labels}"
    return f"{seg.start}-{seg.end}"


def _decode_span(doc_id, text):
    if "=" in text:
        span, labels = text.split("=", 1)
        label_set = frozenset(labels.split("|"))
    else:
        span, label_set = text, frozenset()
    start, end = span.split("-", 1)
    return Segment(doc_id, int(start), int(end), label_set, "queued")


def write_queue(path, items):
    """item_id, kind, doc_id, spans, candidates; tab-separated."""
    for it in items:
        for seg in it.segments:
            for label in seg.labels:
                if any(c in label for c in "\t;|=-"):
                    raise ValueError(f"label {label!r} not encodable")
    with open(path, "w", encoding="utf-8") as fh:
        for it in items:
            spans = ";".join(_encode_span(s) for s in it.segments)
            fh.write("\t".join(
                (it.item_id, it.kind, it.doc_id, spans,
                 ",".join(it.candidates))) + "\n")


def read_queue(path):
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields")
            item_id, kind, doc_id, spans, candidates = parts
            segs = tuple(_decode_span(doc_id, s) for s in spans.split(";"))
            items.append(AdjudicationItem(
                item_id=item_id, kind=kind, doc_id=doc_id, segments=segs,
                candidates=tuple(candidates.split(","))))
    return items


def write_decisions(path, queue):
    with open(path, "w", encoding="utf-8") as fh:
        for it in queue:
            if it.decision is not None:
                fh.write(f"{it.item_id}\t{it.decision}\n")


def load_decisions(path):
    """item_id -> decision string."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected item_id<TAB>decision")
            if parts[0] in out:
                raise ValueError(f"{path}:{lineno}: duplicate decision for {parts[0]}")
            out[parts[0]] = parts[1]
    return out


def attach_decisions(queue, decisions):
    """Return the queue with decisions filled in; unknown ids are an error."""
    known = {it.item_id for it in queue}
    unknown = sorted(set(decisions) - known)
    if unknown:
        raise ValueError("decisions for unknown items: " + ", ".join(unknown))
    out = []
    for it in queue:
        decision = decisions.get(it.item_id, it.decision)
        if decision is not None:
            validate_decision(it, decision)
        out.append(AdjudicationItem(
            item_id=it.item_id, kind=it.kind, doc_id=it.doc_id,
            segments=it.segments, candidates=it.candidates,
            decision=decision))
    return out


def merge_statistics(ann1, ann2, merged, queue):
    """Share of input segment annotations that merged automatically."""
    total = len(ann1.segments) + len(ann2.segments)
    queued = {s for it in queue for s in it.segments}
    n_queued = sum(
        1 for ann in (ann1, ann2) for s in ann.segments if s in queued)
    return {
        "input_segments": total,
        "merged_segments": len(merged),
        "queued_items": len(queue),
        "auto_merged_fraction": (total - n_queued) / total if total else 0.0,
    }

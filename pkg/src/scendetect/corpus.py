"""Corpus model and I/O: documents, segments, annotation sets, synthetic data.

Documents are sentence-segmented narratives. A Segment is a contiguous,
inclusive sentence span [start, end] carrying a set of scenario labels.
All files are UTF-8, one JSON record per line unless noted otherwise.
"""

import json
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

NONE_LABEL = "NONE"

# Small fallback inventory of English function words. Real runs normally pass
# an explicit stopword file; this keeps demos and tests self-contained.
DEFAULT_STOPWORDS = frozenset("""
a about after all an and any are as at be been before but by can could did do
does for from had has have he her here him his how i if in into is it its just
me my no not of on one or our out over she so some than that the their them
then there these they this to up was we were what when where which who will
with would you your
""".split())

_SUFFIXES = ("ing", "ed", "es", "s", "ly")
_MIN_STEM = 3


@dataclass(frozen=True)
class Sentence:
    """One sentence: position in its document, raw text, derived token views."""

    index: int
    text: str
    raw_tokens: tuple = ()
    content_lemmas: tuple = ()


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("document must have a non-empty doc_id")
        if not self.sentences:
            raise ValueError(f"document {self.doc_id!r} has no sentences")
        for pos, sent in enumerate(self.sentences):
            if sent.index != pos:
                raise ValueError(
                    f"document {self.doc_id!r}: sentence at position {pos} "
                    f"has index {sent.index}"
                )

    def __len__(self):
        return len(self.sentences)


@dataclass(frozen=True)
class Segment:
    """Inclusive sentence span [start, end] with a label set.

    labels may be empty only for sources that do not classify (e.g. the
    pure segmenter); NONE must not be mixed with scenario labels.
    """

    doc_id: str
    start: int
    end: int
    labels: frozenset = frozenset()
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "labels", frozenset(self.labels))
        if self.start < 0 or self.end < self.start:
            raise ValueError(
                f"bad span [{self.start}, {self.end}] in {self.doc_id!r}"
            )
        if NONE_LABEL in self.labels and len(self.labels) > 1:
            raise ValueError(
                f"{self.doc_id!r}: {NONE_LABEL} cannot be mixed with scenario labels"
            )

    def __len__(self):
        return self.end - self.start + 1

    def overlaps(self, other):
        return self.doc_id == other.doc_id and not (
            self.end < other.start or other.end < self.start
        )


@dataclass(frozen=True)
class AnnotationSet:
    """All segments one annotator produced for one document."""

    doc_id: str
    annotator: str
    segments: tuple = ()

    def __post_init__(self):
        for seg in self.segments:
            if seg.doc_id != self.doc_id:
                raise ValueError(
                    f"segment doc {seg.doc_id!r} != annotation set doc {self.doc_id!r}"
                )


class ScenarioCatalog:
    """Ordered label inventory. Ids are identifier-safe; NONE is reserved."""

    def __init__(self, entries):
        self.ids = []
        self.names = {}
        for label_id, name in entries:
            if label_id == NONE_LABEL:
                raise ValueError(f"{NONE_LABEL} is reserved and cannot be cataloged")
            if label_id in self.names:
                raise ValueError(f"duplicate scenario id {label_id!r}")
            self.ids.append(label_id)
            self.names[label_id] = name
        if not self.ids:
            raise ValueError("catalog is empty")

    def __contains__(self, label_id):
        return label_id in self.names

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)


def tokenize(text):
    """Whitespace-split after peeling leading/trailing punctuation into
    separate tokens. Inner punctuation (don't, e-mail) is left alone."""
    tokens = []
    for chunk in text.split():
        lead = []
        while chunk and not chunk[0].isalnum():
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail = []
        while chunk and not chunk[-1].isalnum():
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


def stem(word):
    """Strip the first matching suffix of -ing/-ed/-es/-s/-ly, provided at
    least 3 characters remain. One pass only."""
    for suffix in _SUFFIXES:
        if word.endswith(suffix) and len(word) - len(suffix) >= _MIN_STEM:
            return word[: -len(suffix)]
    return word


def content_lemmas(raw_tokens, stopwords):
    lemmas = []
    for token in raw_tokens:
        low = token.lower()
        if low in stopwords:
            continue
        if not any(c.isalpha() for c in low):
            continue
        lemmas.append(stem(low))
    return tuple(lemmas)


def make_sentence(index, text, stopwords=None):
    raw = tuple(tokenize(text))
    lemmas = () if stopwords is None else content_lemmas(raw, stopwords)
    return Sentence(index=index, text=text, raw_tokens=raw, content_lemmas=lemmas)


def preprocess(doc, stopwords=DEFAULT_STOPWORDS):
    """Return a copy of doc with content_lemmas filled on every sentence:
    lowercase, stopwords dropped, tokens without any letter dropped, suffix
    stripped. Idempotent for a fixed stopword set."""
    new_sents = tuple(
        replace(s, content_lemmas=content_lemmas(s.raw_tokens, stopwords))
        for s in doc.sentences
    )
    return Document(doc_id=doc.doc_id, sentences=new_sents)


# ---------------------------------------------------------------------------
# file formats


def load_corpus(path):
    """Read a corpus file: one {"doc_id": ..., "sentences": [...]} per line."""
    docs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: bad JSON ({exc})") from None
            doc_id = rec.get("doc_id")
            sentences = rec.get("sentences")
            if not doc_id or not isinstance(sentences, list):
                raise ValueError(f"{path}:{lineno}: need doc_id and sentences")
            if doc_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            if not sentences:
                raise ValueError(f"{path}:{lineno}: document {doc_id!r} has no sentences")
            seen.add(doc_id)
            docs.append(
                Document(
                    doc_id=doc_id,
                    sentences=tuple(
                        make_sentence(i, text) for i, text in enumerate(sentences)
                    ),
                )
            )
    return docs


def write_corpus(docs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            rec = {"doc_id": doc.doc_id, "sentences": [s.text for s in doc.sentences]}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_catalog(path):
    """Read a scenario catalog: one `label_id<TAB>name` per line."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected label_id<TAB>name")
            entries.append((parts[0], parts[1]))
    return ScenarioCatalog(entries)


def write_catalog(catalog, path):
    with open(path, "w", encoding="utf-8") as fh:
        for label_id in catalog.ids:
            fh.write(f"{label_id}\t{catalog.names[label_id]}\n")


def load_stopwords(path):
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


def load_annotations(path, catalog=None, allow_empty_labels=False):
    """Read an annotation file: one JSON record per line with doc_id,
    annotator, start, end, labels. Returns segments in file order."""
    segments = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: bad JSON ({exc})") from None
            try:
                labels = frozenset(rec["labels"])
                seg = Segment(
                    doc_id=rec["doc_id"],
                    start=int(rec["start"]),
                    end=int(rec["end"]),
                    labels=labels,
                    source=rec["annotator"],
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if not labels and not allow_empty_labels:
                raise ValueError(f"{path}:{lineno}: segment has no labels")
            if catalog is not None:
                for lab in labels:
                    if lab != NONE_LABEL and lab not in catalog:
                        raise ValueError(f"{path}:{lineno}: unknown label {lab!r}")
            segments.append(seg)
    return segments


def write_annotations(segments, path):
    with open(path, "w", encoding="utf-8") as fh:
        for seg in segments:
            rec = {
                "doc_id": seg.doc_id,
                "annotator": seg.source,
                "start": seg.start,
                "end": seg.end,
                "labels": sorted(seg.labels),
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def group_annotations(segments):
    """Group a flat segment list into AnnotationSets keyed (doc_id, annotator),
    preserving first-seen order."""
    grouped = {}
    for seg in segments:
        grouped.setdefault((seg.doc_id, seg.source), []).append(seg)
    return {
        key: AnnotationSet(doc_id=key[0], annotator=key[1], segments=tuple(segs))
        for key, segs in grouped.items()
    }


def validate_against(segments, docs):
    """Check every segment's span fits its document. Raises ValueError."""
    bounds = {d.doc_id: len(d) for d in docs}
    for seg in segments:
        n = bounds.get(seg.doc_id)
        if n is None:
            raise ValueError(f"segment references unknown document {seg.doc_id!r}")
        if seg.end >= n:
            raise ValueError(
                f"{seg.doc_id!r}: span [{seg.start}, {seg.end}] exceeds {n} sentences"
            )


# ---------------------------------------------------------------------------
# synthetic corpora


def scenario_vocab(catalog, words_per_scenario):
    """Pairwise-disjoint synthetic vocabularies, one block per scenario.
    Tokens are letter+digit shaped so they survive preprocessing unchanged."""
    return {
        label: [f"s{i:03d}w{j:03d}" for j in range(words_per_scenario)]
        for i, label in enumerate(catalog.ids)
    }


def generate_synthetic_corpus(
    catalog,
    words_per_scenario=40,
    docs_per_scenario=20,
    sentences_per_doc=8,
    words_per_sentence=8,
    seed=0,
    common_vocab=0,
    common_fraction=0.0,
):
    """Single-scenario documents drawn from disjoint per-scenario vocabularies.

    With common_vocab > 0, each word slot is replaced by a shared noise token
    with probability common_fraction, which makes isolated sentences ambiguous
    while whole documents stay identifiable. Defaults keep vocabularies fully
    disjoint. Returns (documents, gold annotation sets), deterministic in seed.
    """
    if not 0.0 <= common_fraction <= 1.0:
        raise ValueError("common_fraction must be in [0, 1]")
    if common_fraction > 0.0 and common_vocab <= 0:
        raise ValueError("common_fraction > 0 requires common_vocab > 0")
    rng = np.random.default_rng(seed)
    blocks = scenario_vocab(catalog, words_per_scenario)
    shared = [f"c{j:03d}" for j in range(common_vocab)]
    docs, gold = [], []
    for label in catalog.ids:
        block = blocks[label]
        for d in range(docs_per_scenario):
            doc_id = f"{label}_{d:03d}"
            sents = []
            for s in range(sentences_per_doc):
                words = []
                for _ in range(words_per_sentence):
                    if shared and rng.random() < common_fraction:
                        words.append(shared[rng.integers(len(shared))])
                    else:
                        words.append(block[rng.integers(len(block))])
                sents.append(make_sentence(s, " ".join(words), stopwords=frozenset()))
            doc = Document(doc_id=doc_id, sentences=tuple(sents))
            docs.append(doc)
            gold.append(
                AnnotationSet(
                    doc_id=doc_id,
                    annotator="gold",
                    segments=(
                        Segment(doc_id, 0, sentences_per_doc - 1,
                                frozenset([label]), "gold"),
                    ),
                )
            )
    return docs, gold


def _mix_seed(seed, text):
    # stable per-document stream independent of input order
    return (int(seed) ^ zlib.crc32(text.encode("utf-8"))) & 0x7FFFFFFF


def concat_documents(docs, seed=0, labels=None, doc_id=None):
    """Concatenate documents in an order shuffled by seed; returns the merged
    document plus one truth Segment per source span. labels, if given, is a
    per-source-document label set aligned with docs (pre-shuffle)."""
    if not docs:
        raise ValueError("nothing to concatenate")
    if labels is not None and len(labels) != len(docs):
        raise ValueError("labels must align with docs")
    order = np.random.default_rng(seed).permutation(len(docs))
    sents, spans = [], []
    cursor = 0
    new_id = doc_id or "+".join(docs[i].doc_id for i in order)
    for i in order:
        src = docs[i]
        for s in src.sentences:
            sents.append(replace(s, index=cursor + s.index))
        span_labels = frozenset(labels[i]) if labels is not None else frozenset()
        spans.append(
            Segment(new_id, cursor, cursor + len(src) - 1, span_labels, "truth")
        )
        cursor += len(src)
    return Document(doc_id=new_id, sentences=tuple(sents)), spans

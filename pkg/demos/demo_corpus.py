"""
Corpus handling: preprocessing, synthetic generation, concatenation
===================================================================

Documents are sentence lists; preprocessing lowercases, drops stopwords
and strips inflectional endings to produce the content lemmas every other
component consumes.
"""

import tempfile
from pathlib import Path

from scendetect import (
    ScenarioCatalog,
    concat_documents,
    generate_synthetic_corpus,
    load_corpus,
    preprocess,
    tokenize,
    stem,
    write_corpus,
)

print("tokenize:", tokenize("She was washing her hair, twice!"))
print("stem:", [stem(w) for w in ("washing", "washed", "washes", "walks", "slowly")])

# a tiny catalog of everyday scenarios
catalog = ScenarioCatalog([
    ("wash_hair", "washing ones hair"),
    ("take_bath", "taking a bath"),
    ("make_tea", "preparing tea"),
])

# each synthetic document narrates exactly one scenario with its own vocabulary
docs, gold = generate_synthetic_corpus(
    catalog, words_per_scenario=30, docs_per_scenario=2,
    sentences_per_doc=4, words_per_sentence=6, seed=0)
print(f"\n{len(docs)} documents, e.g. {docs[0].doc_id}:")
for s in docs[0].sentences[:2]:
    print(" ", s.text)
print("gold labels:", sorted(next(iter(gold[0].segments)).labels))

# preprocessing is idempotent and fills content_lemmas in place of raw text
doc = preprocess(docs[0])
print("lemmas of sentence 0:", doc.sentences[0].content_lemmas)

# concatenating single-scenario documents yields multi-scenario text with
# known true spans, the raw material for segmentation experiments
merged, truth = concat_documents(
    [docs[0], docs[2], docs[4]], seed=7, doc_id="mixed",
    labels=[{"wash_hair"}, {"take_bath"}, {"make_tea"}])
print(f"\nconcatenated into {len(merged.sentences)} sentences; true spans:")
for seg in truth:
    print(f"  [{seg.start:2d}, {seg.end:2d}] {sorted(seg.labels)}")

# round trip through the JSONL corpus format
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "corpus.jsonl"
    write_corpus(docs, path)
    again = load_corpus(path)
    print("\nround trip ok:", [d.doc_id for d in again] == [d.doc_id for d in docs])

"""
Topic modeling with collapsed Gibbs sampling
============================================

Train a small LDA model on single-scenario documents and watch the topics
align with the scenario vocabularies. Inference on new text is fold-in:
model counts stay frozen, topic assignments are resampled locally and the
majority vote over the last half of the sweeps wins.
"""

import numpy as np

from scendetect import (
    ScenarioCatalog,
    document_topic_proportions,
    generate_synthetic_corpus,
    scenario_topics,
    sentence_topic_vector,
    train_lda,
)

catalog = ScenarioCatalog([(f"s{i}", f"scenario {i}") for i in range(3)])
docs, gold = generate_synthetic_corpus(
    catalog, words_per_scenario=40, docs_per_scenario=8,
    sentences_per_doc=6, words_per_sentence=8, seed=1)

model = train_lda(docs, K=3, iterations=50, seed=0)
print(f"V={model.V} words, K={model.K} topics")

# rows of the topic-word distribution are proper distributions
dist = model.topic_word_dist()
print("row sums:", np.round(dist.sum(axis=1), 6))

# with disjoint vocabularies each document should concentrate on one topic
by_label = {}
for doc, ann in zip(docs, gold):
    (label,) = next(iter(ann.segments)).labels
    props = document_topic_proportions(model, doc, iterations=20, seed=4)
    by_label.setdefault(label, []).append(int(np.argmax(props)))
for label, topics in sorted(by_label.items()):
    print(f"{label}: dominant topics {topics}")

# per-sentence topic vectors are the segmenter's input representation
vec = sentence_topic_vector(model, docs[0].sentences[0], iterations=20, seed=4)
print("sentence topic vector:", np.round(vec, 3))

# the most characteristic words per scenario via its prevalent topics
grouped = {}
for doc, ann in zip(docs, gold):
    (label,) = next(iter(ann.segments)).labels
    grouped.setdefault(label, []).append(doc)
for label, words in sorted(scenario_topics(model, grouped, top_n=2).items()):
    print(f"{label}: characteristic words {words}")

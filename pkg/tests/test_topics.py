"""LDA training, fold-in inference, sentence vectors, scenario topics."""

import numpy as np
import pytest

from scendetect.corpus import ScenarioCatalog, generate_synthetic_corpus, preprocess
from scendetect.corpus import Document
from scendetect import topics
from scendetect.topics import (
    LdaModel,
    infer_word_topics,
    load_lda,
    save_lda,
    scenario_topics,
    sentence_topic_vector,
    train_lda,
)
from tests.test_corpus import make_doc


def tiny_corpus():
    cat = ScenarioCatalog([("s1", "one"), ("s2", "two")])
    docs, gold = generate_synthetic_corpus(
        cat, words_per_scenario=12, docs_per_scenario=8,
        sentences_per_doc=5, words_per_sentence=6, seed=11,
    )
    return cat, docs, gold


class TestTrain:
    def test_single_word_point_mass(self):
        docs = [make_doc("d", ["hello hello", "hello"])]
        model = train_lda(docs, K=1, iterations=5, seed=0)
        dist = model.topic_word_dist()
        assert dist.shape == (1, 1)
        np.testing.assert_allclose(dist[0, 0], 1.0)

    def test_count_conservation(self):
        _, docs, _ = tiny_corpus()
        model = train_lda(docs, K=3, iterations=10, seed=2, check_invariants=True)
        total = sum(len(s.content_lemmas) for d in docs for s in d.sentences)
        assert int(model.topic_totals.sum()) == total
        assert np.array_equal(model.topic_word_counts.sum(axis=1), model.topic_totals)

    def test_rows_sum_to_one(self):
        _, docs, _ = tiny_corpus()
        model = train_lda(docs, K=4, iterations=10, seed=3)
        np.testing.assert_allclose(model.topic_word_dist().sum(axis=1), 1.0,
                                   atol=1e-9)

    def test_deterministic(self):
        _, docs, _ = tiny_corpus()
        a = train_lda(docs, K=3, iterations=10, seed=5)
        b = train_lda(docs, K=3, iterations=10, seed=5)
        assert np.array_equal(a.topic_word_counts, b.topic_word_counts)

    def test_no_trainable_tokens(self):
        doc = make_doc("d", ["the of"])
        doc = preprocess(doc, stopwords=frozenset({"the", "of"}))
        with pytest.raises(ValueError, match="no trainable tokens"):
            train_lda([doc], K=2, iterations=3, seed=0)

    def test_bad_hyperparameters(self):
        docs = [make_doc("d", ["a b c"])]
        with pytest.raises(ValueError):
            train_lda(docs, K=0, iterations=3, seed=0)
        with pytest.raises(ValueError):
            train_lda(docs, K=2, alpha=-1.0, iterations=3, seed=0)

    def test_disjoint_vocab_recovery(self):
        cat, docs, _ = tiny_corpus()
        model = train_lda(docs, K=2, iterations=120, seed=4)
        dist = model.topic_word_dist()
        # each topic's mass should concentrate on one scenario block
        for k in range(2):
            top = np.argsort(-dist[k])[:10]
            prefixes = {model.words[i][:4] for i in top}
            assert len(prefixes) == 1


class TestInference:
    def test_point_mass_assignment(self):
        docs = [make_doc("d", ["alpha alpha beta beta"])]
        model = train_lda(docs, K=2, iterations=30, seed=1)
        sent = make_doc("q", ["alpha beta alpha"]).sentences[0]
        assigned = infer_word_topics(model, sent, iterations=10, seed=0)
        assert [w for w, _ in assigned] == ["alpha", "beta", "alpha"]
        for _, k in assigned:
            assert k in (0, 1)

    def test_oov_omitted_and_empty(self):
        docs = [make_doc("d", ["alpha beta"])]
        model = train_lda(docs, K=2, iterations=5, seed=1)
        sent = make_doc("q", ["gamma delta"]).sentences[0]
        assert infer_word_topics(model, sent, iterations=5, seed=0) == []

    def test_deterministic(self):
        _, docs, _ = tiny_corpus()
        model = train_lda(docs, K=3, iterations=20, seed=5)
        sent = docs[0].sentences[0]
        a = infer_word_topics(model, sent, iterations=20, seed=9)
        b = infer_word_topics(model, sent, iterations=20, seed=9)
        assert a == b


class TestSentenceVector:
    def test_normalization(self):
        _, docs, _ = tiny_corpus()
        model = train_lda(docs, K=3, iterations=20, seed=5)
        vec = sentence_topic_vector(model, docs[0].sentences[0], seed=1)
        assert vec.shape == (3,)
        np.testing.assert_allclose(vec.sum(), 1.0)
        assert (vec >= 0).all()

    def test_zero_vector_without_vocab(self):
        docs = [make_doc("d", ["alpha beta"])]
        model = train_lda(docs, K=2, iterations=5, seed=1)
        sent = make_doc("q", ["zz yy"]).sentences[0]
        assert sentence_topic_vector(model, sent).sum() == 0.0

    def test_histogram_semantics(self):
        # hand-built model: one topic per word, massive counts -> frozen winners
        counts = np.array([[500, 0], [0, 500]], dtype=np.int64)
        model = LdaModel(K=2, alpha=0.01, beta=0.01, words=["aa", "bb"],
                         vocab={"aa": 0, "bb": 1}, topic_word_counts=counts,
                         topic_totals=counts.sum(axis=1), seed=0)
        sent = make_doc("q", ["aa bb"]).sentences[0]
        vec = sentence_topic_vector(model, sent, iterations=20, seed=3)
        np.testing.assert_allclose(vec, [0.5, 0.5])


class TestScenarioTopics:
    def test_single_topic_top_words(self):
        docs = [make_doc("d", ["pizza pizza order delivery"])]
        model = train_lda(docs, K=1, iterations=10, seed=0)
        out = scenario_topics(model, {"s": docs}, top_n=2)
        assert out["s"][0] == "pizza"

    def test_disjoint_blocks_stay_separate(self):
        cat, docs, gold = tiny_corpus()
        model = train_lda(docs, K=2, iterations=120, seed=4)
        by_scenario = {}
        for doc, ann in zip(docs, gold):
            (label,) = next(iter(ann.segments)).labels
            by_scenario.setdefault(label, []).append(doc)
        out = scenario_topics(model, by_scenario, top_n=8, seed=2)
        for i, label in enumerate(cat):
            prefix = f"s{i:03d}"
            assert all(w.startswith(prefix) for w in out[label]), out[label]


class TestModelIO:
    def test_round_trip_bit_exact(self, tmp_path):
        _, docs, _ = tiny_corpus()
        model = train_lda(docs, K=3, iterations=10, seed=6)
        p = tmp_path / "lda.json"
        save_lda(model, p)
        back = load_lda(p)
        assert back.K == model.K
        assert back.alpha == model.alpha and back.beta == model.beta
        assert back.words == model.words
        assert np.array_equal(back.topic_word_counts, model.topic_word_counts)
        assert np.array_equal(back.topic_totals, model.topic_totals)

    def test_reject_foreign_file(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text('{"format": "other"}')
        with pytest.raises(ValueError, match="not a topic model"):
            load_lda(p)

"""MLP training, gradients, entropy gating, baselines, model round-trip."""

import math

import numpy as np
import pytest

from scendetect.corpus import (
    NONE_LABEL,
    ScenarioCatalog,
    generate_synthetic_corpus,
)
from scendetect.classifier import (
    TrainConfig,
    baseline_predict,
    classify_bag,
    entropy_gate,
    init_mlp,
    load_classifier,
    mlp_loss_and_grads,
    predict_scores,
    rank_labels,
    save_classifier,
    score_entropy,
    train_classifier,
    train_mlp,
)
from scendetect.features import fit_vocab, vectorize
from tests.test_corpus import make_doc


def numeric_grads(mlp, X, y, step=1e-5):
    import copy
    out = {}
    for name in ("W1", "b1", "W2", "b2"):
        value = getattr(mlp, name)
        if name == "b2":
            grads = np.zeros(1)
            for sign in (1, -1):
                probe = copy.deepcopy(mlp)
                probe.b2 = value + sign * step
                loss, _ = mlp_loss_and_grads(probe, X, y)
                grads[0] += sign * loss
            out[name] = grads[0] / (2 * step)
            continue
        grad = np.zeros_like(value)
        it = np.nditer(value, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            probe = copy.deepcopy(mlp)
            getattr(probe, name)[idx] = value[idx] + step
            up, _ = mlp_loss_and_grads(probe, X, y)
            getattr(probe, name)[idx] = value[idx] - step
            down, _ = mlp_loss_and_grads(probe, X, y)
            grad[idx] = (up - down) / (2 * step)
            it.iternext()
        out[name] = grad
    return out


def rel_err(a, b):
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-10)
    return float(np.max(np.abs(a - b) / denom))


def synthetic_training(seed=13):
    cat = ScenarioCatalog([("s1", "one"), ("s2", "two")])
    docs, gold = generate_synthetic_corpus(
        cat, words_per_scenario=15, docs_per_scenario=12,
        sentences_per_doc=4, words_per_sentence=6, seed=seed,
    )
    bags, labels = [], []
    for doc, ann in zip(docs, gold):
        bag = [w for s in doc.sentences for w in s.content_lemmas]
        bags.append(bag)
        labels.append(next(iter(ann.segments)).labels)
    vocab = fit_vocab(bags)
    segments = [(vectorize(vocab, b), labs) for b, labs in zip(bags, labels)]
    return cat, vocab, segments


class TestGradients:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            mlp = init_mlp(5, 4, rng, dropout_rate=0.0)
            X = rng.normal(size=(3, 5))
            y = rng.integers(0, 2, size=3).astype(np.float64)
            _, grads = mlp_loss_and_grads(mlp, X, y)
            numeric = numeric_grads(mlp, X, y)
            for name in grads:
                assert rel_err(grads[name], numeric[name]) < 1e-4, name

    def test_loss_decreases_on_separable_data(self):
        rng = np.random.default_rng(1)
        X = np.vstack([np.eye(4)[:2], np.eye(4)[2:]])
        y = np.array([1.0, 1.0, 0.0, 0.0])
        config = TrainConfig(hidden=8, dropout=0.0, learning_rate=1e-2,
                             epochs=40, batch_size=4, seed=0)
        _, losses = train_mlp(X, y, config, rng, collect_loss=True)
        assert losses[-1] < losses[0]
        for a, b in zip(losses, losses[1:]):
            assert b <= a + 1e-6


class TestTrainClassifier:
    def test_separable_training_accuracy(self):
        cat, vocab, segments = synthetic_training()
        clf = train_classifier(segments, cat, vocab,
                               TrainConfig(hidden=16, epochs=50, seed=3))
        correct = 0
        for fv, labels in segments:
            ranked = rank_labels(clf, predict_scores(clf, fv))
            correct += ranked[0][0] in labels
        assert correct == len(segments)

    def test_deterministic(self):
        cat, vocab, segments = synthetic_training()
        config = TrainConfig(hidden=8, epochs=5, seed=9)
        a = train_classifier(segments, cat, vocab, config)
        b = train_classifier(segments, cat, vocab, config)
        for lab in a.models:
            assert np.array_equal(a.models[lab].W1, b.models[lab].W1)
            assert a.models[lab].b2 == b.models[lab].b2

    def test_empty_training_set(self):
        cat = ScenarioCatalog([("s1", "one")])
        vocab = fit_vocab([["a"]])
        with pytest.raises(ValueError, match="empty training set"):
            train_classifier([], cat, vocab)

    def test_degenerate_label_warns_and_ranks_last(self):
        cat = ScenarioCatalog([("s1", "one"), ("s2", "two"), ("ghost", "never")])
        _, vocab, segments = (lambda t: (t[0], t[1], t[2]))(synthetic_training())
        with pytest.warns(UserWarning, match="ghost"):
            clf = train_classifier(segments, cat, vocab,
                                   TrainConfig(hidden=8, epochs=5, seed=1))
        assert "ghost" in clf.degenerate
        scores = predict_scores(clf, segments[0][0])
        assert 0.0 < scores["ghost"] < 0.01
        ranked = rank_labels(clf, scores)
        assert all(lab != "ghost" for lab, _ in ranked)

    def test_scores_in_open_interval(self):
        cat, vocab, segments = synthetic_training()
        clf = train_classifier(segments, cat, vocab,
                               TrainConfig(hidden=8, epochs=3, seed=2))
        empty = vectorize(vocab, ["zzz"])
        for score in predict_scores(clf, empty).values():
            assert 0.0 < score < 1.0


class TestEntropyGate:
    def test_one_hot_distribution(self):
        is_none, norm = entropy_gate({"a": 1.0, "b": 0.0, "c": 0.0}, 0.5)
        assert not is_none
        assert norm["a"] == 1.0

    def test_uniform_200_labels(self):
        scores = {f"l{i:03d}": 0.4 for i in range(200)}
        h, _ = score_entropy(scores)
        assert h == pytest.approx(math.log(200))
        is_none, _ = entropy_gate(scores, math.log(200) - 0.01)
        assert is_none

    def test_two_equal_scores(self):
        h, _ = score_entropy({"a": 0.7, "b": 0.7, "c": 0.0})
        assert h == pytest.approx(math.log(2))

    def test_all_zero_fallback_uniform(self):
        is_none, norm = entropy_gate({"a": 0.0, "b": 0.0}, 0.1)
        assert is_none
        assert norm == {"a": 0.5, "b": 0.5}

    def test_scale_invariance(self):
        scores = {"a": 0.2, "b": 0.5, "c": 0.1}
        h1, n1 = score_entropy(scores)
        h2, n2 = score_entropy({k: 7.3 * v for k, v in scores.items()})
        assert h1 == pytest.approx(h2)
        for k in scores:
            assert n1[k] == pytest.approx(n2[k])

    def test_gate_monotone_in_threshold(self):
        scores = {"a": 0.9, "b": 0.3, "c": 0.2}
        h, _ = score_entropy(scores)
        gated = [entropy_gate(scores, t)[0] for t in np.linspace(0, math.log(3), 20)]
        # once the threshold passes H, gating turns off and stays off
        assert gated == sorted(gated, reverse=True)

    def test_needs_two_labels(self):
        with pytest.raises(ValueError):
            entropy_gate({"a": 1.0}, 0.5)

    def test_entropy_bounds(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            scores = {f"l{i}": float(v) for i, v in enumerate(rng.random(6))}
            h, _ = score_entropy(scores)
            assert 0.0 <= h <= math.log(6) + 1e-12


@pytest.fixture(scope="module")
def trained():
    cat, vocab, segments = synthetic_training()
    return train_classifier(segments, cat, vocab,
                            TrainConfig(hidden=8, epochs=10, seed=4))


class TestBaselines:
    def test_sent_maj_constant(self):
        doc = make_doc("d", ["a", "b", "c"])
        res = baseline_predict("sent_maj", doc, majority_label="M")
        assert len(res.sentences) == 3
        for pred in res.sentences:
            assert pred.ranked[0][0] == "M" and not pred.is_none

    def test_sent_tfidf_segment_count(self, trained):
        doc = make_doc("d", ["s000w001 s000w002", "s001w001", "s000w003"])
        res = baseline_predict("sent_tfidf", doc, clf=trained)
        assert len(res.segments) == len(doc.sentences)
        for seg in res.segments:
            assert seg.start == seg.end

    def test_random_tfidf_deterministic(self, trained):
        doc = make_doc("d", [f"s000w{i:03d}" for i in range(9)])
        a = baseline_predict("random_tfidf", doc, clf=trained,
                             mean_segment_length=3.0, seed=7)
        b = baseline_predict("random_tfidf", doc, clf=trained,
                             mean_segment_length=3.0, seed=7)
        assert a.segments == b.segments

    def test_random_tfidf_segment_count(self, trained):
        doc = make_doc("d", [f"s000w{i:03d}" for i in range(9)])
        res = baseline_predict("random_tfidf", doc, clf=trained,
                               mean_segment_length=3.0, seed=7)
        assert len(res.segments) == 3
        assert res.segments[0].start == 0 and res.segments[-1].end == 8

    def test_unknown_strategy(self):
        doc = make_doc("d", ["a"])
        with pytest.raises(ValueError, match="unknown baseline"):
            baseline_predict("nope", doc, majority_label="M")


class TestModelIO:
    def test_round_trip_bit_exact(self, tmp_path):
        cat, vocab, segments = synthetic_training()
        clf = train_classifier(segments, cat, vocab,
                               TrainConfig(hidden=8, epochs=5, seed=6))
        p = tmp_path / "clf.json"
        save_classifier(clf, p)
        back = load_classifier(p)
        assert back.entropy_threshold == clf.entropy_threshold
        assert back.degenerate == clf.degenerate
        assert back.vocab.index == clf.vocab.index
        for lab in clf.models:
            for name in ("W1", "b1", "W2"):
                assert np.array_equal(getattr(back.models[lab], name),
                                      getattr(clf.models[lab], name))
            assert back.models[lab].b2 == clf.models[lab].b2

    def test_classify_bag_stable_through_io(self, tmp_path):
        cat, vocab, segments = synthetic_training()
        clf = train_classifier(segments, cat, vocab,
                               TrainConfig(hidden=8, epochs=5, seed=6))
        p = tmp_path / "clf.json"
        save_classifier(clf, p)
        back = load_classifier(p)
        bag = ["s000w001", "s000w002"]
        assert classify_bag(clf, bag) == classify_bag(back, bag)

    def test_reject_foreign_file(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text('{"format": "other"}')
        with pytest.raises(ValueError, match="not a classifier"):
            load_classifier(p)

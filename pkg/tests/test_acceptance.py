"""Acceptance suite: one test per shipped guarantee, each a single
pass/fail line under pytest -v. Runtime budgets are asserted inside the
tests; tolerances are stated next to each check."""

import itertools
import json
import math
import time

import numpy as np
import pytest

from scendetect.cli import replay_manifest, run_command
from scendetect.classifier import (
    TrainConfig,
    baseline_predict,
    init_mlp,
    mlp_loss_and_grads,
    train_classifier,
)
from scendetect.corpus import (
    NONE_LABEL,
    AnnotationSet,
    ScenarioCatalog,
    Segment,
    concat_documents,
    generate_synthetic_corpus,
)
from scendetect.evaluation import (
    boundaries_from_segments,
    cohen_kappa,
    pk,
    pmi,
    raw_agreement,
    sentence_prf,
    window_diff,
)
from scendetect.features import fit_vocab, vectorize
from scendetect.goldbuild import auto_merge
from scendetect.pipeline import detect, majority_label, mean_segment_length
from scendetect.segmenter import SegmentationParams, segment
from scendetect.topics import document_topic_proportions, train_lda

from tests.test_classifier import numeric_grads


def doc_bag(doc):
    return [w for s in doc.sentences for w in s.content_lemmas]


# ---------------------------------------------------------------------------
# 1. fractional sentence scoring


def _oracle_prf(gold, pred):
    """Deliberately naive re-implementation used only as an oracle."""
    tp = fp = fn = 0.0
    for key, g in gold.items():
        g = set(g) if g else {"NONE"}
        ranked, is_none = pred[key]
        names = [r[0] if isinstance(r, tuple) else r for r in ranked]
        p = {"NONE"} if is_none else set(names[: len(g)])
        for label in g:
            if label in p:
                tp += 1.0 / len(g)
            else:
                fn += 1.0 / len(g)
        for label in p:
            if label not in g:
                fp += 1.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return tp, fp, fn, precision, recall, f1


def test_01_fractional_scoring_matches_brute_force_oracle():
    started = time.monotonic()

    # two gold labels, top-2 prediction shares one: bit-exact half credit
    gold = {("d", 0): {"washing_ones_hair", "taking_a_bath"}}
    pred = {("d", 0): ((("taking_a_bath", 0.9),
                        ("getting_ready_for_bed", 0.4)), False)}
    report = sentence_prf(gold, pred)
    assert report.counts.tp == 0.5
    assert report.counts.fn == 0.5
    assert report.counts.fp == 1.0

    labels = ["a", "b", "c", "d", "e", "f"]
    rng = np.random.default_rng(12345)
    for _ in range(1000):
        n_sent = int(rng.integers(1, 11))
        gold, pred = {}, {}
        for i in range(n_sent):
            key = ("doc", i)
            gold[key] = set(
                rng.choice(labels, size=int(rng.integers(0, 4)),
                           replace=False))
            n_pred = int(rng.integers(0, 5))
            chosen = rng.choice(labels, size=n_pred, replace=False)
            scores = rng.random(n_pred)
            order = np.argsort(-scores)
            ranked = tuple(
                (str(chosen[j]), float(scores[j])) for j in order)
            pred[key] = (ranked, bool(rng.random() < 0.15))
        report = sentence_prf(gold, pred)
        oracle = _oracle_prf(gold, pred)
        mine = (report.counts.tp, report.counts.fp, report.counts.fn,
                report.precision, report.recall, report.f1)
        for a, b in zip(mine, oracle):
            assert abs(a - b) <= 1e-12

    assert time.monotonic() - started < 5


# ---------------------------------------------------------------------------
# 2. segmentation metrics vs exhaustive oracles


def _pk_oracle(ref, hyp, n, k):
    probes = range(n - k)
    if n - k <= 0:
        return 0.0
    ref, hyp = set(ref), set(hyp)
    disagree = 0
    for i in probes:
        gaps = set(range(i, i + k))
        same_ref = not (ref & gaps)
        same_hyp = not (hyp & gaps)
        if same_ref != same_hyp:
            disagree += 1
    return disagree / (n - k)


def _wd_oracle(ref, hyp, n, k):
    if n - k <= 0:
        return 0.0
    errors = 0
    for i in range(n - k):
        window = range(i, i + k)
        r = sum(1 for b in ref if b in window)
        h = sum(1 for b in hyp if b in window)
        if r != h:
            errors += 1
    return errors / (n - k)


def _segment_lengths(bounds, n):
    cuts = [0] + [b + 1 for b in sorted(bounds)] + [n]
    return [b - a for a, b in zip(cuts, cuts[1:])]


def test_02_pk_and_window_diff_match_exhaustive_oracles():
    started = time.monotonic()
    for n in range(2, 9):
        gaps = list(range(n - 1))
        all_sets = [
            frozenset(c)
            for size in range(n)
            for c in itertools.combinations(gaps, size)
        ]
        for ref in all_sets:
            for hyp in all_sets:
                min_len = min(_segment_lengths(ref, n)
                              + _segment_lengths(hyp, n))
                for k in (1, 2, 3):
                    got_pk = pk(ref, hyp, n, k)
                    got_wd = window_diff(ref, hyp, n, k)
                    assert got_pk == pytest.approx(
                        _pk_oracle(ref, hyp, n, k), abs=1e-12)
                    assert got_wd == pytest.approx(
                        _wd_oracle(ref, hyp, n, k), abs=1e-12)
                    if k < min_len:
                        assert (got_pk == 0.0) == (ref == hyp)
                        assert (got_wd == 0.0) == (ref == hyp)
    assert time.monotonic() - started < 30


# ---------------------------------------------------------------------------
# 3. topic segmentation quality on synthetic concatenations


def test_03_topic_segmentation_of_synthetic_concatenations():
    started = time.monotonic()
    cat = ScenarioCatalog([(f"s{i:02d}", f"scenario {i}") for i in range(10)])
    docs, gold = generate_synthetic_corpus(
        cat, words_per_scenario=60, docs_per_scenario=15,
        sentences_per_doc=8, words_per_sentence=8, seed=17)
    model = train_lda(docs, K=10, iterations=30, seed=2)

    by_scenario = {}
    for doc, ann in zip(docs, gold):
        (label,) = next(iter(ann.segments)).labels
        by_scenario.setdefault(label, []).append(doc)
    labels = list(by_scenario)

    # Depth threshold x=2 (mean minus half a standard deviation): on these
    # flat synthetic coherence series the permissive library default (x=0.1)
    # admits nearly every shallow dip, which is measurably wrong here, so
    # the experiment pins the stricter classic setting instead.
    params = SegmentationParams(window=2, x=2.0)
    rng = np.random.default_rng(42)
    pks, wds = [], []
    for j in range(50):
        chosen = rng.choice(len(labels), size=3, replace=False)
        parts = [by_scenario[labels[c]][rng.integers(15)] for c in chosen]
        merged, truth = concat_documents(parts, seed=1000 + j,
                                         doc_id=f"mix{j:02d}")
        ref = sorted(s.end for s in truth)[:-1]
        spans = segment(merged, model, params, iterations=20, seed=5)
        hyp = boundaries_from_segments(spans, len(merged.sentences))
        n = len(merged.sentences)
        pks.append(pk(ref, hyp, n))
        wds.append(window_diff(ref, hyp, n))

    assert np.mean(pks) <= 0.20
    assert np.mean(wds) <= 0.25
    assert time.monotonic() - started < 120


# ---------------------------------------------------------------------------
# 4. detection beats the reference strategies in order


def test_04_strategy_ordering_on_held_out_synthetic_set():
    started = time.monotonic()
    cat = ScenarioCatalog([(f"s{i:02d}", f"scenario {i}") for i in range(10)])
    common = dict(words_per_scenario=60, sentences_per_doc=8,
                  words_per_sentence=8, common_vocab=40, common_fraction=0.9)
    train_docs, train_gold = generate_synthetic_corpus(
        cat, docs_per_scenario=12, seed=17, **common)
    test_docs, _ = generate_synthetic_corpus(
        cat, docs_per_scenario=9, seed=91, **common)

    lda = train_lda(train_docs, K=10, iterations=30, seed=2)
    bags = [doc_bag(d) for d in train_docs]
    vocab = fit_vocab(bags)
    training = []
    gold_segs = []
    for d, ann in zip(train_docs, train_gold):
        training.append((vectorize(vocab, doc_bag(d)),
                         set(ann.segments[0].labels)))
        gold_segs.extend(ann.segments)
    clf = train_classifier(training, cat, vocab, TrainConfig(epochs=30, seed=0))
    maj = majority_label(gold_segs)
    msl = mean_segment_length(gold_segs)

    def scenario_of(doc_id):
        return doc_id.rsplit("_", 1)[0]

    rng = np.random.default_rng(42)
    tests, j = [], 0
    while len(tests) < 30:
        picked = rng.choice(len(test_docs), size=3, replace=False)
        trio = [test_docs[i] for i in picked]
        if len({scenario_of(d.doc_id) for d in trio}) < 3:
            continue
        doc, truth = concat_documents(
            trio, seed=1000 + j, doc_id=f"mix{j:02d}",
            labels=[{scenario_of(d.doc_id)} for d in trio])
        tests.append((doc, truth))
        j += 1

    gold = {}
    for doc, truth in tests:
        for seg in truth:
            for i in range(seg.start, seg.end + 1):
                gold[(doc.doc_id, i)] = set(seg.labels)

    params = SegmentationParams(window=2, x=2.0)
    preds = {"tt": {}, "rand": {}, "sent": {}, "maj": {}}
    for doc, _ in tests:
        results = {
            "tt": detect(doc, lda, clf, params),
            "rand": baseline_predict("random_tfidf", doc, clf=clf,
                                     mean_segment_length=msl, seed=7),
            "sent": baseline_predict("sent_tfidf", doc, clf=clf),
            "maj": baseline_predict("sent_maj", doc, majority_label=maj),
        }
        for name, result in results.items():
            for i, p in enumerate(result.sentences):
                preds[name][(doc.doc_id, i)] = (p.ranked, p.is_none)

    f1 = {name: sentence_prf(gold, p).f1 for name, p in preds.items()}
    assert f1["tt"] > f1["rand"] > f1["sent"] > f1["maj"]
    assert f1["maj"] < 0.2
    assert time.monotonic() - started < 180


# ---------------------------------------------------------------------------
# 5. analytic gradients


def test_05_gradients_match_central_differences():
    started = time.monotonic()
    rng = np.random.default_rng(77)
    for _ in range(20):
        v = int(rng.integers(3, 9))
        h = int(rng.integers(2, 6))
        m = int(rng.integers(1, 7))
        mlp = init_mlp(v, h, rng, dropout_rate=0.0)
        X = rng.normal(size=(m, v))
        y = rng.integers(0, 2, size=m).astype(float)
        _, grads = mlp_loss_and_grads(mlp, X, y)
        numeric = numeric_grads(mlp, X, y, step=1e-5)
        for name in ("W1", "b1", "W2", "b2"):
            a = np.asarray(grads[name], dtype=float)
            b = np.asarray(numeric[name], dtype=float)
            rel = np.abs(a - b) / np.maximum.reduce(
                [np.abs(a), np.abs(b), np.full_like(a, 1e-6)])
            assert float(np.max(rel)) < 1e-4
    assert time.monotonic() - started < 10


# ---------------------------------------------------------------------------
# 6. agreement metrics


def test_06_agreement_metrics_behave():
    started = time.monotonic()

    ann = {("d", i): s for i, s in enumerate(
        [{"A"}, {"A", "B"}, set(), {"B"}, {"C"}, {"A"}, set(), {"C"}])}
    assert cohen_kappa(ann, ann) == 1.0

    rng = np.random.default_rng(99)
    labels = ["A", "B", "C"]
    ann1 = {("d", i): {labels[rng.integers(3)]} for i in range(10000)}
    ann2 = {("d", i): {labels[rng.integers(3)]} for i in range(10000)}
    kappa = cohen_kappa(ann1, ann2)
    assert -0.05 <= kappa <= 0.05

    def observed(a, b):
        same = sum(
            1 for key in a
            if (a[key] or {NONE_LABEL}) == (b[key] or {NONE_LABEL}))
        return same / len(a)

    pairs = [(ann, ann), (ann1, ann2)]
    for _ in range(20):
        size = int(rng.integers(1, 30))
        a = {("d", i): set(rng.choice(labels, size=int(rng.integers(0, 3)),
                                      replace=False))
             for i in range(size)}
        b = {("d", i): set(rng.choice(labels, size=int(rng.integers(0, 3)),
                                      replace=False))
             for i in range(size)}
        pairs.append((a, b))
    for a, b in pairs:
        assert raw_agreement(a, b) >= observed(a, b) - 1e-12

    assert time.monotonic() - started < 5


# ---------------------------------------------------------------------------
# 7. label co-occurrence scores


def test_07_pmi_independence_symmetry_self():
    started = time.monotonic()

    for scale in (1, 2, 5, 10):
        corpus = {}
        for i in range(4 * scale):
            labels = set()
            if i % 2 == 0:
                labels.add("S1")
            if (i // 2) % 2 == 0:
                labels.add("S2")
            corpus[f"doc{i}"] = labels
        assert abs(pmi(corpus, "S1", "S2")) <= 1e-12

    rng = np.random.default_rng(7)
    pool = ["A", "B", "C", "D", "E"]
    for _ in range(100):
        d = int(rng.integers(2, 13))
        corpus = {}
        for i in range(d):
            size = int(rng.integers(0, 4))
            corpus[f"doc{i}"] = set(rng.choice(pool, size=size,
                                               replace=False))
        present = sorted({lab for labs in corpus.values() for lab in labs})
        for s1, s2 in itertools.combinations(present, 2):
            assert pmi(corpus, s1, s2) == pmi(corpus, s2, s1)
        for s in present:
            df = sum(1 for labs in corpus.values() if s in labs)
            assert abs(pmi(corpus, s, s) - (-math.log(df / d))) <= 1e-12

    assert time.monotonic() - started < 5


# ---------------------------------------------------------------------------
# 8. annotation merging


def test_08_merging_maximal_commutative_idempotent():
    started = time.monotonic()

    def seg(start, end, label):
        return Segment("d", start, end, frozenset({label}), "human")

    def shapes(segments):
        return {(s.start, s.end, s.labels) for s in segments}

    ann1 = AnnotationSet("d", "a1", (seg(0, 9, "G"),))
    ann2 = AnnotationSet("d", "a2", (seg(0, 1, "G"), seg(5, 9, "G")))
    merged, queue = auto_merge(ann1, ann2)
    assert shapes(merged) == {(0, 9, frozenset({"G"}))}
    assert queue == []

    rng = np.random.default_rng(21)
    labels = ["A", "B", "C"]
    for _ in range(500):
        def rand_ann(name):
            segs = tuple(
                seg(start := int(rng.integers(0, 12)),
                    start + int(rng.integers(0, 5)),
                    labels[rng.integers(3)])
                for _ in range(rng.integers(0, 4)))
            return AnnotationSet("d", name, segs)

        a, b = rand_ann("a1"), rand_ann("a2")
        m_ab, q_ab = auto_merge(a, b)
        m_ba, q_ba = auto_merge(b, a)
        assert shapes(m_ab) == shapes(m_ba)
        assert {(it.kind, it.span, it.candidates) for it in q_ab} == \
            {(it.kind, it.span, it.candidates) for it in q_ba}
        gold_a = AnnotationSet("d", "g1", tuple(m_ab))
        gold_b = AnnotationSet("d", "g2", tuple(m_ab))
        m2, q2 = auto_merge(gold_a, gold_b)
        assert q2 == []
        assert shapes(m2) == shapes(m_ab)

    assert time.monotonic() - started < 10


# ---------------------------------------------------------------------------
# 9. bit-exact replay of the command pipeline


def test_09_manifest_replay_is_byte_identical(tmp_path):
    started = time.monotonic()
    work = tmp_path / "run"
    work.mkdir()
    catalog = work / "catalog.tsv"
    catalog.write_text("s00\tzero\ns01\tone\ns02\ttwo\n", encoding="utf-8")
    paths = {
        "corpus": work / "corpus.jsonl",
        "gold": work / "gold.jsonl",
        "lda": work / "lda.json",
        "clf": work / "clf.json",
        "segments": work / "segments.jsonl",
        "detected": work / "detected.jsonl",
        "report": work / "report.txt",
        "segreport": work / "segreport.txt",
    }
    steps = [
        ["gen-synth", "--catalog", str(catalog),
         "--out-corpus", str(paths["corpus"]),
         "--out-annotations", str(paths["gold"]),
         "--docs-per-scenario", "6", "--words-per-scenario", "30",
         "--sentences-per-doc", "6", "--seed", "3"],
        ["train-lda", "--corpus", str(paths["corpus"]),
         "--out-model", str(paths["lda"]),
         "--topics", "3", "--iterations", "30", "--seed", "1"],
        ["segment", "--corpus", str(paths["corpus"]),
         "--model", str(paths["lda"]), "--out", str(paths["segments"])],
        ["train-clf", "--corpus", str(paths["corpus"]),
         "--annotations", str(paths["gold"]), "--catalog", str(catalog),
         "--out-model", str(paths["clf"]), "--epochs", "15"],
        ["detect", "--corpus", str(paths["corpus"]),
         "--lda", str(paths["lda"]), "--model", str(paths["clf"]),
         "--out", str(paths["detected"])],
        ["eval", "--corpus", str(paths["corpus"]),
         "--gold", str(paths["gold"]),
         "--scores", str(work / "detected.scores.jsonl"),
         "--out-report", str(paths["report"])],
        ["seg-eval", "--corpus", str(paths["corpus"]),
         "--ref", str(paths["gold"]), "--hyp", str(paths["segments"]),
         "--out-report", str(paths["segreport"])],
    ]
    for argv in steps:
        assert run_command(argv) == 0, argv[0]

    manifests = sorted(work.glob("*.manifest.json"))
    assert len(manifests) == len(steps)
    for manifest in manifests:
        replay_dir = tmp_path / ("replay_" + manifest.stem.split(".")[0])
        replay_dir.mkdir()
        outputs = replay_manifest(str(manifest), str(replay_dir))
        recorded = json.loads(manifest.read_text())["outputs"]
        for key, new_path in outputs.items():
            original = open(recorded[key], "rb").read()
            replayed = open(new_path, "rb").read()
            assert original == replayed, f"{manifest.name}:{key}"

    assert time.monotonic() - started < 180


# ---------------------------------------------------------------------------
# 10. topic model internal accounting and recovery


def test_10_lda_invariants_and_topic_recovery():
    started = time.monotonic()
    cat = ScenarioCatalog([("s00", "zero"), ("s01", "one")])
    docs, gold = generate_synthetic_corpus(
        cat, words_per_scenario=40, docs_per_scenario=50,
        sentences_per_doc=6, words_per_sentence=8, seed=11)

    # per-sweep count conservation is verified inside the trainer
    model = train_lda(docs, K=2, iterations=30, seed=0,
                      check_invariants=True)

    rows = model.topic_word_dist().sum(axis=1)
    assert np.all(np.abs(rows - 1.0) <= 1e-9)

    counts = {}
    for doc, ann in zip(docs, gold):
        (label,) = next(iter(ann.segments)).labels
        props = document_topic_proportions(model, doc, iterations=20, seed=3)
        topic = int(np.argmax(props))
        counts.setdefault(topic, {}).setdefault(label, 0)
        counts[topic][label] += 1
    total = sum(sum(per.values()) for per in counts.values())
    pure = sum(max(per.values()) for per in counts.values())
    assert pure / total >= 0.9

    assert time.monotonic() - started < 60


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))

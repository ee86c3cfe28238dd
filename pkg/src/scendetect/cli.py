"""Command line tying the library into reproducible batch pipelines.

Every command writes a JSON manifest next to its first output recording the
resolved arguments, seeds, and SHA-256 digests of the inputs, so any run can
be replayed bit-exactly with replay_manifest. Exit codes: 0 success, 1 usage,
2 data validation, 3 internal.
"""

import argparse
import configparser
import dataclasses
import hashlib
import json
import os
import sys

from . import __version__
from .corpus import (
    NONE_LABEL,
    AnnotationSet,
    generate_synthetic_corpus,
    group_annotations,
    load_annotations,
    load_catalog,
    load_corpus,
    load_stopwords,
    preprocess,
    validate_against,
    write_annotations,
    write_corpus,
)
from .classifier import TrainConfig, baseline_predict, load_classifier, \
    save_classifier, train_classifier
from .evaluation import (
    analysis,
    auto_k,
    boundaries_from_segments,
    cohen_kappa,
    format_float,
    format_report,
    pk,
    raw_agreement,
    report_keyvalues,
    sentence_labels,
    sentence_prf,
    span_overlap_agreement,
    window_diff,
)
from .features import fit_vocab, vectorize
from .goldbuild import (
    apply_decisions,
    attach_decisions,
    auto_merge,
    load_decisions,
    merge_statistics,
    read_queue,
    write_queue,
)
from .pipeline import (
    affinity_select,
    detect,
    majority_label,
    mean_segment_length,
    train_affinity,
    tune_entropy_threshold,
)
from .segmenter import SegmentationParams, segment
from .topics import load_lda, save_lda, train_lda

_MANIFEST_SKIP = {"func", "config", "command"}


# ---------------------------------------------------------------------------
# manifests


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(args, inputs, outputs):
    """Record the run next to its first output; returns the manifest path."""
    rec = {
        "command": args.command,
        "args": {
            k: v
            for k, v in sorted(vars(args).items())
            if k not in _MANIFEST_SKIP and v is not None
        },
        "inputs": {str(p): _sha256(p) for p in sorted(set(map(str, inputs)))},
        "outputs": {k: str(v) for k, v in outputs.items()},
    }
    primary = next(iter(outputs.values()))
    path = str(primary) + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rec, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def replay_manifest(manifest_path, out_dir):
    """Re-run a recorded command with its outputs redirected into out_dir.

    Inputs are read from their recorded locations. Returns {arg name: new
    output path}. Raises if the replayed command fails.
    """
    with open(manifest_path, encoding="utf-8") as fh:
        rec = json.load(fh)
    outputs = rec["outputs"]
    argv = [rec["command"]]
    for key, value in rec["args"].items():
        flag = "--" + key.replace("_", "-")
        if key in outputs:
            value = os.path.join(out_dir, os.path.basename(str(value)))
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    status = run_command(argv)
    if status != 0:
        raise RuntimeError(f"replay of {rec['command']} exited {status}")
    return {
        k: os.path.join(out_dir, os.path.basename(str(v)))
        for k, v in outputs.items()
    }


# ---------------------------------------------------------------------------
# shared loaders and writers


def _load_docs(path, stopwords_path=None):
    docs = load_corpus(path)
    if stopwords_path:
        stop = load_stopwords(stopwords_path)
        return [preprocess(d, stop) for d in docs]
    return [preprocess(d) for d in docs]


def _docs(args):
    return _load_docs(args.corpus, getattr(args, "stopwords", None))


def _doc_map(docs):
    return {d.doc_id: d for d in docs}


def _segments_by_doc(segments):
    out = {}
    for seg in segments:
        out.setdefault(seg.doc_id, []).append(seg)
    return out


def _gold_sentence_map(segments, docs):
    """(doc_id, index) -> gold label set for every sentence in docs."""
    by_doc = _segments_by_doc(segments)
    gold = {}
    for doc in docs:
        per = sentence_labels(by_doc.get(doc.doc_id, []), len(doc.sentences))
        for i, labels in enumerate(per):
            gold[(doc.doc_id, i)] = labels
    return gold


def _write_sentence_table(path, results):
    with open(path, "w", encoding="utf-8") as fh:
        for result in results:
            for seg in result.segments:
                labels = ",".join(sorted(seg.labels))
                for i in range(seg.start, seg.end + 1):
                    h = result.sentences[i].entropy
                    fh.write(f"{result.doc_id}\t{i}\t{labels}\t{h:.6f}\n")


def _write_scores(path, results):
    with open(path, "w", encoding="utf-8") as fh:
        for result in results:
            for i, pred in enumerate(result.sentences):
                rec = {
                    "doc_id": result.doc_id,
                    "index": i,
                    "ranked": [[lab, score] for lab, score in pred.ranked],
                    "is_none": pred.is_none,
                }
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _read_scores(path):
    pred = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                key = (rec["doc_id"], int(rec["index"]))
                ranked = tuple((lab, float(s)) for lab, s in rec["ranked"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if key in pred:
                raise ValueError(
                    f"{path}:{lineno}: duplicate sentence {key}")
            pred[key] = (ranked, bool(rec["is_none"]))
    return pred


def _pred_from_annotations(segments, docs):
    """Per-sentence predictions implied by plain predicted segments."""
    by_doc = _segments_by_doc(segments)
    pred = {}
    for doc in docs:
        per = sentence_labels(by_doc.get(doc.doc_id, []), len(doc.sentences))
        for i, labels in enumerate(per):
            labels = set(labels) - {NONE_LABEL}
            pred[(doc.doc_id, i)] = (tuple(sorted(labels)), not labels)
    return pred


def _write_text(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    _write_text(path, "\n".join(lines))


def _derive(base, suffix):
    stem, _ = os.path.splitext(base)
    return stem + suffix


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_synth(args):
    catalog = load_catalog(args.catalog)
    docs, gold = generate_synthetic_corpus(
        catalog,
        words_per_scenario=args.words_per_scenario,
        docs_per_scenario=args.docs_per_scenario,
        sentences_per_doc=args.sentences_per_doc,
        words_per_sentence=args.words_per_sentence,
        seed=args.seed,
        common_vocab=args.common_vocab,
        common_fraction=args.common_fraction,
    )
    write_corpus(docs, args.out_corpus)
    write_annotations([s for ann in gold for s in ann.segments],
                      args.out_annotations)
    write_manifest(args, [args.catalog],
                   {"out_corpus": args.out_corpus,
                    "out_annotations": args.out_annotations})
    print(f"wrote {len(docs)} documents")
    return 0


def cmd_train_lda(args):
    docs = _docs(args)
    model = train_lda(docs, K=args.topics, alpha=args.alpha, beta=args.beta,
                      iterations=args.iterations, seed=args.seed)
    save_lda(model, args.out_model)
    inputs = [args.corpus] + ([args.stopwords] if args.stopwords else [])
    write_manifest(args, inputs, {"out_model": args.out_model})
    print(f"trained K={model.K} on {len(docs)} documents, V={model.V}")
    return 0


def cmd_segment(args):
    docs = _docs(args)
    lda = load_lda(args.model)
    params = SegmentationParams(window=args.window, x=args.x)
    segments = []
    for doc in docs:
        segments.extend(segment(doc, lda, params,
                                iterations=args.iterations, seed=args.seed))
    write_annotations(segments, args.out)
    inputs = [args.corpus, args.model] + \
        ([args.stopwords] if args.stopwords else [])
    write_manifest(args, inputs, {"out": args.out})
    print(f"{len(segments)} segments over {len(docs)} documents")
    return 0


def _training_segments(args, docs, catalog):
    gold = load_annotations(args.annotations, catalog=catalog)
    validate_against(gold, docs)
    doc_map = _doc_map(docs)
    bags, labelsets = [], []
    for seg in gold:
        doc = doc_map[seg.doc_id]
        bag = [w for i in range(seg.start, seg.end + 1)
               for w in doc.sentences[i].content_lemmas]
        bags.append(bag)
        labelsets.append(set(seg.labels))
    return bags, labelsets


def cmd_train_clf(args):
    docs = _docs(args)
    catalog = load_catalog(args.catalog)
    bags, labelsets = _training_segments(args, docs, catalog)
    vocab = fit_vocab(bags, min_df=args.min_df)
    fvs = [vectorize(vocab, bag) for bag in bags]
    config = TrainConfig(hidden=args.hidden, dropout=args.dropout,
                         learning_rate=args.learning_rate,
                         epochs=args.epochs, batch_size=args.batch_size,
                         seed=args.seed)
    clf = train_classifier(list(zip(fvs, labelsets)), catalog, vocab, config)
    if args.entropy_threshold is not None:
        clf = dataclasses.replace(clf, entropy_threshold=args.entropy_threshold)
    save_classifier(clf, args.out_model)
    inputs = [args.corpus, args.annotations, args.catalog] + \
        ([args.stopwords] if args.stopwords else [])
    write_manifest(args, inputs, {"out_model": args.out_model})
    print(f"trained {len(clf.models)} scenario models "
          f"({len(clf.degenerate)} degenerate), "
          f"entropy threshold {clf.entropy_threshold:.6f}")
    return 0


def cmd_tune_threshold(args):
    docs = _docs(args)
    lda = load_lda(args.lda)
    clf = load_classifier(args.model)
    gold_segments = load_annotations(args.annotations, allow_empty_labels=True)
    validate_against(gold_segments, docs)
    gold = _gold_sentence_map(gold_segments, docs)
    params = SegmentationParams(window=args.window, x=args.x)
    threshold, f1 = tune_entropy_threshold(
        docs, gold, lda, clf, params, grid=args.grid,
        iterations=args.iterations, seed=args.seed)
    clf = dataclasses.replace(clf, entropy_threshold=threshold)
    save_classifier(clf, args.out_model)
    inputs = [args.corpus, args.annotations, args.lda, args.model] + \
        ([args.stopwords] if args.stopwords else [])
    write_manifest(args, inputs, {"out_model": args.out_model})
    print(f"threshold={threshold:.6f} dev_f1={f1:.6f}")
    return 0


def cmd_detect(args):
    docs = _docs(args)
    lda = load_lda(args.lda)
    clf = load_classifier(args.model)
    params = SegmentationParams(window=args.window, x=args.x)
    results = [detect(doc, lda, clf, params, tau=args.tau,
                      iterations=args.iterations, seed=args.seed)
               for doc in docs]
    write_annotations([s for r in results for s in r.segments], args.out)
    sentences_path = args.out_sentences or _derive(args.out, ".sentences.tsv")
    scores_path = args.out_scores or _derive(args.out, ".scores.jsonl")
    _write_sentence_table(sentences_path, results)
    _write_scores(scores_path, results)
    inputs = [args.corpus, args.lda, args.model] + \
        ([args.stopwords] if args.stopwords else [])
    write_manifest(args, inputs, {
        "out": args.out,
        "out_sentences": sentences_path,
        "out_scores": scores_path,
    })
    n_seg = sum(len(r.segments) for r in results)
    print(f"{n_seg} segments over {len(docs)} documents")
    return 0


def cmd_baseline(args):
    docs = _docs(args)
    clf = load_classifier(args.model) if args.model else None
    maj = None
    msl = None
    if args.annotations:
        train_gold = load_annotations(args.annotations)
        maj = majority_label(train_gold)
        msl = mean_segment_length(train_gold)
    results = [baseline_predict(args.strategy, doc, clf=clf,
                                majority_label=maj, mean_segment_length=msl,
                                seed=args.seed)
               for doc in docs]
    write_annotations([s for r in results for s in r.segments], args.out)
    sentences_path = args.out_sentences or _derive(args.out, ".sentences.tsv")
    scores_path = args.out_scores or _derive(args.out, ".scores.jsonl")
    _write_sentence_table(sentences_path, results)
    _write_scores(scores_path, results)
    inputs = [args.corpus]
    for extra in (args.model, args.annotations, args.stopwords):
        if extra:
            inputs.append(extra)
    write_manifest(args, inputs, {
        "out": args.out,
        "out_sentences": sentences_path,
        "out_scores": scores_path,
    })
    print(f"{args.strategy}: {len(docs)} documents")
    return 0


def cmd_eval(args):
    docs = _docs(args)
    gold_segments = load_annotations(args.gold)
    validate_against(gold_segments, docs)
    gold = _gold_sentence_map(gold_segments, docs)
    if bool(args.scores) == bool(args.pred):
        raise ValueError("need exactly one of --scores and --pred")
    if args.scores:
        pred = _read_scores(args.scores)
    else:
        pred_segments = load_annotations(args.pred, allow_empty_labels=True)
        validate_against(pred_segments, docs)
        pred = _pred_from_annotations(pred_segments, docs)
    report = sentence_prf(gold, pred)
    _write_text(args.out_report, format_report(report))
    kv_path = args.out_keyvalues or _derive(args.out_report, ".kv")
    _write_text(kv_path, report_keyvalues(report))
    scen_path = args.out_scenario_csv or _derive(args.out_report,
                                                 ".scenarios.csv")
    _write_csv(scen_path,
               ("scenario", "precision", "recall", "f1", "gold_sentences"),
               [(lab, format_float(s.precision), format_float(s.recall),
                 format_float(s.f1), s.gold_sentences)
                for lab, s in report.per_scenario.items()])
    conf_path = args.out_confusion_csv or _derive(args.out_report,
                                                  ".confusion.csv")
    pairs = sorted(report.confusion.items(), key=lambda kv: (-kv[1], kv[0]))
    _write_csv(conf_path, ("gold", "predicted", "count"),
               [(g, p, count) for (g, p), count in pairs])
    inputs = [args.corpus, args.gold, args.scores or args.pred]
    if args.stopwords:
        inputs.append(args.stopwords)
    write_manifest(args, inputs, {
        "out_report": args.out_report,
        "out_keyvalues": kv_path,
        "out_scenario_csv": scen_path,
        "out_confusion_csv": conf_path,
    })
    print(f"precision={format_float(report.precision)} "
          f"recall={format_float(report.recall)} "
          f"f1={format_float(report.f1)}")
    return 0


def cmd_seg_eval(args):
    docs = _docs(args)
    ref = _segments_by_doc(load_annotations(args.ref, allow_empty_labels=True))
    hyp = _segments_by_doc(load_annotations(args.hyp, allow_empty_labels=True))
    rows = []
    for doc in docs:
        n = len(doc.sentences)
        if doc.doc_id not in ref:
            raise ValueError(f"no reference segments for {doc.doc_id!r}")
        if doc.doc_id not in hyp:
            raise ValueError(f"no hypothesis segments for {doc.doc_id!r}")
        rb = boundaries_from_segments(ref[doc.doc_id], n)
        hb = boundaries_from_segments(hyp[doc.doc_id], n)
        k = args.k if args.k is not None else auto_k(rb, n)
        rows.append((doc.doc_id, pk(rb, hb, n, k),
                     window_diff(rb, hb, n, k), k))
    if not rows:
        raise ValueError("empty corpus")
    mean_pk = sum(r[1] for r in rows) / len(rows)
    mean_wd = sum(r[2] for r in rows) / len(rows)
    text = (f"documents={len(rows)}\n"
            f"pk={format_float(mean_pk)}\n"
            f"window_diff={format_float(mean_wd)}\n")
    _write_text(args.out_report, text)
    csv_path = args.out_csv or _derive(args.out_report, ".docs.csv")
    _write_csv(csv_path, ("doc_id", "pk", "window_diff", "k"),
               [(d, format_float(a), format_float(b), k)
                for d, a, b, k in rows])
    inputs = [args.corpus, args.ref, args.hyp]
    if args.stopwords:
        inputs.append(args.stopwords)
    write_manifest(args, inputs,
                   {"out_report": args.out_report, "out_csv": csv_path})
    print(f"pk={format_float(mean_pk)} window_diff={format_float(mean_wd)}")
    return 0


def _two_annotators(segments, name_a, name_b):
    names = sorted({s.source for s in segments})
    if name_a and name_b:
        chosen = [name_a, name_b]
    elif len(names) == 2:
        chosen = names
    else:
        raise ValueError(
            f"annotation file has annotators {', '.join(names)}; "
            "pick two with --a and --b")
    missing = [n for n in chosen if n not in names]
    if missing:
        raise ValueError("unknown annotator(s): " + ", ".join(missing))
    return chosen


def cmd_agreement(args):
    docs = _docs(args)
    segments = load_annotations(args.annotations)
    validate_against(segments, docs)
    name_a, name_b = _two_annotators(segments, args.a, args.b)
    seg_a = [s for s in segments if s.source == name_a]
    seg_b = [s for s in segments if s.source == name_b]
    ann_a = _gold_sentence_map(seg_a, docs)
    ann_b = _gold_sentence_map(seg_b, docs)
    kappa_sets = cohen_kappa(ann_a, ann_b, method="label_sets")
    kappa_per = cohen_kappa(ann_a, ann_b, method="per_label")
    raw = raw_agreement(ann_a, ann_b)
    by_doc_a = _segments_by_doc(seg_a)
    by_doc_b = _segments_by_doc(seg_b)
    spans = []
    for doc in docs:
        a = AnnotationSet(doc.doc_id, name_a,
                          tuple(by_doc_a.get(doc.doc_id, ())))
        b = AnnotationSet(doc.doc_id, name_b,
                          tuple(by_doc_b.get(doc.doc_id, ())))
        if a.segments or b.segments:
            spans.append(span_overlap_agreement(a, b))
    span_mean = sum(spans) / len(spans) if spans else 0.0
    text = (f"annotators={name_a},{name_b}\n"
            f"kappa_label_sets={format_float(kappa_sets)}\n"
            f"kappa_per_label={format_float(kappa_per)}\n"
            f"raw_agreement={format_float(raw)}\n"
            f"span_overlap={format_float(span_mean)}\n")
    _write_text(args.out_report, text)
    inputs = [args.corpus, args.annotations]
    if args.stopwords:
        inputs.append(args.stopwords)
    write_manifest(args, inputs, {"out_report": args.out_report})
    print(text, end="")
    return 0


def cmd_merge(args):
    segments = load_annotations(args.annotations)
    name_a, name_b = _two_annotators(segments, args.a, args.b)
    grouped = group_annotations(segments)
    doc_ids = []
    for seg in segments:
        if seg.doc_id not in doc_ids:
            doc_ids.append(seg.doc_id)
    merged_all, queue_all = [], []
    stats_total = {"input_segments": 0, "merged_segments": 0,
                   "queued_items": 0, "auto_merged": 0.0}
    for doc_id in doc_ids:
        ann_a = grouped.get((doc_id, name_a),
                            AnnotationSet(doc_id, name_a, ()))
        ann_b = grouped.get((doc_id, name_b),
                            AnnotationSet(doc_id, name_b, ()))
        merged, queue = auto_merge(ann_a, ann_b)
        stats = merge_statistics(ann_a, ann_b, merged, queue)
        merged_all.extend(merged)
        queue_all.extend(queue)
        stats_total["input_segments"] += stats["input_segments"]
        stats_total["merged_segments"] += stats["merged_segments"]
        stats_total["queued_items"] += stats["queued_items"]
        stats_total["auto_merged"] += \
            stats["auto_merged_fraction"] * stats["input_segments"]
    write_annotations(merged_all, args.out_merged)
    write_queue(args.out_queue, queue_all)
    write_manifest(args, [args.annotations],
                   {"out_merged": args.out_merged,
                    "out_queue": args.out_queue})
    total = stats_total["input_segments"]
    frac = stats_total["auto_merged"] / total if total else 0.0
    print(f"{stats_total['merged_segments']} merged segments, "
          f"{stats_total['queued_items']} queued items, "
          f"{frac:.1%} of segment annotations auto-merged")
    return 0


def cmd_adjudicate(args):
    merged = load_annotations(args.merged, allow_empty_labels=True)
    queue = read_queue(args.queue)
    decisions = load_decisions(args.decisions)
    queue = attach_decisions(queue, decisions)
    merged_by_doc = _segments_by_doc(merged)
    queue_by_doc = {}
    for item in queue:
        queue_by_doc.setdefault(item.doc_id, []).append(item)
    gold = []
    for doc_id in sorted(set(merged_by_doc) | set(queue_by_doc)):
        gold.extend(apply_decisions(merged_by_doc.get(doc_id, []),
                                    queue_by_doc.get(doc_id, [])))
    write_annotations(gold, args.out)
    write_manifest(args, [args.merged, args.queue, args.decisions],
                   {"out": args.out})
    print(f"{len(gold)} gold segments")
    return 0


def cmd_affinity(args):
    docs = _docs(args)
    gold = load_annotations(args.annotations)
    validate_against(gold, docs)
    labels_by_doc = {}
    for seg in gold:
        labels_by_doc.setdefault(seg.doc_id, set()).update(seg.labels)
    by_scenario = {}
    doc_map = _doc_map(docs)
    for doc_id, labels in labels_by_doc.items():
        if doc_id not in doc_map:
            continue
        for lab in labels:
            if lab != NONE_LABEL:
                by_scenario.setdefault(lab, []).append(doc_map[doc_id])
    lda = load_lda(args.lda)
    model = train_affinity(by_scenario, lda, epochs=args.epochs,
                           learning_rate=args.learning_rate,
                           iterations=args.iterations, seed=args.seed)
    pool = _load_docs(args.pool, args.stopwords)
    rows = affinity_select(pool, lda, model, args.top_m,
                           iterations=args.iterations, seed=args.seed)
    _write_csv(args.out, ("doc_id", "scenario", "score"),
               [(d, lab, format_float(s)) for d, lab, s in rows])
    inputs = [args.corpus, args.annotations, args.lda, args.pool]
    if args.stopwords:
        inputs.append(args.stopwords)
    write_manifest(args, inputs, {"out": args.out})
    print(f"selected {len(rows)} of {len(pool)} documents")
    return 0


def cmd_analyze(args):
    docs = _docs(args)
    gold_segments = load_annotations(args.gold)
    validate_against(gold_segments, docs)
    gold = _gold_sentence_map(gold_segments, docs)
    pred = _read_scores(args.scores)
    report = sentence_prf(gold, pred)
    gold_doc_labels = {}
    for seg in gold_segments:
        gold_doc_labels.setdefault(seg.doc_id, set()).update(
            lab for lab in seg.labels if lab != NONE_LABEL)
    block = analysis(report, gold_doc_labels, top_pairs=args.top_pairs)
    lines = ["gold predicted count pmi"]
    for g, p, count, value in block.misclassified:
        lines.append(f"{g} {p} {count} {format_float(value)}")
    lines.append("")
    for name in sorted(block.correlations):
        lines.append(f"{name}={format_float(block.correlations[name])}")
    _write_text(args.out_report, "\n".join(lines))
    csv_path = args.out_csv or _derive(args.out_report, ".pairs.csv")
    _write_csv(csv_path, ("gold", "predicted", "count", "pmi"),
               [(g, p, count, format_float(value))
                for g, p, count, value in block.misclassified])
    inputs = [args.corpus, args.gold, args.scores]
    if args.stopwords:
        inputs.append(args.stopwords)
    write_manifest(args, inputs,
                   {"out_report": args.out_report, "out_csv": csv_path})
    print(f"{len(block.misclassified)} confusion pairs analyzed")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sub):
    sub.add_argument("--config", help="INI config; flags override it")
    sub.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="scendetect",
        description="Scenario detection: segmentation, classification, "
                    "evaluation, and gold-standard tooling.")
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    subs = {}

    def make(name, func, **kwargs):
        sub = subparsers.add_parser(name, **kwargs)
        sub.set_defaults(func=func, command=name)
        subs[name] = sub
        return sub

    s = make("gen-synth", cmd_gen_synth,
             help="generate a synthetic benchmark corpus")
    _add_common(s)
    s.add_argument("--catalog", required=True)
    s.add_argument("--out-corpus", required=True)
    s.add_argument("--out-annotations", required=True)
    s.add_argument("--words-per-scenario", type=int, default=40)
    s.add_argument("--docs-per-scenario", type=int, default=20)
    s.add_argument("--sentences-per-doc", type=int, default=8)
    s.add_argument("--words-per-sentence", type=int, default=8)
    s.add_argument("--common-vocab", type=int, default=0)
    s.add_argument("--common-fraction", type=float, default=0.0)

    s = make("train-lda", cmd_train_lda, help="train the topic model")
    _add_common(s)
    s.add_argument("--corpus", required=True)
    s.add_argument("--out-model", required=True)
    s.add_argument("--topics", type=int, default=200)
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--beta", type=float, default=0.01)
    s.add_argument("--iterations", type=int, default=200)
    s.add_argument("--stopwords")

    s = make("segment", cmd_segment, help="topic-segment documents")
    _add_common(s)
    s.add_argument("--corpus", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--window", type=int, default=2)
    s.add_argument("--x", type=float, default=0.1)
    s.add_argument("--iterations", type=int, default=20)
    s.add_argument("--stopwords")

    s = make("train-clf", cmd_train_clf,
             help="train per-scenario classifiers")
    _add_common(s)
    s.add_argument("--corpus", required=True)
    s.add_argument("--annotations", required=True)
    s.add_argument("--catalog", required=True)
    s.add_argument("--out-model", required=True)
    s.add_argument("--hidden", type=int, default=100)
    s.add_argument("--dropout", type=float, default=0.2)
    s.add_argument("--learning-rate", type=float, default=1e-3)
    s.add_argument("--epochs", type=int, default=30)
    s.add_argument("--batch-size", type=int, default=32)
    s.add_argument("--min-df", type=int, default=1)
    s.add_argument("--entropy-threshold", type=float, default=None)
    s.add_argument("--stopwords")

    s = make("tune-threshold", cmd_tune_threshold,
             help="tune the entropy gate on a dev set")
    _add_common(s)
    s.add_argument("--corpus", required=True)
    s.add_argument("--annotations", required=True)
    s.add_argument("--lda", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--out-model", required=True)
    s.add_argument("--window", type=int, default=2)
    s.add_argument("--x", type=float, default=0.1)
    s.add_argument("--grid", type=int, default=50)
    s.add_argument("--iterations", type=int, default=20)
    s.add_argument("--stopwords")

    s = make("detect", cmd_detect, help="segment and classify documents")
    _add_common(s)
    s.add_argument("--corpus", required=True)
    s.add_argument("--lda", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--out-sentences")
    s.add_argument("--out-scores")
    s.add_argument("--tau", type=float, default=0.3)
    s.add_argument("--window", type=int, default=2)
    s.add_argument("--x", type=float, default=0.1)
    s.add_argument("--iterations", type=int, default=20)
    s.add_argument("--stopwords")

    s = make("baseline", cmd_baseline, help="reference strategies")
    _add_common(s)
    s.add_argument("--strategy", required=True,
                   choices=("sent_maj", "sent_tfidf", "random_tfidf"))
    s.add_argument("--corpus", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--out-sentences")
    s.add_argument("--out-scores")
    s.add_argument("--model")
    s.add_argument("--annotations",
                   help="training gold, for the majority label and "
                        "mean segment length")
    s.add_argument("--stopwords")

    s = make("eval", cmd_eval, help="sentence-level evaluation")
    _add_common(s)
    s.add_argument("--corpus", required=True)
    s.add_argument("--gold", required=True)
    s.add_argument("--scores", help="per-sentence ranked scores (detect)")
    s.add_argument("--pred", help="predicted segments (annotation format)")
    s.add_argument("--out-report", required=True)
    s.add_argument("--out-keyvalues")
    s.add_argument("--out-scenario-csv")
    s.add_argument("--out-confusion-csv")
    s.add_argument("--stopwords")

    s = make("seg-eval", cmd_seg_eval, help="segmentation metrics")
    _add_common(s)
    s.add_argument("--corpus", required=True)
    s.add_argument("--ref", required=True)
    s.add_argument("--hyp", required=True)
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--out-report", required=True)
    s.add_argument("--out-csv")
    s.add_argument("--stopwords")

    s = make("agreement", cmd_agreement, help="inter-annotator agreement")
    _add_common(s)
    s.add_argument("--corpus", required=True)
    s.add_argument("--annotations", required=True)
    s.add_argument("--a", help="first annotator name")
    s.add_argument("--b", help="second annotator name")
    s.add_argument("--out-report", required=True)
    s.add_argument("--stopwords")

    s = make("merge", cmd_merge, help="auto-merge double annotations")
    _add_common(s)
    s.add_argument("--annotations", required=True)
    s.add_argument("--a", help="first annotator name")
    s.add_argument("--b", help="second annotator name")
    s.add_argument("--out-merged", required=True)
    s.add_argument("--out-queue", required=True)

    s = make("adjudicate", cmd_adjudicate,
             help="apply adjudication decisions")
    _add_common(s)
    s.add_argument("--merged", required=True)
    s.add_argument("--queue", required=True)
    s.add_argument("--decisions", required=True)
    s.add_argument("--out", required=True)

    s = make("affinity", cmd_affinity,
             help="rank a document pool by scenario affinity")
    _add_common(s)
    s.add_argument("--corpus", required=True,
                   help="labeled training documents")
    s.add_argument("--annotations", required=True)
    s.add_argument("--lda", required=True)
    s.add_argument("--pool", required=True, help="documents to rank")
    s.add_argument("--top-m", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--epochs", type=int, default=300)
    s.add_argument("--learning-rate", type=float, default=0.5)
    s.add_argument("--iterations", type=int, default=20)
    s.add_argument("--stopwords")

    s = make("analyze", cmd_analyze,
             help="confusion pairs with PMI and correlations")
    _add_common(s)
    s.add_argument("--corpus", required=True)
    s.add_argument("--gold", required=True)
    s.add_argument("--scores", required=True)
    s.add_argument("--out-report", required=True)
    s.add_argument("--out-csv")
    s.add_argument("--top-pairs", type=int, default=10)
    s.add_argument("--stopwords")

    return parser, subs


def _coerce(sub, key, value):
    for action in sub._actions:
        if action.dest == key:
            if action.type is not None:
                return action.type(value)
            if isinstance(action.const, bool):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return value
    raise ValueError(f"config: unknown option {key!r}")


def _overlay_config(subs, argv):
    """Load --config (INI) defaults into the invoked subcommand's parser."""
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    command = next((t for t in argv if t in subs), None)
    if path is None or command is None:
        return
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    values = {}
    for section in ("common", command):
        if cp.has_section(section):
            for key, value in cp.items(section):
                values[key.replace("-", "_")] = value
    sub = subs[command]
    coerced = {k: _coerce(sub, k, v) for k, v in values.items()}
    sub.set_defaults(**coerced)
    # satisfy "required" for flags the config supplies
    for action in sub._actions:
        if action.dest in coerced:
            action.required = False


def run_command(argv):
    parser, subs = build_parser()
    argv = list(argv)
    try:
        _overlay_config(subs, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    except (OSError, ValueError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:                      # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()

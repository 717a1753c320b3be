"""Command-line orchestration of the full pipeline.

Each subcommand covers one stage: fetch pages, extract plaintext,
segment into annotatable units, train embeddings, train and evaluate
the classifier, drive query iterations (human-labeled or against the
built-in synthetic oracle), measure corpus coverage, serve the
annotation API, and export reports. Artifact locations default to the
directories in the run configuration; ``--out`` and per-command flags
override them. Exit codes: 0 success, 2 missing inputs, 3 unusable
configuration, 1 anything else, always with one JSON error line on
stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from .active import ActiveLearningConfig, ActiveLearningDriver
from .annotation import LabelStore
from .classifier import ClassifierConfig, evaluate, load_model, save_model, train
from .compliance import (ComplianceSummary, ComplianceVector, aggregate,
                         export_report, measure_policy)
from .config import RunConfig, apply_overrides, load_config
from .corpus import (Fetcher, PolicyDocument, extract_text, load_corpus,
                     load_plaintext_documents, read_url_list, save_corpus,
                     save_plaintext_documents, segment)
from .embeddings import EmbeddingConfig, load_embeddings, save_embeddings, train_skipgram
from .errors import ConfigError, FetchError, GdprScanError, IterationStalled
from .service import (TOKEN_FILE_ENV, AnnotationService, create_app, load_tokens)
from .synth import (SynthConfig, labeled_segments, planted_policy,
                    synthetic_corpus)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_MISSING_INPUT = 2
EXIT_CONFIG = 3

_PAGE_INDEX = "index.json"


class MissingInput(Exception):
    """A required input artifact does not exist."""


def _require_file(path, what: str) -> Path:
    path = Path(path)
    if not path.is_file():
        raise MissingInput("%s not found: %s" % (what, path))
    return path


def _require_dir(path, what: str) -> Path:
    path = Path(path)
    if not path.is_dir():
        raise MissingInput("%s not found: %s" % (what, path))
    return path


def _emit(payload: dict) -> None:
    print(json.dumps(payload, ensure_ascii=True, sort_keys=True))


def _load_store(corpus_docs, labels_path, consolidations_path) -> LabelStore:
    segments = [seg for doc in corpus_docs for seg in doc.segments]
    labels_path = Path(labels_path)
    if labels_path.is_file():
        return LabelStore.load(segments, labels_path, consolidations_path)
    store = LabelStore()
    store.add_segments(segments)
    return store


# -- corpus stages -------------------------------------------------


def cmd_fetch(args, cfg: RunConfig) -> int:
    urls_path = _require_file(args.in_path, "url list")
    out_dir = Path(args.out) if args.out else cfg.corpus_dir / "pages"
    out_dir.mkdir(parents=True, exist_ok=True)
    fetcher = Fetcher(politeness_delay=args.delay)
    index = []
    fetched = 0
    for i, url in enumerate(read_url_list(urls_path)):
        doc_id = "doc-%04d" % (i,)
        entry = {"doc_id": doc_id, "url": url, "file": None}
        try:
            result = fetcher.fetch(url)
        except FetchError as exc:
            entry["error"] = str(exc)
            print(json.dumps({"error": "fetch_failed", "url": url,
                              "message": str(exc)}), file=sys.stderr)
        else:
            name = doc_id + ".html"
            (out_dir / name).write_text(result.body, encoding="utf-8")
            entry["file"] = name
            entry["status"] = result.status
            entry["fetched_at"] = result.fetched_at.isoformat()
            fetched += 1
        index.append(entry)
    with open(out_dir / _PAGE_INDEX, "w", encoding="utf-8") as fh:
        json.dump(index, fh, ensure_ascii=True, indent=2, sort_keys=True)
        fh.write("\n")
    _emit({"fetched": fetched, "failed": len(index) - fetched,
           "out": str(out_dir)})
    return EXIT_OK if fetched or not index else EXIT_FAILURE


def _pages_to_extract(pages_dir: Path):
    """Yield (doc_id, url, fetched_at, html_path) for every stored page.

    A fetch-written index drives the listing when present; a bare
    directory of .html files (fixtures, hand-collected pages) works
    too, with the file name as identity and its mtime as provenance.
    """
    index_path = pages_dir / _PAGE_INDEX
    if index_path.is_file():
        with open(index_path, encoding="utf-8") as fh:
            for entry in json.load(fh):
                if not entry.get("file"):
                    continue
                yield (entry["doc_id"], entry["url"],
                       datetime.fromisoformat(entry["fetched_at"]),
                       pages_dir / entry["file"])
        return
    for html_path in sorted(pages_dir.glob("*.html")):
        fetched_at = datetime.fromtimestamp(html_path.stat().st_mtime, timezone.utc)
        yield (html_path.stem, html_path.name, fetched_at, html_path)


def cmd_extract(args, cfg: RunConfig) -> int:
    pages_dir = _require_dir(args.in_path, "pages directory")
    out_path = Path(args.out) if args.out else cfg.corpus_dir / "documents.jsonl"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    docs = []
    for doc_id, url, fetched_at, html_path in _pages_to_extract(pages_dir):
        html = html_path.read_text(encoding="utf-8")
        docs.append(PolicyDocument(
            doc_id=doc_id, url=url, fetched_at=fetched_at,
            plaintext=extract_text(html),
        ))
    if not docs:
        raise MissingInput("no pages to extract in %s" % (pages_dir,))
    save_plaintext_documents(docs, out_path)
    _emit({"documents": len(docs), "out": str(out_path)})
    return EXIT_OK


def cmd_segment(args, cfg: RunConfig) -> int:
    in_path = _require_file(
        args.in_path or cfg.corpus_dir / "documents.jsonl", "document file")
    out_path = Path(args.out) if args.out else cfg.corpus_dir / "corpus.jsonl"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    docs = load_plaintext_documents(in_path)
    n_segments = 0
    for doc in docs:
        doc.segments = segment(
            doc.plaintext, min_tokens=cfg.min_tokens, max_tokens=cfg.max_tokens,
            doc_id=doc.doc_id)
        n_segments += len(doc.segments)
    save_corpus(docs, out_path)
    _emit({"documents": len(docs), "segments": n_segments, "out": str(out_path)})
    return EXIT_OK


# -- model stages --------------------------------------------------


def cmd_embed_train(args, cfg: RunConfig) -> int:
    corpus_path = _require_file(
        args.in_path or cfg.corpus_dir / "corpus.jsonl", "corpus file")
    out_dir = Path(args.out) if args.out else cfg.models_dir / "embeddings"
    docs = load_corpus(corpus_path)
    sentences = [seg.tokens for doc in docs for seg in doc.segments if seg.tokens]
    model = train_skipgram(sentences, cfg.embedding)
    save_embeddings(model, out_dir)
    _emit({"sentences": len(sentences), "vocab": model.vocab_size,
           "dim": cfg.embedding.dim, "out": str(out_dir)})
    return EXIT_OK


def cmd_train(args, cfg: RunConfig) -> int:
    corpus_path = _require_file(
        args.corpus or cfg.corpus_dir / "corpus.jsonl", "corpus file")
    embeddings_dir = _require_dir(
        args.embeddings or cfg.models_dir / "embeddings", "embedding model")
    labels_path = _require_file(
        args.labels or cfg.corpus_dir / "labels.jsonl", "label file")
    consolidations = args.consolidations or cfg.corpus_dir / "consolidations.jsonl"
    out_dir = Path(args.out) if args.out else cfg.models_dir / "classifier"
    docs = load_corpus(corpus_path)
    embeddings = load_embeddings(embeddings_dir)
    store = _load_store(docs, labels_path, consolidations)
    gold = store.gold_dataset()
    model, history = train(gold, None, embeddings, cfg.classifier)
    save_model(model, out_dir)
    _emit({"train_size": len(gold), "epochs": cfg.classifier.epochs,
           "final_loss": history.train_loss[-1], "out": str(out_dir)})
    return EXIT_OK


def cmd_eval(args, cfg: RunConfig) -> int:
    corpus_path = _require_file(
        args.corpus or cfg.corpus_dir / "corpus.jsonl", "corpus file")
    embeddings_dir = _require_dir(
        args.embeddings or cfg.models_dir / "embeddings", "embedding model")
    model_dir = _require_dir(
        args.model or cfg.models_dir / "classifier", "classifier model")
    labels_path = _require_file(
        args.labels or cfg.corpus_dir / "labels.jsonl", "label file")
    consolidations = args.consolidations or cfg.corpus_dir / "consolidations.jsonl"
    docs = load_corpus(corpus_path)
    embeddings = load_embeddings(embeddings_dir)
    model = load_model(model_dir)
    gold = _load_store(docs, labels_path, consolidations).gold_dataset()
    report = evaluate(model, embeddings, gold)
    payload = report.to_dict()
    if args.out:
        out_path = Path(args.out)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=True, indent=2, sort_keys=True)
            fh.write("\n")
    _emit({"macro_f1": report.macro_f1, "accuracy": report.accuracy,
           "n_eval": len(gold)})
    return EXIT_OK


# -- active learning -----------------------------------------------


def cmd_al_step(args, cfg: RunConfig) -> int:
    corpus_path = _require_file(
        args.corpus or cfg.corpus_dir / "corpus.jsonl", "corpus file")
    embeddings_dir = _require_dir(
        args.embeddings or cfg.models_dir / "embeddings", "embedding model")
    labels_path = _require_file(
        args.labels or cfg.corpus_dir / "labels.jsonl", "label file")
    eval_labels = _require_file(args.eval_labels, "held-out label file")
    consolidations = args.consolidations or cfg.corpus_dir / "consolidations.jsonl"
    state_path = Path(args.out) if args.out else cfg.models_dir / "iteration_state.json"
    state_path.parent.mkdir(parents=True, exist_ok=True)
    docs = load_corpus(corpus_path)
    embeddings = load_embeddings(embeddings_dir)
    store = _load_store(docs, labels_path, consolidations)
    eval_set = _load_store(
        docs, eval_labels, args.eval_consolidations).gold_dataset()
    driver = ActiveLearningDriver(
        docs, store, embeddings, cfg.classifier, cfg.al, eval_set,
        state_path=state_path)
    if not driver.records:
        record = driver.bootstrap()
        _emit({"status": "bootstrapped", "iteration": record.iteration,
               "macro_f1": record.macro_f1, "train_size": record.train_size})
    try:
        record = driver.run_iteration()
    except IterationStalled as exc:
        _emit({"status": "awaiting_labels", "pending": len(driver.pending),
               "message": str(exc)})
        return EXIT_OK
    _emit({"status": "iterated", "iteration": record.iteration,
           "macro_f1": record.macro_f1, "labels_received": record.labels_received,
           "stop": driver.should_stop()})
    return EXIT_OK


# Compact profile for oracle-driven runs: small corpus, small model,
# same algorithms. Finishes in minutes on one core while leaving the
# learning dynamics intact. The corpus carries confusable class pairs
# whose private vocabulary the seed labels cover only partially, so the
# early iterations have genuine mistakes to fix and the demo run shows
# the macro-F1 climb instead of starting saturated.
_AUTO_CORPUS = SynthConfig(n_docs=110, min_segments=5, max_segments=8,
                           confusable=True, confusable_own=12, noise_words=1)
_AUTO_EMBEDDING = EmbeddingConfig(
    dim=32, n_min=3, n_max=4, epochs=40, learning_rate=0.1, window=3,
    negatives=5, min_count=1, bucket_count=3000, subsample_t=0.003)
# The seed round fits on a few dozen segments, so the epoch count is
# sized for step count, not wall time: too few optimizer steps leave
# the model unconfident and the discard rule then drops every pool
# candidate before the first query goes out.
_AUTO_CLASSIFIER = ClassifierConfig(
    n_filters=48, kernel_size=4, fc_units=48, max_len=16, epochs=150,
    learning_rate=0.001, batch_size=16)
_AUTO_AL = ActiveLearningConfig(pool_docs=30, query_budget=12)


def cmd_al_auto(args, cfg: RunConfig) -> int:
    if args.iters < 1:
        raise ConfigError("--iters must be positive, got %r" % (args.iters,))
    base = args.seed if args.seed is not None else 0
    state_path = Path(args.out) if args.out else cfg.models_dir / "iteration_state.json"
    state_path.parent.mkdir(parents=True, exist_ok=True)
    if state_path.exists():
        state_path.unlink()
    corpus_cfg = replace(_AUTO_CORPUS, seed=base)
    docs, oracle = synthetic_corpus(corpus_cfg)
    eval_docs, eval_oracle = synthetic_corpus(
        replace(corpus_cfg, n_docs=30, doc_prefix="eval", seed=base + 9))
    primers = [
        planted_policy(replace(corpus_cfg, seed=base + 500 * k),
                       doc_id="primer-%04d" % (k,), own_index=0)
        for k in range(2)
    ]
    sentences = [seg.tokens for doc in docs + eval_docs + primers
                 for seg in doc.segments]
    embeddings = train_skipgram(sentences, replace(_AUTO_EMBEDDING, seed=base + 1))
    oracle = dict(oracle)
    store = LabelStore()
    store.add_documents(primers + docs)
    for primer in primers:
        for seg in primer.segments:
            code = seg.seg_id + 1
            oracle[(primer.doc_id, seg.seg_id)] = code
            for k in range(store.n_annotators):
                store.record_label(seg.doc_id, seg.seg_id, "seed-%d" % (k,), code)
    eval_set = labeled_segments(eval_docs, eval_oracle)
    driver = ActiveLearningDriver(
        primers + docs, store, embeddings,
        replace(_AUTO_CLASSIFIER, seed=base + 2),
        replace(_AUTO_AL, seed=base + 3),
        eval_set, state_path=state_path)
    driver.bootstrap()
    lookup = oracle

    def answer(seg):
        return lookup[(seg.doc_id, seg.seg_id)]

    while len(driver.records) < args.iters:
        driver.run_iteration(oracle=answer)
    _emit({"records": len(driver.records),
           "history": [round(f1, 4) for f1 in driver.history],
           "state": str(state_path)})
    return EXIT_OK


# -- measurement and reporting -------------------------------------


def cmd_measure(args, cfg: RunConfig) -> int:
    corpus_path = _require_file(
        args.corpus or cfg.corpus_dir / "corpus.jsonl", "corpus file")
    embeddings_dir = _require_dir(
        args.embeddings or cfg.models_dir / "embeddings", "embedding model")
    model_dir = _require_dir(
        args.model or cfg.models_dir / "classifier", "classifier model")
    out_path = Path(args.out) if args.out else cfg.reports_dir / "measurements.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    tau = cfg.tau if args.tau is None else args.tau
    docs = load_corpus(corpus_path)
    embeddings = load_embeddings(embeddings_dir)
    model = load_model(model_dir)
    vectors = [measure_policy(model, embeddings, doc, tau=tau)
               for doc in docs if doc.segments]
    summary = aggregate(vectors)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump({
            "tau": tau,
            "summary": summary.to_dict(),
            "policies": [vec.to_dict() for vec in vectors],
        }, fh, ensure_ascii=True, indent=2, sort_keys=True)
        fh.write("\n")
    _emit({"policies": summary.n_policies,
           "full_compliance_fraction": summary.full_compliance_fraction,
           "out": str(out_path)})
    return EXIT_OK


def cmd_export_report(args, cfg: RunConfig) -> int:
    in_path = _require_file(
        args.in_path or cfg.reports_dir / "measurements.json", "measurement file")
    out_dir = Path(args.out) if args.out else cfg.reports_dir
    with open(in_path, encoding="utf-8") as fh:
        data = json.load(fh)
    summary = ComplianceSummary.from_dict(data["summary"])
    vectors = [ComplianceVector.from_dict(v) for v in data["policies"]]
    written = export_report(summary, vectors, out_dir)
    _emit({"written": [str(p) for p in written]})
    return EXIT_OK


# -- service -------------------------------------------------------


def _resolve_token_file(args, cfg: RunConfig) -> Path:
    env_value = os.environ.get(TOKEN_FILE_ENV)
    if env_value:
        return _require_file(env_value, "token file (%s)" % (TOKEN_FILE_ENV,))
    if cfg.token_file is not None:
        return _require_file(cfg.token_file, "token file")
    raise MissingInput(
        "no annotator token file: set %s or [service] token_file" % (TOKEN_FILE_ENV,))


def cmd_serve(args, cfg: RunConfig) -> int:
    import uvicorn

    tokens = load_tokens(_resolve_token_file(args, cfg))
    corpus_path = _require_file(
        args.corpus or cfg.corpus_dir / "corpus.jsonl", "corpus file")
    docs = load_corpus(corpus_path)
    labels_path = Path(args.labels) if args.labels else cfg.corpus_dir / "labels.jsonl"
    consolidations = (Path(args.consolidations) if args.consolidations
                      else cfg.corpus_dir / "consolidations.jsonl")
    store = _load_store(docs, labels_path, consolidations)

    driver = None
    state_path = cfg.models_dir / "iteration_state.json"
    if state_path.is_file():
        embeddings_dir = cfg.models_dir / "embeddings"
        embeddings = load_embeddings(embeddings_dir) if embeddings_dir.is_dir() else None
        driver = ActiveLearningDriver(
            docs, store, embeddings, cfg.classifier, cfg.al, eval_set=[],
            state_path=state_path)

    report = None
    measurements = cfg.reports_dir / "measurements.json"
    if measurements.is_file():
        with open(measurements, encoding="utf-8") as fh:
            report = ComplianceSummary.from_dict(json.load(fh)["summary"])

    def persist():
        store.save(labels_path, consolidations)

    service = AnnotationService(
        store, tokens, driver=driver, report=report,
        reveal_hints=args.adjudicate, on_change=persist)
    app = create_app(service, static_dir=cfg.static_dir)
    _emit({"serving": "http://%s:%d" % (cfg.host, cfg.port),
           "annotators": len(tokens), "queue": driver is not None})
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")
    return EXIT_OK


# -- argument wiring -----------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="run configuration file (INI format)")
    common.add_argument("--seed", type=int, default=None,
                        help="master seed overriding the configured ones")
    common.add_argument("--threads", type=int, default=None,
                        help="worker thread count (accepted for interface "
                             "stability; computation is single-process)")
    common.add_argument("--out", type=Path, default=None,
                        help="primary output path for this command")

    parser = argparse.ArgumentParser(
        prog="gdprscan",
        description="Privacy-policy disclosure classification pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("fetch", cmd_fetch, "download policy pages from a url list")
    p.add_argument("--in", dest="in_path", type=Path, required=True,
                   help="url list, one per line")
    p.add_argument("--delay", type=float, default=1.0,
                   help="politeness delay between requests, seconds")

    p = add("extract", cmd_extract, "extract plaintext from fetched pages")
    p.add_argument("--in", dest="in_path", type=Path, required=True,
                   help="directory of fetched pages")

    p = add("segment", cmd_segment, "split plaintext documents into segments")
    p.add_argument("--in", dest="in_path", type=Path, default=None,
                   help="plaintext document file from extract")

    p = add("embed-train", cmd_embed_train, "train subword embeddings on the corpus")
    p.add_argument("--in", dest="in_path", type=Path, default=None,
                   help="segmented corpus file")

    def model_io(p, with_model=False):
        p.add_argument("--corpus", type=Path, default=None)
        p.add_argument("--embeddings", type=Path, default=None)
        p.add_argument("--labels", type=Path, default=None)
        p.add_argument("--consolidations", type=Path, default=None)
        if with_model:
            p.add_argument("--model", type=Path, default=None)

    p = add("train", cmd_train, "train the requirement classifier on gold labels")
    model_io(p)

    p = add("eval", cmd_eval, "evaluate a trained classifier on gold labels")
    model_io(p, with_model=True)

    p = add("al-step", cmd_al_step, "run one query iteration (human labels)")
    model_io(p)
    p.add_argument("--eval-labels", type=Path, required=True,
                   help="held-out label file tracking iteration quality")
    p.add_argument("--eval-consolidations", type=Path, default=None)

    p = add("al-auto", cmd_al_auto, "run query iterations against a synthetic oracle")
    p.add_argument("--oracle", choices=["synthetic"], default="synthetic",
                   help="label source (only the synthetic oracle is built in)")
    p.add_argument("--iters", type=int, default=7,
                   help="total recorded rounds, counting the initial fit")

    p = add("measure", cmd_measure, "measure per-policy requirement coverage")
    model_io(p, with_model=True)
    p.add_argument("--tau", type=float, default=None,
                   help="evidence threshold (default from configuration)")

    p = add("serve", cmd_serve, "serve the annotation API and UI")
    model_io(p)
    p.add_argument("--adjudicate", action="store_true",
                   help="reveal model hints and co-annotator labels")

    p = add("export-report", cmd_export_report, "write report files from measurements")
    p.add_argument("--in", dest="in_path", type=Path, default=None,
                   help="measurement file from measure")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, seed=args.seed, threads=args.threads)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_CONFIG
    except MissingInput as exc:
        print(json.dumps({"error": "missing_input", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (GdprScanError, OSError) as exc:
        print(json.dumps({"error": "failure", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

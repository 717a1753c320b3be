"""End-to-end tests for the command-line pipeline.

Commands run in-process through ``main`` with a configuration small
enough to train in seconds, sharing one workspace per module so the
expensive stages (embedding and classifier training) run once.
"""

import contextlib
import io
import json
from types import SimpleNamespace

import numpy as np
import pytest

from gdprscan.annotation import LabelStore
from gdprscan.cli import main
from gdprscan.corpus import load_corpus, load_plaintext_documents, save_corpus

from conftest import TINY_CLASSIFIER, TINY_EMBEDDING


def _config_text(root):
    return """
[paths]
corpus_dir = %(root)s/data
models_dir = %(root)s/models
reports_dir = %(root)s/reports

[segment]
min_tokens = 2

[embedding]
dim = %(dim)d
n_min = %(n_min)d
n_max = %(n_max)d
epochs = %(e_epochs)d
learning_rate = %(e_lr)g
window = %(window)d
negatives = %(negatives)d
min_count = %(min_count)d
bucket_count = %(bucket_count)d
subsample_t = %(subsample_t)g
seed = %(e_seed)d

[classifier]
n_filters = %(n_filters)d
kernel_size = %(kernel_size)d
fc_units = %(fc_units)d
max_len = %(max_len)d
epochs = %(c_epochs)d
learning_rate = %(c_lr)g
batch_size = %(batch_size)d
seed = %(c_seed)d

[active_learning]
pool_docs = 3
query_budget = 5
seed = 11
""" % {
        "root": root,
        "dim": TINY_EMBEDDING.dim, "n_min": TINY_EMBEDDING.n_min,
        "n_max": TINY_EMBEDDING.n_max, "e_epochs": TINY_EMBEDDING.epochs,
        "e_lr": TINY_EMBEDDING.learning_rate, "window": TINY_EMBEDDING.window,
        "negatives": TINY_EMBEDDING.negatives,
        "min_count": TINY_EMBEDDING.min_count,
        "bucket_count": TINY_EMBEDDING.bucket_count,
        "subsample_t": TINY_EMBEDDING.subsample_t, "e_seed": TINY_EMBEDDING.seed,
        "n_filters": TINY_CLASSIFIER.n_filters,
        "kernel_size": TINY_CLASSIFIER.kernel_size,
        "fc_units": TINY_CLASSIFIER.fc_units, "max_len": TINY_CLASSIFIER.max_len,
        "c_epochs": TINY_CLASSIFIER.epochs,
        "c_lr": TINY_CLASSIFIER.learning_rate,
        "batch_size": TINY_CLASSIFIER.batch_size, "c_seed": TINY_CLASSIFIER.seed,
    }


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        rc = main(argv)
    lines = [json.loads(line) for line in out.getvalue().strip().splitlines()
             if line]
    errors = [json.loads(line) for line in err.getvalue().strip().splitlines()
              if line]
    return rc, lines, errors


def _label_everything(store, docs, oracle):
    for doc in docs:
        for seg in doc.segments:
            code = oracle[seg.ref]
            for k in range(store.n_annotators):
                store.record_label(seg.doc_id, seg.seg_id, "ann-%d" % (k,), code)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory, tiny_world):
    """A workspace where embed-train, train, eval, and measure have run."""
    root = tmp_path_factory.mktemp("cli-pipeline")
    (root / "data").mkdir()
    save_corpus(tiny_world.docs, root / "data" / "corpus.jsonl")
    store = LabelStore()
    store.add_documents(tiny_world.docs)
    _label_everything(store, tiny_world.docs, tiny_world.oracle)
    store.save(root / "data" / "labels.jsonl",
               root / "data" / "consolidations.jsonl")
    ini = root / "run.ini"
    ini.write_text(_config_text(root))

    results = {}
    for name, argv in [
        ("embed", ["embed-train", "--config", str(ini)]),
        ("train", ["train", "--config", str(ini)]),
        ("eval", ["eval", "--config", str(ini)]),
        ("measure", ["measure", "--config", str(ini)]),
        ("export", ["export-report", "--config", str(ini)]),
    ]:
        rc, lines, errors = _run(argv)
        assert rc == 0, (name, errors)
        results[name] = lines[-1]
    return SimpleNamespace(root=root, ini=ini, results=results)


class TestPipeline:
    def test_embed_train_writes_model_and_reports_vocab(self, pipeline):
        assert (pipeline.root / "models" / "embeddings").is_dir()
        payload = pipeline.results["embed"]
        assert payload["dim"] == TINY_EMBEDDING.dim
        assert payload["vocab"] > 0

    def test_train_reports_dataset_and_saves_model(self, pipeline):
        payload = pipeline.results["train"]
        assert payload["train_size"] == 234
        assert payload["epochs"] == TINY_CLASSIFIER.epochs
        assert (pipeline.root / "models" / "classifier" / "weights.f32").is_file()

    def test_model_manifest_echoes_configured_hyperparameters(self, pipeline):
        manifest = json.loads(
            (pipeline.root / "models" / "classifier" / "manifest.json").read_text())
        config = manifest["config"]
        assert config["n_filters"] == TINY_CLASSIFIER.n_filters
        assert config["kernel_size"] == TINY_CLASSIFIER.kernel_size
        assert config["fc_units"] == TINY_CLASSIFIER.fc_units
        assert config["epochs"] == TINY_CLASSIFIER.epochs
        assert config["learning_rate"] == pytest.approx(
            TINY_CLASSIFIER.learning_rate)

    def test_eval_on_training_labels_shows_memorization(self, pipeline):
        payload = pipeline.results["eval"]
        assert payload["n_eval"] == 234
        assert payload["accuracy"] >= 0.99

    def test_measure_covers_every_policy_with_segments(self, pipeline):
        payload = pipeline.results["measure"]
        assert payload["policies"] == 36
        data = json.loads(
            (pipeline.root / "reports" / "measurements.json").read_text())
        assert len(data["policies"]) == 36
        assert sum(data["summary"]["histogram"]) == 36

    def test_export_writes_all_three_report_files(self, pipeline):
        written = pipeline.results["export"]["written"]
        assert len(written) == 3
        policies_csv = pipeline.root / "reports" / "report_policies.csv"
        assert len(policies_csv.read_text().splitlines()) == 37

    def test_retrain_reproduces_model_byte_for_byte(self, pipeline):
        rc, lines, errors = _run(
            ["train", "--config", str(pipeline.ini),
             "--out", str(pipeline.root / "models" / "classifier-again")])
        assert rc == 0, errors
        first = pipeline.root / "models" / "classifier"
        second = pipeline.root / "models" / "classifier-again"
        for name in ("weights.f32", "manifest.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_remeasure_reproduces_report_byte_for_byte(self, pipeline):
        again = pipeline.root / "reports" / "measurements-again.json"
        rc, _, errors = _run(
            ["measure", "--config", str(pipeline.ini), "--out", str(again)])
        assert rc == 0, errors
        original = pipeline.root / "reports" / "measurements.json"
        assert again.read_bytes() == original.read_bytes()


class TestExtractAndSegment:
    def test_extract_reads_a_bare_page_directory(self, tmp_path):
        pages = tmp_path / "pages"
        pages.mkdir()
        (pages / "policy-a.html").write_text(
            "<html><body><p>We collect your email address and name for "
            "account purposes.</p></body></html>")
        (pages / "policy-b.html").write_text(
            "<html><body><p>Data is retained for two years after account "
            "closure in all cases.</p></body></html>")
        out = tmp_path / "documents.jsonl"
        rc, lines, errors = _run(
            ["extract", "--in", str(pages), "--out", str(out)])
        assert rc == 0, errors
        assert lines[-1]["documents"] == 2
        docs = load_plaintext_documents(out)
        assert [doc.doc_id for doc in docs] == ["policy-a", "policy-b"]
        assert all(doc.plaintext for doc in docs)

    def test_segment_turns_documents_into_a_corpus(self, tmp_path):
        pages = tmp_path / "pages"
        pages.mkdir()
        sentence = ("We collect your email address and usage records for "
                    "marketing and product improvement purposes. ")
        (pages / "pol.html").write_text(
            "<html><body><p>%s</p></body></html>" % (sentence * 30,))
        documents = tmp_path / "documents.jsonl"
        corpus = tmp_path / "corpus.jsonl"
        rc, _, _ = _run(["extract", "--in", str(pages), "--out", str(documents)])
        assert rc == 0
        rc, lines, errors = _run(
            ["segment", "--in", str(documents), "--out", str(corpus)])
        assert rc == 0, errors
        assert lines[-1]["segments"] >= 2
        docs = load_corpus(corpus)
        assert all(seg.tokens for doc in docs for seg in doc.segments)


class TestExitCodes:
    def test_missing_input_is_exit_2(self, tmp_path):
        rc, _, errors = _run(
            ["fetch", "--in", str(tmp_path / "absent.txt")])
        assert rc == 2
        assert errors[-1]["error"] == "missing_input"

    def test_missing_corpus_for_train_is_exit_2(self, tmp_path):
        rc, _, errors = _run(
            ["train", "--corpus", str(tmp_path / "absent.jsonl")])
        assert rc == 2
        assert errors[-1]["error"] == "missing_input"

    def test_bad_config_file_is_exit_3(self, tmp_path):
        ini = tmp_path / "bad.ini"
        ini.write_text("[surprises]\nx = 1\n")
        rc, _, errors = _run(["eval", "--config", str(ini)])
        assert rc == 3
        assert errors[-1]["error"] == "config"

    def test_bad_flag_value_is_exit_3(self):
        rc, _, errors = _run(["eval", "--threads", "0"])
        assert rc == 3
        assert errors[-1]["error"] == "config"

    def test_corrupt_artifact_is_exit_1(self, tmp_path):
        broken = tmp_path / "documents.jsonl"
        broken.write_text("this is not json\n")
        rc, _, errors = _run(
            ["segment", "--in", str(broken), "--out", str(tmp_path / "c.jsonl")])
        assert rc == 1
        assert errors[-1]["error"] == "failure"


class TestQueryIterationStep:
    def test_step_without_labels_reports_awaiting(self, pipeline, tmp_path,
                                                  tiny_world):
        seed_labels = tmp_path / "seed_labels.jsonl"
        seed_cons = tmp_path / "seed_consolidations.jsonl"
        store = LabelStore()
        store.add_documents(tiny_world.docs)
        _label_everything(store, tiny_world.docs[:4], tiny_world.oracle)
        store.save(seed_labels, seed_cons)

        eval_labels = tmp_path / "eval_labels.jsonl"
        eval_cons = tmp_path / "eval_consolidations.jsonl"
        held_out = LabelStore()
        held_out.add_documents(tiny_world.docs)
        _label_everything(held_out, tiny_world.docs[30:], tiny_world.oracle)
        held_out.save(eval_labels, eval_cons)

        state = tmp_path / "state.json"
        argv = ["al-step", "--config", str(pipeline.ini),
                "--labels", str(seed_labels),
                "--consolidations", str(seed_cons),
                "--eval-labels", str(eval_labels),
                "--eval-consolidations", str(eval_cons),
                "--out", str(state)]
        rc, lines, errors = _run(argv)
        assert rc == 0, errors
        assert lines[0]["status"] == "bootstrapped"
        assert lines[0]["train_size"] > 0
        assert lines[-1]["status"] == "awaiting_labels"
        assert lines[-1]["pending"] == 5
        assert state.is_file()

        rc, lines, errors = _run(argv)
        assert rc == 0, errors
        assert [entry["status"] for entry in lines] == ["awaiting_labels"]
        assert lines[-1]["pending"] == 5


class TestAutoQueryLoop:
    def test_oracle_run_records_every_round_with_rising_trend(self, tmp_path):
        state = tmp_path / "state.json"
        rc, lines, errors = _run(
            ["al-auto", "--iters", "7", "--out", str(state)])
        assert rc == 0, errors
        payload = lines[-1]
        assert payload["records"] == 7
        history = payload["history"]
        assert len(history) == 7
        assert all(0.0 <= f1 <= 1.0 for f1 in history)
        slope = np.polyfit(np.arange(7.0), history, 1)[0]
        assert slope >= 0.0
        data = json.loads(state.read_text())
        assert len(data["records"]) == 7

    def test_iteration_count_must_be_positive(self, tmp_path):
        rc, _, errors = _run(
            ["al-auto", "--iters", "0",
             "--out", str(tmp_path / "state.json")])
        assert rc == 3
        assert errors[-1]["error"] == "config"

"""Throwaway smoke: annotation store + AL driver + compliance on synth data."""
import tempfile
import time
from pathlib import Path

import numpy as np

from gdprscan.active import (
    ActiveLearningConfig, ActiveLearningDriver, sample_pool, select_queries, should_stop,
)
from gdprscan.annotation import LabelStore, Status, consolidate
from gdprscan.classifier import ClassifierConfig, split_by_document
from gdprscan.compliance import aggregate, export_report, measure_policy
from gdprscan.embeddings import EmbeddingConfig, train_skipgram
from gdprscan.synth import SynthConfig, labeled_segments, planted_policy, synthetic_corpus

t0 = time.time()

# consolidate basics
r = consolidate([2, 2, 2, 7])
assert r.status is Status.ACCEPTED and r.gold_label_code == 2 and r.agreement == 0.75
r = consolidate([2, 2, 7, 7])
assert r.status is Status.DISCUSS and r.gold_label_code is None and r.agreement == 0.5
r = consolidate([1, 2, 3, 4])
assert r.status is Status.REJECTED and r.agreement == 0.25

# should_stop examples
assert should_stop([0.79, 0.82, 0.85, 0.87, 0.88, 0.881, 0.8812]) is True
assert should_stop([0.5, 0.6]) is False
assert should_stop([0.1] * 20) is True

# corpus + embeddings
scfg = SynthConfig(n_docs=120, min_segments=5, max_segments=8, confusable=True,
                   filler_segment_rate=0.1, seed=3)
docs, oracle = synthetic_corpus(scfg)
sentences = [seg.tokens for doc in docs for seg in doc.segments]
emb = train_skipgram(sentences, EmbeddingConfig(
    dim=32, n_min=3, n_max=4, epochs=30, learning_rate=0.1, window=3,
    negatives=5, min_count=1, bucket_count=3000, subsample_t=0.003, seed=5))
print(f"embeddings {time.time()-t0:.0f}s loss {emb.history[0]:.2f}->{emb.history[-1]:.2f}")

# seed gold: first 12 docs via simulated annotators; eval set: last 24 docs
seed_docs, rest = docs[:12], docs[12:]
eval_docs = rest[-24:]
pool_docs = docs  # driver excludes labeled docs itself
store = LabelStore()
store.add_documents(docs)
for doc in seed_docs:
    for seg in doc.segments:
        code = oracle[(doc.doc_id, seg.seg_id)]
        for k in range(4):
            store.record_label(seg.doc_id, seg.seg_id, f"ann-{k}", code)
gold = store.gold_dataset()
print("seed gold:", len(gold))

eval_set = labeled_segments(eval_docs, oracle)
print("eval set:", len(eval_set))

ccfg = ClassifierConfig(n_filters=48, kernel_size=4, fc_units=48, max_len=16,
                        epochs=30, learning_rate=0.001, batch_size=32, seed=7)
alcfg = ActiveLearningConfig(pool_docs=25, query_budget=60, seed=11)

with tempfile.TemporaryDirectory() as td:
    state_path = Path(td) / "iteration_state.json"
    # exclude eval docs from the samplable pool
    eval_ids = {d.doc_id for d in eval_docs}
    driver = ActiveLearningDriver(
        [d for d in docs if d.doc_id not in eval_ids],
        store, emb, ccfg, alcfg, eval_set, state_path=state_path)
    rec0 = driver.bootstrap()
    print(f"bootstrap f1={rec0.macro_f1:.3f} train={rec0.train_size}")
    def answer(segment):
        return oracle[(segment.doc_id, segment.seg_id)]
    for i in range(3):
        rec = driver.run_iteration(oracle=answer)
        print(f"iter {rec.iteration}: f1={rec.macro_f1:.3f} train={rec.train_size} "
              f"queries={len(rec.queries)} discarded={rec.n_discarded} "
              f"sampled={len(rec.sampled_docs)}")
    # ledger: no repeats
    all_queries = [ref for r in driver.records for ref in r.queries]
    assert len(all_queries) == len(set(all_queries)), "segment queried twice"
    # resume from disk
    driver2 = ActiveLearningDriver(
        [d for d in docs if d.doc_id not in eval_ids],
        store, emb, ccfg, alcfg, eval_set, state_path=state_path)
    assert driver2.iteration == driver.iteration
    assert driver2.history == driver.history

    # compliance on the final model
    model = driver.model
    planted = planted_policy(scfg)
    vec = measure_policy(model, emb, planted, tau=0.5)
    print("planted coverage:", vec.n_covered, "/18")
    vectors = [measure_policy(model, emb, d, tau=0.5) for d in eval_docs]
    summary = aggregate(vectors)
    print("histogram:", summary.histogram)
    paths = export_report(summary, vectors, Path(td) / "report")
    for p in paths:
        print("wrote", p.name, p.stat().st_size, "bytes")

print("SMOKE OK %.0fs" % (time.time() - t0))

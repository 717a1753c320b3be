import collections

import numpy as np

from gdprscan.active import ActiveLearningDriver, sample_pool, score_candidates, select_queries
from gdprscan.benchmark import BenchmarkConfig, _prepare, _seed_store
from gdprscan.classifier import predict_batch, train
from gdprscan.nn import compute_metrics

cfg = BenchmarkConfig()
fx = _prepare(cfg, seed=0)
store = _seed_store(fx)
gold = store.gold_dataset()
print("gold size:", len(gold))
print("gold class counts:", sorted(collections.Counter(ls.label_code for ls in gold).items()))

model, hist = train(gold, None, fx.embeddings, fx.classifier_cfg)
eval_golds = np.array([ls.label_code - 1 for ls in fx.eval_set])
eval_segs = [ls.segment for ls in fx.eval_set]
_, codes, _ = predict_batch(model, fx.embeddings, eval_segs)
rep = compute_metrics(codes - 1, eval_golds, n_classes=18)
print("bootstrap macro F1: %.3f" % rep.macro_f1)
print("per-class F1:", [round(f, 2) for f in rep.f1])

segs = sample_pool(fx.seed_docs + fx.pool_docs, n_policies=fx.al_cfg.pool_docs,
                   seed=fx.al_cfg.seed + 7919,
                   exclude_docs={d.doc_id for d in fx.seed_docs})
cands = score_candidates(model, fx.embeddings, segs)
by_ref = {(s.doc_id, s.seg_id): s for s in segs}
true = {c.ref: fx.oracle[(c.doc_id, c.seg_id)] for c in cands}
qualified = [c for c in cands if c.max_prob > fx.al_cfg.discard_threshold]
print("candidates %d, qualified %d" % (len(cands), len(qualified)))
print("qualified class counts:",
      sorted(collections.Counter(true[c.ref] for c in qualified).items()))
disc = [c for c in cands if c.max_prob <= fx.al_cfg.discard_threshold]
print("discarded class counts:",
      sorted(collections.Counter(true[c.ref] for c in disc).items()))

queries = select_queries(cands, budget=fx.al_cfg.query_budget,
                         discard_threshold=fx.al_cfg.discard_threshold)
qc = collections.Counter(true[c.ref] for c in queries)
print("margin-query class counts:", sorted(qc.items()))
print("margin-query correctness: %d/%d top1 right" %
      (sum(1 for c in queries if c.top1 == true[c.ref]), len(queries)))
print("query margins: min %.3f median %.3f max %.3f" % (
    min(c.margin for c in queries),
    float(np.median([c.margin for c in queries])),
    max(c.margin for c in queries)))

rng = np.random.default_rng(fx.al_cfg.seed + 5)
take = min(fx.al_cfg.query_budget, len(segs))
picked = rng.choice(len(segs), size=take, replace=False)
rc = collections.Counter(fx.oracle[(segs[i].doc_id, segs[i].seg_id)] for i in picked)
print("random-pick class counts:", sorted(rc.items()))

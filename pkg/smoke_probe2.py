import time
from collections import Counter

import numpy as np

from gdprscan.active import ActiveLearningDriver
from gdprscan.benchmark import BenchmarkConfig, _prepare, _seed_store
from gdprscan.classifier import predict_batch
from gdprscan.synth import class_keywords, _CONFUSABLE_PAIRS
from dataclasses import replace

cfg = BenchmarkConfig()
fx = _prepare(cfg, 0)

members = [c for p in _CONFUSABLE_PAIRS for c in p]
kw = class_keywords(replace(cfg.corpus, seed=0))
kpc = cfg.corpus.keywords_per_class
fam_of = {}
for code in members:
    pool = kw[code]
    for j, w in enumerate(pool[kpc:]):
        fam_of[w] = (code, j // 6)

def cells(store):
    got = set()
    for (doc_id, seg_id), code in store_codes(store).items():
        seg = seg_lookup.get((doc_id, seg_id))
        if seg is None or code not in members:
            continue
        for t in seg.tokens:
            if t in fam_of:
                got.add(fam_of[t])
    return got

def store_codes(store):
    out = {}
    for ref, res in store._consolidations.items():
        if res.status.name == "ACCEPTED":
            out[ref] = res.gold_label_code
    return out

seg_lookup = {}
for doc in fx.seed_docs + fx.pool_docs:
    for seg in doc.segments:
        seg_lookup[(doc.doc_id, seg.seg_id)] = seg

store = _seed_store(fx)
driver = ActiveLearningDriver(
    fx.seed_docs + fx.pool_docs, store, fx.embeddings,
    fx.classifier_cfg, fx.al_cfg, fx.eval_set)
rec = driver.bootstrap()

eval_golds = np.array([ls.label_code - 1 for ls in fx.eval_set])
eval_segs = [ls.segment for ls in fx.eval_set]

def pair_f1():
    probs, codes, _ = predict_batch(driver.model, fx.embeddings, eval_segs)
    from gdprscan.nn import compute_metrics
    rep = compute_metrics(codes - 1, eval_golds, n_classes=19 - 1)
    return rep.macro_f1, [round(rep.f1[c - 1], 2) for c in members]

m, pf = pair_f1()
print("bootstrap macro %.3f pairs %s cells %d/48" % (m, pf, len(cells(store))))
for r in range(5):
    t0 = time.time()
    rec = driver.run_iteration(oracle=lambda s: fx.oracle[(s.doc_id, s.seg_id)])
    qcodes = Counter(fx.oracle[ref] for ref in rec.queries)
    qmargins = []
    m, pf = pair_f1()
    print("round %d macro %.3f pairs %s cells %d/48 queries %s (%.0fs)"
          % (r + 1, m, pf, len(cells(store)),
             sorted(qcodes.items()), time.time() - t0))

import time
from collections import Counter, defaultdict
from dataclasses import replace

import numpy as np

from gdprscan.active import ActiveLearningDriver, sample_pool, score_candidates
from gdprscan.benchmark import BenchmarkConfig, _prepare, _seed_store
from gdprscan.classifier import predict_batch
from gdprscan.nn import compute_metrics
from gdprscan.synth import class_keywords, SPECIALIZED_MEMBERS

t0 = time.time()
cfg = BenchmarkConfig()
fx = _prepare(cfg, 0)
print("prepare %.0fs" % (time.time() - t0))

kw = class_keywords(replace(cfg.corpus, seed=0))
kpc = cfg.corpus.keywords_per_class
own = {c: kw[c][kpc:] for c in SPECIALIZED_MEMBERS}

emb = fx.embeddings
def vec(w):
    v = emb.word_vector(w)
    return v / (np.linalg.norm(v) + 1e-12)

v2 = np.array([vec(w) for w in own[2]])
v4 = np.array([vec(w) for w in own[4]])
n_units = len(own[2]) // 2
within = [float(v2[2 * i] @ v2[2 * i + 1]) for i in range(n_units)]
crossu = []
for i in range(n_units):
    for j in range(i + 1, n_units):
        crossu.append(float(v2[2 * i] @ v2[2 * j]))
crossm = (v2 @ v4.T).ravel()
print("own cos within unit: median %.3f p10 %.3f" %
      (np.median(within), np.percentile(within, 10)))
print("own cos cross unit same member: median %.3f p90 %.3f" %
      (np.median(crossu), np.percentile(crossu, 90)))
print("own cos cross member: median %.3f p90 %.3f" %
      (np.median(crossm), np.percentile(crossm, 90)))
g = np.array([vec("glimmer" + n) for n in ("one", "two", "three")])
print("own vs glimmer cos: median %.3f" % np.median((v2 @ g.T).ravel()))

store = _seed_store(fx)
print("seed gold size %d" % len(store.gold_dataset()))
driver = ActiveLearningDriver(
    fx.seed_docs + fx.pool_docs, store, fx.embeddings,
    fx.classifier_cfg, fx.al_cfg, fx.eval_set)
rec = driver.bootstrap()
eval_golds = np.array([ls.label_code - 1 for ls in fx.eval_set])
eval_segs = [ls.segment for ls in fx.eval_set]
probs, codes, _ = predict_batch(driver.model, fx.embeddings, eval_segs)
rep = compute_metrics(codes - 1, eval_golds, n_classes=18)
print("bootstrap macro %.3f" % rep.macro_f1)
print("per-class F1:", [round(f, 2) for f in rep.f1])

pool = sample_pool(fx.seed_docs + fx.pool_docs, n_policies=fx.al_cfg.pool_docs,
                   seed=fx.al_cfg.seed + 7919,
                   exclude_docs={d.doc_id for d in fx.seed_docs},
                   exclude_refs=set())
cands = score_candidates(driver.model, fx.embeddings, pool)
qual = [c for c in cands if c.max_prob > fx.al_cfg.discard_threshold]
disc = [c for c in cands if c.max_prob <= fx.al_cfg.discard_threshold]
print("candidates %d qualified %d" % (len(cands), len(qual)))
bycls = defaultdict(list)
for c in qual:
    bycls[fx.oracle[(c.doc_id, c.seg_id)]].append(c.margin)
for code in sorted(bycls):
    ms = bycls[code]
    print("  class %2d qualified %3d margin med %.2f min %.2f"
          % (code, len(ms), np.median(ms), min(ms)))
print("discarded classes:", sorted(Counter(
    fx.oracle[(c.doc_id, c.seg_id)] for c in disc).items()))

for r in range(3):
    rec = driver.run_iteration(oracle=lambda s: fx.oracle[(s.doc_id, s.seg_id)])
    qcodes = Counter(fx.oracle[ref] for ref in rec.queries)
    print("round%d macro %.3f queries %s" % (r + 1, rec.macro_f1,
                                             sorted(qcodes.items())))
print("total %.0fs" % (time.time() - t0))

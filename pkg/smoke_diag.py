import collections

import numpy as np

from gdprscan.benchmark import BenchmarkConfig, _prepare
from gdprscan.classifier import predict_batch, train
from gdprscan.nn import compute_metrics
from gdprscan.synth import class_keywords, labeled_segments

cfg = BenchmarkConfig()
fx = _prepare(cfg, seed=0)
kw = class_keywords(cfg.corpus)

# geometry: family-word vectors within member 1 vs across members 1/2
fam1 = kw[1][cfg.corpus.keywords_per_class :]
fam2 = kw[2][cfg.corpus.keywords_per_class :]
V1 = np.stack([fx.embeddings.word_vector(w) for w in fam1])
V2 = np.stack([fx.embeddings.word_vector(w) for w in fam2])

def cosmat(A, B):
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    B = B / np.linalg.norm(B, axis=1, keepdims=True)
    return A @ B.T

n_fam = cfg.corpus.confusable_own
n_var = len(fam1) // n_fam
C11 = cosmat(V1, V1)
within_family = []
cross_family = []
for i in range(len(fam1)):
    for j in range(i + 1, len(fam1)):
        if i // n_var == j // n_var:
            within_family.append(C11[i, j])
        else:
            cross_family.append(C11[i, j])
C12 = cosmat(V1, V2)
print("within-family cos: median %.3f" % float(np.median(within_family)))
print("cross-family (same member) cos: median %.3f p90 %.3f" % (
    float(np.median(cross_family)), float(np.percentile(cross_family, 90))))
print("cross-member cos: median %.3f p90 %.3f max %.3f" % (
    float(np.median(C12)), float(np.percentile(C12, 90)), C12.max()))
sh = np.stack([fx.embeddings.word_vector(w) for w in kw[1][:6]])
print("family-vs-shared cos: median %.3f" %
      float(np.median(cosmat(V1, sh))))

train_set = labeled_segments(fx.docs[:120], fx.oracle)
model, _ = train(train_set, None, fx.embeddings, fx.classifier_cfg)
golds = np.array([ls.label_code - 1 for ls in fx.eval_set])
segs = [ls.segment for ls in fx.eval_set]
_, codes, margins = predict_batch(model, fx.embeddings, segs)
rep = compute_metrics(codes - 1, golds, n_classes=18)
print("eval macro %.3f pairs %s" % (rep.macro_f1, [round(f, 2) for f in rep.f1[:4]]))

errs = collections.Counter()
for ls, pred in zip(fx.eval_set, codes):
    if ls.label_code != pred and ls.label_code <= 4:
        errs[(ls.label_code, int(pred))] += 1
print("pair-class error flows (true, predicted):", errs.most_common(12))

# training coverage per family word
cover = collections.Counter()
for ls in train_set:
    if ls.label_code <= 4:
        for t in ls.segment.tokens:
            for m in (1, 2, 3, 4):
                fams = kw[m][cfg.corpus.keywords_per_class :]
                if t in fams:
                    cover[t] += 1
per_fam = [cover.get(w, 0) for w in fam1 + fam2]
print("member-1/2 family-word train counts: min %d median %d" % (
    min(per_fam), int(np.median(per_fam))))

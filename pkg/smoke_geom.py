import numpy as np

from gdprscan.benchmark import BenchmarkConfig, _prepare
from gdprscan.classifier import ClassifierConfig, predict_batch, train
from gdprscan.embeddings import EmbeddingConfig
from gdprscan.nn import compute_metrics
from gdprscan.synth import class_markers, labeled_segments

cfg = BenchmarkConfig(
    embedding=EmbeddingConfig(
        dim=64, n_min=3, n_max=4, epochs=2, learning_rate=0.05,
        window=3, negatives=5, min_count=1, bucket_count=20011,
        subsample_t=0.003),
    classifier=ClassifierConfig(
        n_filters=128, kernel_size=4, fc_units=64, max_len=16,
        epochs=100, learning_rate=0.001, batch_size=32),
)
fx = _prepare(cfg, seed=0)
markers = class_markers(cfg.corpus)
vecs = {}
for code, words in markers.items():
    for w in words:
        vecs[(code, w)] = fx.embeddings.word_vector(w)
keys = sorted(vecs)
M = np.stack([vecs[k] for k in keys])
norms = np.linalg.norm(M, axis=1, keepdims=True)
C = (M / norms) @ (M / norms).T
same = []
cross = []
for i, (ci, _) in enumerate(keys):
    for j, (cj, _) in enumerate(keys):
        if i < j:
            (same if ci == cj else cross).append(C[i, j])
print("marker norms: min %.3f median %.3f max %.3f" %
      (norms.min(), float(np.median(norms)), norms.max()))
print("same-member cos: median %.3f" % float(np.median(same)))
print("cross cos: median %.3f  p90 %.3f  max %.3f" % (
    float(np.median(cross)), float(np.percentile(cross, 90)), max(cross)))
kw = fx.embeddings.word_vector("glimmerone")
print("shared-keyword norm: %.3f" % np.linalg.norm(kw))
fill = fx.embeddings.word_vector("website")
print("filler norm: %.3f" % np.linalg.norm(fill))

train_set = labeled_segments(fx.docs[:120], fx.oracle)
model, _ = train(train_set, None, fx.embeddings, fx.classifier_cfg)

def report(name, labeled):
    golds = np.array([ls.label_code - 1 for ls in labeled])
    segs = [ls.segment for ls in labeled]
    _, codes, _ = predict_batch(model, fx.embeddings, segs)
    rep = compute_metrics(codes - 1, golds, n_classes=18)
    print("%s macro %.3f pairs %s" % (name, rep.macro_f1,
                                      [round(f, 2) for f in rep.f1[:4]]))

report("train", train_set)
report("eval", fx.eval_set)

import numpy as np

from gdprscan.benchmark import BenchmarkConfig, _prepare
from gdprscan.classifier import predict_batch, train
from gdprscan.nn import compute_metrics
from gdprscan.synth import labeled_segments

cfg = BenchmarkConfig()
fx = _prepare(cfg, seed=0)
train_set = labeled_segments(fx.docs[:120], fx.oracle)
print("train size:", len(train_set))
model, _ = train(train_set, None, fx.embeddings, fx.classifier_cfg)
eval_golds = np.array([ls.label_code - 1 for ls in fx.eval_set])
segs = [ls.segment for ls in fx.eval_set]
_, codes, _ = predict_batch(model, fx.embeddings, segs)
rep = compute_metrics(codes - 1, eval_golds, n_classes=18)
print("ceiling macro F1: %.3f" % rep.macro_f1)
print("pair F1:", [round(f, 2) for f in rep.f1[:4]])

import time
from dataclasses import replace

import numpy as np

from gdprscan.benchmark import BenchmarkConfig, _prepare
from gdprscan.classifier import ClassifierConfig, predict_batch, train
from gdprscan.embeddings import EmbeddingConfig
from gdprscan.nn import compute_metrics
from gdprscan.synth import labeled_segments

GRID = [
    dict(dim=64, eepochs=6, filters=128, fc=64, cepochs=100),
    dict(dim=64, eepochs=10, filters=128, fc=64, cepochs=100),
    dict(dim=48, eepochs=6, filters=128, fc=64, cepochs=120),
]

for g in GRID:
    cfg = BenchmarkConfig(
        embedding=EmbeddingConfig(
            dim=g["dim"], n_min=3, n_max=4, epochs=g["eepochs"],
            learning_rate=0.1, window=3, negatives=5, min_count=1,
            bucket_count=3000, subsample_t=0.003),
        classifier=ClassifierConfig(
            n_filters=g["filters"], kernel_size=4, fc_units=g["fc"],
            max_len=16, epochs=g["cepochs"], learning_rate=0.001,
            batch_size=32),
    )
    t0 = time.time()
    fx = _prepare(cfg, seed=0)
    train_set = labeled_segments(fx.docs[:120], fx.oracle)
    model, _ = train(train_set, None, fx.embeddings, fx.classifier_cfg)
    eval_golds = np.array([ls.label_code - 1 for ls in fx.eval_set])
    segs = [ls.segment for ls in fx.eval_set]
    _, codes, _ = predict_batch(model, fx.embeddings, segs)
    rep = compute_metrics(codes - 1, eval_golds, n_classes=18)
    print("%s -> macro %.3f pairs %s (%.0fs)" % (
        g, rep.macro_f1, [round(f, 2) for f in rep.f1[:4]], time.time() - t0))

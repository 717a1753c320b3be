"""Throwaway smoke check: synthetic corpus -> embeddings -> CNN -> eval."""
import time

import numpy as np

from gdprscan.classifier import (
    ClassifierConfig, encode_segment, evaluate, load_model, predict_batch,
    save_model, split_by_document, train,
)
from gdprscan.embeddings import EmbeddingConfig, train_skipgram
from gdprscan.synth import SynthConfig, labeled_segments, synthetic_corpus

t0 = time.time()
scfg = SynthConfig(n_docs=40, min_segments=5, max_segments=8, seed=3)
docs, oracle = synthetic_corpus(scfg)
sentences = [seg.tokens for doc in docs for seg in doc.segments]
print("segments:", len(sentences))

ecfg = EmbeddingConfig(dim=24, n_min=3, n_max=4, epochs=2, learning_rate=0.05,
                       window=3, negatives=3, min_count=1, bucket_count=3000,
                       subsample_t=0.05, seed=5)
emb = train_skipgram(sentences, ecfg)
print(f"embedding trained in {time.time()-t0:.1f}s, vocab={emb.vocab_size}, "
      f"loss {emb.history[0]:.3f}->{emb.history[-1]:.3f}")

labeled = labeled_segments(docs, oracle)
train_set, test_set = split_by_document(labeled, ratio=0.8, seed=11)
train_docs = {ls.segment.doc_id for ls in train_set}
test_docs = {ls.segment.doc_id for ls in test_set}
assert not (train_docs & test_docs)
print("train/test:", len(train_set), len(test_set), "docs:", len(train_docs), len(test_docs))

ccfg = ClassifierConfig(n_filters=48, kernel_size=4, fc_units=48, max_len=16,
                        epochs=14, learning_rate=0.001, batch_size=32, seed=7)
t1 = time.time()
model, hist = train(train_set, test_set, emb, ccfg)
print(f"trained in {time.time()-t1:.1f}s")
print("loss:", [round(x, 3) for x in hist.train_loss])
print("acc:", [round(x, 3) for x in hist.train_accuracy])
print("val f1:", [round(x, 3) for x in hist.val_macro_f1])

report = evaluate(model, emb, test_set)
print("test accuracy:", round(report.accuracy, 4), "macro F1:", round(report.macro_f1, 4))

probs, codes, margins = predict_batch(model, emb, [ls.segment for ls in test_set])
assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-5)
assert ((margins >= 0) & (margins <= 1)).all()

# per-example predict agrees with the batch path
for ls in test_set[:5]:
    p, c, m = model.predict(emb, ls.segment.tokens)
    i = [x.segment.ref for x in test_set].index(ls.segment.ref)
    assert np.allclose(p, probs[i], atol=1e-6) and c == codes[i]

# round trip
import tempfile
with tempfile.TemporaryDirectory() as td:
    save_model(model, td)
    again = load_model(td)
    for ls in test_set[:10]:
        p1, c1, m1 = model.predict(emb, ls.segment.tokens)
        p2, c2, m2 = again.predict(emb, ls.segment.tokens)
        assert np.array_equal(p1, p2) and c1 == c2

# wrong embeddings refused
emb2 = train_skipgram(sentences, EmbeddingConfig(dim=24, n_min=3, n_max=4, epochs=1,
                      learning_rate=0.05, window=3, negatives=3, min_count=1,
                      bucket_count=3000, subsample_t=0.05, seed=99))
try:
    model.predict(emb2, test_set[0].segment.tokens)
    raise AssertionError("expected ModelMismatch")
except Exception as exc:
    assert type(exc).__name__ == "ModelMismatch", exc

# determinism of training
model_b, hist_b = train(train_set, test_set, emb, ccfg)
assert np.array_equal(model.net.params["conv_w"], model_b.net.params["conv_w"])
print("deterministic training: OK")
print("TOTAL %.1fs" % (time.time() - t0))

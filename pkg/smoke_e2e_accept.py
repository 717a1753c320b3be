"""Throwaway: validate the e2e acceptance recipe (40 train + 10 test docs,
one segment per class each, acc >= 0.95 within 50 epochs, checksum stable)."""
import sys
import time
from dataclasses import replace

sys.path.insert(0, "src")

from gdprscan.classifier import ClassifierConfig, evaluate, train
from gdprscan.embeddings import EmbeddingConfig, train_skipgram
from gdprscan.synth import SynthConfig, labeled_segments, planted_policy

CORPUS = SynthConfig(n_docs=1)
EMBEDDING = EmbeddingConfig(
    dim=32, n_min=3, n_max=4, epochs=40, learning_rate=0.1,
    window=3, negatives=5, min_count=1, bucket_count=3000,
    subsample_t=0.003, seed=1,
)
CLASSIFIER = ClassifierConfig(
    n_filters=48, kernel_size=4, fc_units=48, max_len=16,
    epochs=50, learning_rate=0.001, batch_size=32, seed=2,
)


def planted_set(prefix, count, seed0):
    docs = [
        planted_policy(replace(CORPUS, seed=seed0 + k), doc_id="%s-%04d" % (prefix, k))
        for k in range(count)
    ]
    oracle = {(d.doc_id, s.seg_id): s.seg_id + 1 for d in docs for s in d.segments}
    return docs, oracle


t0 = time.time()
train_docs, train_oracle = planted_set("e2e-train", 40, 100)
test_docs, test_oracle = planted_set("e2e-test", 10, 900)
train_set = labeled_segments(train_docs, train_oracle)
test_set = labeled_segments(test_docs, test_oracle)
print("train=%d test=%d" % (len(train_set), len(test_set)))
per_class = [0] * 19
for item in train_set:
    per_class[item.label_code] += 1
print("train per-class:", per_class[1:])

sentences = [seg.tokens for d in train_docs for seg in d.segments]
emb = train_skipgram(sentences, EMBEDDING)
print("vocab=%d t_emb=%.1fs" % (emb.vocab_size, time.time() - t0))
before = emb.checksum()

t1 = time.time()
model, history = train(train_set, test_set, emb, CLASSIFIER)
report = evaluate(model, emb, test_set)
print("t_train=%.1fs acc=%.4f macro_f1=%.4f" % (
    time.time() - t1, report.accuracy, report.macro_f1))
print("checksum unchanged:", emb.checksum() == before)
print("total %.1fs" % (time.time() - t0))

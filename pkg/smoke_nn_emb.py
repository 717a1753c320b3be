"""Throwaway smoke checks for the nn and embeddings packages."""
import numpy as np

from gdprscan.nn import (
    AdamState, ConvTextNet, adam_step, compute_metrics, conv1d, conv1d_backward,
    cross_entropy, dense, maxpool_time, philox_rng, softmax,
)
from gdprscan.embeddings import (
    EmbeddingConfig, char_ngrams, example_loss, fnv1a_32, load_embeddings,
    ngram_bucket, save_embeddings, train_skipgram,
)

# --- hand examples -------------------------------------------------
out = conv1d(np.array([[1.0], [2.0], [4.0]], dtype=np.float32),
             np.array([[[1.0], [-1.0]]], dtype=np.float32),
             np.zeros(1, dtype=np.float32))
print("conv hand:", out.ravel())  # pad before=0 after=1 for k=2 -> windows (1,2),(2,4),(4,0)
assert np.allclose(out.ravel(), [-1.0, -2.0, 4.0]), out.ravel()

assert np.allclose(maxpool_time(np.array([[1.0, 5.0], [3.0, 2.0], [0.0, 4.0]], dtype=np.float32)), [3.0, 5.0])

probs = softmax(np.array([0.0, 0.0], dtype=np.float64))
assert np.allclose(probs, [0.5, 0.5])

# Adam single step from zero state, g=1: delta == -lr exactly
p = {"w": np.zeros(3, dtype=np.float32)}
g = {"w": np.ones(3, dtype=np.float32)}
st = AdamState()
adam_step(p, g, st, lr=0.25)
print("adam step:", p["w"])
assert np.allclose(p["w"], -0.25, atol=1e-6), p["w"]

# --- FD on the assembled net (float64 path) ------------------------
def fd_check():
    rng = philox_rng(7)
    B, L, D, F, K, H, C = 2, 5, 4, 3, 4, 6, 5
    net = ConvTextNet.init(D, F, K, H, C, rng, dtype=np.float64)
    x = rng.normal(size=(B, L, D))
    golds = np.array([1, 3])
    net.forward_batch(x, train_mode=False)
    net.loss_batch(golds)
    grads = net.backward_batch(golds)
    eps = 1e-6
    worst = 0.0
    for name, param in net.params.items():
        fd = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = param[idx]
            param[idx] = orig + eps
            net.forward_batch(x, train_mode=False)
            fp = net.loss_batch(golds)
            param[idx] = orig - eps
            net.forward_batch(x, train_mode=False)
            fm = net.loss_batch(golds)
            param[idx] = orig
            fd[idx] = (fp - fm) / (2 * eps)
        denom = max(np.abs(grads[name]).max(), np.abs(fd).max(), 1e-8)
        rel = np.abs(grads[name] - fd).max() / denom
        worst = max(worst, rel)
        print(f"  {name}: rel={rel:.2e}")
    assert worst < 1e-6, worst

fd_check()

# --- metrics sanity ------------------------------------------------
rep = compute_metrics([0, 1, 1, 2], [0, 1, 2, 2], n_classes=3)
print("metrics acc:", rep.accuracy)
assert abs(rep.accuracy - 0.75) < 1e-12
assert rep.support == [1, 1, 2]

# --- ngrams --------------------------------------------------------
tri = char_ngrams("privacy", 3, 3)
print("privacy 3,3:", tri)
assert tri == ["<pr", "pri", "riv", "iva", "vac", "acy", "cy>"]
assert char_ngrams("data", 3, 4) == ["<da", "dat", "ata", "ta>", "<dat", "data", "ata>"]
assert char_ngrams("a", 3, 6) == ["<a>"]
assert fnv1a_32(b"") == 0x811C9DC5
assert fnv1a_32(b"a") == 0xE40C292C
assert 0 <= ngram_bucket("<pr", 10_000) < 10_000

# --- example_loss FD ----------------------------------------------
rng = np.random.default_rng(3)
rows = rng.normal(size=(4, 6))
outs = rng.normal(size=(3, 6))
loss, g_in, g_out = example_loss(rows, outs)
eps = 1e-6
for arr, grad in ((rows, None), (outs, g_out)):
    fd = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = arr[idx]
        arr[idx] = orig + eps
        fp = example_loss(rows, outs)[0]
        arr[idx] = orig - eps
        fm = example_loss(rows, outs)[0]
        arr[idx] = orig
        fd[idx] = (fp - fm) / (2 * eps)
    if grad is None:
        ana = np.tile(g_in, (len(rows), 1))
    else:
        ana = grad
    rel = np.abs(ana - fd).max() / max(np.abs(fd).max(), 1e-8)
    print("example_loss fd rel:", rel)
    assert rel < 1e-6, rel

# --- tiny training run --------------------------------------------
corpus = []
for i in range(60):
    corpus.append(["privacy", "policy", "data", "collection"])
    corpus.append(["cookie", "tracking", "advertising", "partners"])
cfg = EmbeddingConfig(dim=16, n_min=3, n_max=4, epochs=4, learning_rate=0.05,
                      window=2, negatives=3, min_count=1, bucket_count=1000,
                      subsample_t=1e-2, seed=9)
model = train_skipgram(corpus, cfg)
print("history:", [round(h, 4) for h in model.history])
assert model.history[-1] < model.history[0], model.history
vec = model.word_vector("privacy")
assert vec.shape == (16,) and np.isfinite(vec).all()
oov = model.word_vector("privacyy")
assert np.isfinite(oov).all() and np.abs(oov).sum() > 0
nn_list = model.nearest_neighbors("data", k=3)
print("neighbors of data:", nn_list)
assert all(w != "data" for w, _ in nn_list)

import tempfile, pathlib
with tempfile.TemporaryDirectory() as td:
    save_embeddings(model, td)
    again = load_embeddings(td)
    assert again.words == model.words
    assert np.array_equal(again.input_vectors, model.input_vectors)
    assert np.array_equal(again.output_vectors, model.output_vectors)
    assert again.checksum() == model.checksum()
    v1, v2 = model.word_vector("unseen"), again.word_vector("unseen")
    assert np.array_equal(v1, v2)

print("ALL SMOKE CHECKS PASSED")

#!/usr/bin/env python3
"""End-to-end pipeline check on a synthetic keyword corpus.

Generates a corpus with a planted-keyword oracle, trains subword
embeddings and the classifier on oracle labels, and reports held-out
metrics plus a coverage measurement over the evaluation documents.
Everything is seeded, so two runs print identical numbers.
"""

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gdprscan.classifier import ClassifierConfig, evaluate, train
from gdprscan.compliance import aggregate, measure_policy
from gdprscan.embeddings import EmbeddingConfig, train_skipgram
from gdprscan.synth import SynthConfig, labeled_segments, synthetic_corpus

CORPUS = SynthConfig(n_docs=110, min_segments=5, max_segments=8)
EMBEDDING = EmbeddingConfig(dim=32, n_min=3, n_max=4, epochs=40,
                            learning_rate=0.1, window=3, negatives=5,
                            min_count=1, bucket_count=3000, subsample_t=0.003)
CLASSIFIER = ClassifierConfig(n_filters=48, kernel_size=4, fc_units=48,
                              max_len=16, epochs=50, learning_rate=0.001,
                              batch_size=32)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tau", type=float, default=0.5)
    args = parser.parse_args()

    started = time.monotonic()
    train_docs, train_oracle = synthetic_corpus(replace(CORPUS, seed=args.seed))
    eval_docs, eval_oracle = synthetic_corpus(replace(
        CORPUS, n_docs=30, doc_prefix="eval", seed=args.seed + 9))
    sentences = [seg.tokens for doc in train_docs + eval_docs
                 for seg in doc.segments]
    embeddings = train_skipgram(sentences, replace(EMBEDDING, seed=args.seed + 1))
    print("embeddings: vocab=%d checksum=%s"
          % (embeddings.vocab_size, embeddings.checksum()[:12]))

    train_set = labeled_segments(train_docs, train_oracle)
    eval_set = labeled_segments(eval_docs, eval_oracle)
    model, history = train(train_set, None, embeddings,
                           replace(CLASSIFIER, seed=args.seed + 2))
    report = evaluate(model, embeddings, eval_set)
    print("train: %d segments, final loss %.4f"
          % (len(train_set), history.train_loss[-1]))
    print("eval:  %d segments, accuracy %.4f, macro-F1 %.4f"
          % (len(eval_set), report.accuracy, report.macro_f1))

    vectors = [measure_policy(model, embeddings, doc, tau=args.tau)
               for doc in eval_docs if doc.segments]
    summary = aggregate(vectors)
    print("coverage: %d policies, mean requirements covered %.2f, "
          "full compliance %.3f"
          % (summary.n_policies,
             sum(i * n for i, n in enumerate(summary.histogram)) / summary.n_policies,
             summary.full_compliance_fraction))
    print("elapsed: %.1fs" % (time.monotonic() - started))
    return 0


if __name__ == "__main__":
    sys.exit(main())

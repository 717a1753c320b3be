"""Brute-force reference implementations used to cross-check fast paths.

Everything here trades speed for obviousness: plain loops, dicts and
sorted(), no vectorization. Tests compare these answers against the
library's own so a bug would have to appear twice, in two different
shapes, to slip through.
"""

from collections import Counter


def metrics_oracle(predictions, golds, n_classes=18):
    """Per-class precision/recall/F1 by explicit confusion counting.

    Zero denominators yield 0.0, matching the library convention.
    Returns a dict so tests can compare field by field.
    """
    tp = [0] * n_classes
    fp = [0] * n_classes
    fn = [0] * n_classes
    support = [0] * n_classes
    correct = 0
    for pred, gold in zip(predictions, golds):
        support[gold] += 1
        if pred == gold:
            correct += 1
            tp[gold] += 1
        else:
            fp[pred] += 1
            fn[gold] += 1
    precision = []
    recall = []
    f1 = []
    for c in range(n_classes):
        p = tp[c] / (tp[c] + fp[c]) if tp[c] + fp[c] else 0.0
        r = tp[c] / (tp[c] + fn[c]) if tp[c] + fn[c] else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(f)
    n = len(predictions)
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "support": support,
        "accuracy": correct / n if n else 0.0,
        "macro_precision": sum(precision) / n_classes,
        "macro_recall": sum(recall) / n_classes,
        "macro_f1": sum(f1) / n_classes,
    }


def select_queries_oracle(rows, budget, threshold):
    """Query selection recomputed from raw probability rows.

    ``rows`` holds (doc_id, seg_id, probs) triples. Top-two classes are
    found by sorting indices, ties toward the lower index. A row
    qualifies only when its best probability strictly exceeds the
    threshold. Returns the selected (doc_id, seg_id) refs in query
    order: ascending margin, then doc_id, then seg_id.
    """
    qualified = []
    for doc_id, seg_id, probs in rows:
        ranked = sorted(range(len(probs)), key=lambda c: (-probs[c], c))
        best, second = ranked[0], ranked[1]
        if probs[best] > threshold:
            qualified.append((probs[best] - probs[second], doc_id, seg_id))
    qualified.sort()
    return [(doc_id, seg_id) for _, doc_id, seg_id in qualified[:budget]]


def consolidate_oracle(codes):
    """Default four-annotator consolidation from first principles.

    Only the count of the most frequent label matters: 3 or 4 accepts
    (the majority label is then unique), 2 sends to discussion, 1
    rejects. Returns (status value, gold code or None, agreement).
    """
    counts = Counter(codes)
    top = max(counts.values())
    if top >= 3:
        gold = [code for code, k in counts.items() if k == top][0]
        return ("accepted", gold, top / 4)
    if top == 2:
        return ("discuss", None, top / 4)
    return ("rejected", None, top / 4)

"""Pool-based active learning driven by margin sampling.

Each iteration samples fresh policies from the unlabeled pool, scores
their segments with the current model, and queries the segments whose
top-two probability gap is smallest, skipping anything the model is
not even half confident about. Labels come back through the annotation
store (from people via the service, or from a programmatic oracle in
experiments), the model is retrained from scratch on the enlarged gold
set, and the loop stops once held-out performance plateaus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotation import LabelStore, Status
from .classifier import ClassifierConfig, CnnClassifier, predict_batch, top_two, train
from .corpus import Segment
from .errors import EmptyPool, IterationStalled, StateError
from .nn import MetricsReport, compute_metrics


@dataclass(frozen=True)
class QueryCandidate:
    """A scored pool segment, ready for margin ranking."""

    doc_id: str
    seg_id: int
    probs: tuple[float, ...]
    top1: int
    top2: int
    margin: float

    @property
    def ref(self) -> tuple[str, int]:
        return (self.doc_id, self.seg_id)

    @property
    def max_prob(self) -> float:
        return self.probs[self.top1 - 1]


@dataclass(frozen=True)
class ActiveLearningConfig:
    """Knobs of the query loop."""

    pool_docs: int = 100
    query_budget: int = 250
    discard_threshold: float = 0.5
    epsilon: float = 0.002
    patience: int = 2
    max_iters: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pool_docs < 1:
            raise ValueError("pool_docs must be positive")
        if self.query_budget < 1:
            raise ValueError("query_budget must be positive")
        if not 0.0 <= self.discard_threshold < 1.0:
            raise ValueError("discard_threshold must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.patience < 1:
            raise ValueError("patience must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass
class IterationRecord:
    """Everything one iteration did, for the metrics endpoint and audit."""

    iteration: int
    sampled_docs: list[str]
    n_candidates: int
    n_discarded: int
    queries: list[tuple[str, int]]
    labels_received: int
    train_size: int
    macro_f1: float
    metrics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "sampled_docs": list(self.sampled_docs),
            "n_candidates": self.n_candidates,
            "n_discarded": self.n_discarded,
            "queries": [list(ref) for ref in self.queries],
            "labels_received": self.labels_received,
            "train_size": self.train_size,
            "macro_f1": self.macro_f1,
            "metrics": self.metrics,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IterationRecord":
        return cls(
            iteration=int(data["iteration"]),
            sampled_docs=[str(d) for d in data["sampled_docs"]],
            n_candidates=int(data["n_candidates"]),
            n_discarded=int(data["n_discarded"]),
            queries=[(str(d), int(s)) for d, s in data["queries"]],
            labels_received=int(data["labels_received"]),
            train_size=int(data["train_size"]),
            macro_f1=float(data["macro_f1"]),
            metrics=dict(data.get("metrics", {})),
        )


def sample_pool(docs, n_policies: int = 100, seed: int = 0,
                exclude_docs=frozenset(), exclude_refs=frozenset()):
    """Draw policies uniformly without replacement and return their segments.

    Documents in ``exclude_docs`` (already annotated ones) never enter
    the draw; individual segments in ``exclude_refs`` (already queried)
    are dropped from the result. Fewer eligible documents than
    ``n_policies`` means everything eligible is returned.
    """
    eligible = [doc for doc in docs if doc.doc_id not in exclude_docs]
    if not eligible:
        raise EmptyPool("no unlabeled policies left to sample")
    rng = np.random.default_rng(seed)
    k = min(n_policies, len(eligible))
    picked = rng.choice(len(eligible), size=k, replace=False)
    segments = []
    for i in sorted(int(j) for j in picked):
        for seg in eligible[i].segments:
            if seg.ref not in exclude_refs:
                segments.append(seg)
    return segments


def score_candidates(model: CnnClassifier, embeddings, segments) -> list[QueryCandidate]:
    """Run the model over pool segments and wrap the results."""
    if not segments:
        return []
    probs, codes, margins = predict_batch(model, embeddings, segments)
    out = []
    for seg, row, code, margin in zip(segments, probs, codes, margins):
        _, second, _ = top_two(row)
        out.append(QueryCandidate(
            doc_id=seg.doc_id, seg_id=seg.seg_id,
            probs=tuple(float(p) for p in row),
            top1=int(code), top2=second, margin=float(margin),
        ))
    return out


def select_queries(candidates, budget: int = 250,
                   discard_threshold: float = 0.5) -> list[QueryCandidate]:
    """Pick the segments the model finds hardest to tell apart.

    Candidates whose best probability is at or below the discard
    threshold are dropped as likely irrelevant text. The rest are
    ordered by ascending margin, ties broken by (doc_id, seg_id), and
    the first ``budget`` are returned.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative, got %r" % (budget,))
    qualified = [c for c in candidates if c.max_prob > discard_threshold]
    qualified.sort(key=lambda c: (c.margin, c.doc_id, c.seg_id))
    return qualified[:budget]


def should_stop(history, epsilon: float = 0.002, patience: int = 2,
                max_iters: int = 20) -> bool:
    """Decide whether the iteration loop has plateaued.

    True once the last ``patience`` consecutive improvements are each
    below ``epsilon``, or once ``max_iters`` iterations have run.
    Needs at least ``patience`` deltas (patience + 1 points) to call a
    plateau.
    """
    history = list(history)
    if not history:
        raise ValueError("history must be non-empty")
    if len(history) >= max_iters:
        return True
    if len(history) < patience + 1:
        return False
    deltas = [history[i] - history[i - 1] for i in range(len(history) - patience, len(history))]
    return all(delta < epsilon for delta in deltas)


class ActiveLearningDriver:
    """Single-owner state machine for the query loop.

    Progress persists to ``state_path`` after every step, so a process
    restart (or an iteration stalled waiting for annotators) resumes
    where it left off. The query ledger guarantees no segment is ever
    queried twice across iterations.
    """

    def __init__(self, docs, label_store: LabelStore, embeddings,
                 classifier_config: ClassifierConfig, al_config: ActiveLearningConfig,
                 eval_set, state_path=None):
        self.docs = list(docs)
        self.store = label_store
        self.embeddings = embeddings
        self.classifier_config = classifier_config
        self.config = al_config
        self.eval_set = list(eval_set)
        self.state_path = Path(state_path) if state_path else None
        self.records: list[IterationRecord] = []
        self.history: list[float] = []
        self.ledger: set[tuple[str, int]] = set()
        self.pending: list[tuple[str, int]] | None = None
        self._pending_meta: dict | None = None
        self.model: CnnClassifier | None = None
        if self.state_path and self.state_path.is_file():
            self._load_state()

    # -- state persistence -----------------------------------------

    def _save_state(self) -> None:
        if not self.state_path:
            return
        state = {
            "iteration": len(self.records),
            "history": self.history,
            "ledger": sorted([list(ref) for ref in self.ledger]),
            "pending": [list(ref) for ref in self.pending] if self.pending is not None else None,
            "pending_meta": self._pending_meta,
            "records": [rec.to_dict() for rec in self.records],
        }
        tmp = self.state_path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(state, fh, ensure_ascii=True, indent=2, sort_keys=True)
            fh.write("\n")
        tmp.replace(self.state_path)

    def _load_state(self) -> None:
        with open(self.state_path, encoding="utf-8") as fh:
            state = json.load(fh)
        self.history = [float(x) for x in state["history"]]
        self.ledger = {(str(d), int(s)) for d, s in state["ledger"]}
        pending = state.get("pending")
        self.pending = [(str(d), int(s)) for d, s in pending] if pending is not None else None
        self._pending_meta = state.get("pending_meta")
        self.records = [IterationRecord.from_dict(r) for r in state["records"]]

    # -- iteration driver ------------------------------------------

    @property
    def iteration(self) -> int:
        return len(self.records)

    def labeled_doc_ids(self) -> set[str]:
        """Documents with any recorded judgment or queued query."""
        out = {doc_id for doc_id, _ in self.ledger}
        for res in self.store.consolidations():
            out.add(res.doc_id)
        for doc in self.docs:
            for seg in doc.segments:
                if self.store.labels_for(seg.doc_id, seg.seg_id):
                    out.add(seg.doc_id)
                    break
        return out

    def ensure_model(self) -> CnnClassifier:
        """Return the current model, rebuilding it after a resume.

        Checkpoints persist iteration state but not weights; training
        from the gold set is deterministic, so retraining reproduces
        the model the state was saved with.
        """
        if self.model is None:
            if not self.records:
                raise StateError("no model yet: call bootstrap() first")
            gold = self.store.gold_dataset()
            self.model, _ = train(gold, None, self.embeddings, self.classifier_config)
        return self.model

    def bootstrap(self) -> IterationRecord:
        """Train the initial model on the seed gold set, no querying."""
        gold = self.store.gold_dataset()
        self.model, _ = train(gold, None, self.embeddings, self.classifier_config)
        report = self._evaluate()
        record = IterationRecord(
            iteration=len(self.records), sampled_docs=[], n_candidates=0,
            n_discarded=0, queries=[], labels_received=0,
            train_size=len(gold), macro_f1=report.macro_f1,
            metrics=report.to_dict(),
        )
        self.records.append(record)
        self.history.append(report.macro_f1)
        self._save_state()
        return record

    def _evaluate(self) -> MetricsReport:
        golds = np.array([ls.label_code - 1 for ls in self.eval_set], dtype=np.int64)
        _, codes, _ = predict_batch(self.model, self.embeddings,
                                    [ls.segment for ls in self.eval_set])
        return compute_metrics(codes - 1, golds,
                               n_classes=self.classifier_config.n_classes)

    def run_iteration(self, oracle=None) -> IterationRecord:
        """One sample, query, label, retrain, evaluate cycle.

        With ``oracle`` (a callable mapping a Segment to a label code),
        queried segments are labeled immediately by simulated
        annotators in perfect agreement. Without one, queries wait for
        human labels through the annotation store; if any queried
        segment is still unconsolidated this raises IterationStalled,
        and the same call picks the batch up again later.
        """
        self.ensure_model()
        cfg = self.config
        if self.pending is None:
            sampled = sample_pool(
                self.docs, n_policies=cfg.pool_docs,
                seed=cfg.seed + 7919 * (len(self.records) + 1),
                exclude_docs=self.labeled_doc_ids(),
                exclude_refs=self.ledger,
            )
            candidates = score_candidates(self.model, self.embeddings, sampled)
            batch = select_queries(candidates, budget=cfg.query_budget,
                                   discard_threshold=cfg.discard_threshold)
            self.pending = [c.ref for c in batch]
            self._pending_meta = {
                "sampled_docs": sorted({seg.doc_id for seg in sampled}),
                "n_candidates": len(candidates),
                "n_discarded": len(candidates) - sum(
                    1 for c in candidates if c.max_prob > cfg.discard_threshold),
            }
            self.ledger.update(self.pending)
            self._save_state()

        if oracle is not None:
            for doc_id, seg_id in self.pending:
                if self.store.consolidation(doc_id, seg_id) is not None:
                    continue
                segment = self.store.segment(doc_id, seg_id)
                code = int(oracle(segment))
                for k in range(self.store.n_annotators):
                    self.store.record_label(doc_id, seg_id, "oracle-%d" % (k,), code)

        unresolved = [ref for ref in self.pending
                      if self.store.consolidation(*ref) is None]
        if unresolved:
            self._save_state()
            raise IterationStalled(
                "%d of %d queried segments still await labels"
                % (len(unresolved), len(self.pending))
            )

        received = sum(
            1 for ref in self.pending
            if self.store.consolidation(*ref).status is Status.ACCEPTED
        )
        gold = self.store.gold_dataset()
        self.model, _ = train(gold, None, self.embeddings, self.classifier_config)
        report = self._evaluate()
        meta = self._pending_meta or {}
        record = IterationRecord(
            iteration=len(self.records),
            sampled_docs=list(meta.get("sampled_docs", [])),
            n_candidates=int(meta.get("n_candidates", 0)),
            n_discarded=int(meta.get("n_discarded", 0)),
            queries=list(self.pending),
            labels_received=received,
            train_size=len(gold),
            macro_f1=report.macro_f1,
            metrics=report.to_dict(),
        )
        self.pending = None
        self._pending_meta = None
        self.records.append(record)
        self.history.append(report.macro_f1)
        self._save_state()
        return record

    def should_stop(self) -> bool:
        """Plateau check over the post-bootstrap iteration history."""
        if len(self.history) <= 1:
            return False
        return should_stop(self.history[1:], epsilon=self.config.epsilon,
                           patience=self.config.patience,
                           max_iters=self.config.max_iters)

    def run(self, oracle, max_iterations: int | None = None) -> list[IterationRecord]:
        """Bootstrap if needed, then iterate until the stopping rule fires."""
        if self.model is None and not self.records:
            self.bootstrap()
        while not self.should_stop():
            if max_iterations is not None and self.iteration >= max_iterations:
                break
            self.run_iteration(oracle=oracle)
        return self.records

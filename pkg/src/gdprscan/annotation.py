"""Label storage and consolidation of multi-annotator judgments.

Every segment is labeled independently by a fixed number of annotators
(four by default). Agreement is the share of annotators behind the most
frequent label: at or above 0.75 the label is accepted as gold, at or
above 0.5 the segment goes to group discussion, below that it is
rejected. Discussions are resolved manually and the resolution is
pinned so later relabeling cannot silently overwrite it.
"""

from __future__ import annotations

import enum
import json
import threading
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .classifier import LabeledSegment
from .corpus import Segment
from .errors import ArityError, InvalidLabel, NotFound, ParseError, StateError
from .labels import label_from_code


class Status(enum.Enum):
    ACCEPTED = "accepted"
    DISCUSS = "discuss"
    REJECTED = "rejected"


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's judgment on one segment."""

    doc_id: str
    seg_id: int
    annotator_id: str
    label_code: int
    submitted_at: datetime

    @property
    def ref(self) -> tuple[str, int]:
        return (self.doc_id, self.seg_id)


@dataclass(frozen=True)
class ConsolidationResult:
    """Outcome of merging all judgments on one segment.

    ``gold_label_code`` is present exactly when the status is
    ACCEPTED. ``resolved_by``/``resolved_at`` are set only for
    manually resolved discussions.
    """

    doc_id: str
    seg_id: int
    status: Status
    gold_label_code: int | None
    agreement: float
    resolved_by: str | None = None
    resolved_at: datetime | None = None

    def __post_init__(self) -> None:
        if (self.status is Status.ACCEPTED) != (self.gold_label_code is not None):
            raise ValueError("gold label present iff status is accepted")

    @property
    def ref(self) -> tuple[str, int]:
        return (self.doc_id, self.seg_id)


def consolidate(labels, n_annotators: int = 4, *, accept_threshold: float = 0.75,
                discuss_threshold: float = 0.5, doc_id: str = "", seg_id: int = 0,
                ) -> ConsolidationResult:
    """Merge one segment's labels into a consolidation decision.

    Thresholds are fractions of ``n_annotators`` so annotator counts
    other than four keep working. ``accept_threshold`` must exceed 0.5,
    which makes the accepted majority label unique; an even split (two
    against two under the defaults) lands in discussion with no gold
    label.

    Raises ArityError when the list length differs from
    ``n_annotators`` and InvalidLabel for out-of-range codes.
    """
    if n_annotators < 1:
        raise ValueError("n_annotators must be positive, got %r" % (n_annotators,))
    if not 0.5 < accept_threshold <= 1.0:
        raise ValueError(
            "accept_threshold must lie in (0.5, 1], got %r" % (accept_threshold,)
        )
    if not 0.0 < discuss_threshold <= accept_threshold:
        raise ValueError(
            "discuss_threshold must lie in (0, accept_threshold], got %r"
            % (discuss_threshold,)
        )
    labels = list(labels)
    if len(labels) != n_annotators:
        raise ArityError(
            "expected %d labels, got %d" % (n_annotators, len(labels))
        )
    codes = []
    for label in labels:
        code = label.code if hasattr(label, "code") else label
        codes.append(label_from_code(code).code)
    top_code, top_count = Counter(codes).most_common(1)[0]
    agreement = top_count / n_annotators
    if agreement >= accept_threshold:
        status, gold = Status.ACCEPTED, top_code
    elif agreement >= discuss_threshold:
        status, gold = Status.DISCUSS, None
    else:
        status, gold = Status.REJECTED, None
    return ConsolidationResult(
        doc_id=doc_id, seg_id=seg_id, status=status,
        gold_label_code=gold, agreement=agreement,
    )


class LabelStore:
    """Registry of segments, their labels, and consolidation state.

    Writes are serialized by a single lock; reads of consolidated state
    take the same lock briefly to see a consistent snapshot. When the
    last required annotator submits, consolidation runs automatically;
    manual discussion resolutions are pinned and survive later
    submissions.
    """

    def __init__(self, n_annotators: int = 4, accept_threshold: float = 0.75,
                 discuss_threshold: float = 0.5):
        if n_annotators < 1:
            raise ValueError("n_annotators must be positive, got %r" % (n_annotators,))
        self.n_annotators = n_annotators
        self.accept_threshold = accept_threshold
        self.discuss_threshold = discuss_threshold
        self._segments: dict[tuple[str, int], Segment] = {}
        self._live: dict[tuple[str, int], dict[str, AnnotationRecord]] = {}
        self._audit: dict[tuple[str, int], list[AnnotationRecord]] = {}
        self._consolidations: dict[tuple[str, int], ConsolidationResult] = {}
        self._pinned: set[tuple[str, int]] = set()
        self._lock = threading.RLock()

    # -- registry ---------------------------------------------------

    def add_segments(self, segments) -> None:
        with self._lock:
            for seg in segments:
                self._segments[seg.ref] = seg

    def add_documents(self, docs) -> None:
        for doc in docs:
            self.add_segments(doc.segments)

    def segment(self, doc_id: str, seg_id: int) -> Segment:
        try:
            return self._segments[(doc_id, seg_id)]
        except KeyError:
            raise NotFound("unknown segment %s/%s" % (doc_id, seg_id))

    def __len__(self) -> int:
        return len(self._segments)

    # -- labeling ---------------------------------------------------

    def record_label(self, doc_id: str, seg_id: int, annotator_id: str,
                     label_code: int, submitted_at: datetime | None = None,
                     ) -> AnnotationRecord:
        """Store one judgment, superseding the annotator's earlier one.

        Every submission lands in the audit log; only the latest per
        annotator counts toward consolidation. Returns the new record.
        """
        label = label_from_code(label_code)
        if not annotator_id:
            raise InvalidLabel("annotator_id must be non-empty")
        if submitted_at is None:
            submitted_at = datetime.now(timezone.utc)
        with self._lock:
            if (doc_id, seg_id) not in self._segments:
                raise NotFound("unknown segment %s/%s" % (doc_id, seg_id))
            record = AnnotationRecord(
                doc_id=doc_id, seg_id=seg_id, annotator_id=annotator_id,
                label_code=label.code, submitted_at=submitted_at,
            )
            ref = (doc_id, seg_id)
            self._audit.setdefault(ref, []).append(record)
            self._live.setdefault(ref, {})[annotator_id] = record
            self._maybe_consolidate(ref)
            return record

    def labels_for(self, doc_id: str, seg_id: int) -> dict[str, AnnotationRecord]:
        with self._lock:
            return dict(self._live.get((doc_id, seg_id), {}))

    def audit_log(self, doc_id: str, seg_id: int) -> list[AnnotationRecord]:
        with self._lock:
            return list(self._audit.get((doc_id, seg_id), []))

    def _maybe_consolidate(self, ref) -> None:
        if ref in self._pinned:
            return
        live = self._live.get(ref, {})
        if len(live) < self.n_annotators:
            return
        codes = [rec.label_code for _, rec in sorted(live.items())]
        self._consolidations[ref] = consolidate(
            codes, n_annotators=len(codes),
            accept_threshold=self.accept_threshold,
            discuss_threshold=self.discuss_threshold,
            doc_id=ref[0], seg_id=ref[1],
        )

    # -- consolidation state ---------------------------------------

    def consolidation(self, doc_id: str, seg_id: int) -> ConsolidationResult | None:
        with self._lock:
            return self._consolidations.get((doc_id, seg_id))

    def consolidations(self) -> list[ConsolidationResult]:
        with self._lock:
            return [self._consolidations[ref] for ref in sorted(self._consolidations)]

    def resolve_discussion(self, doc_id: str, seg_id: int, outcome: str,
                           label_code: int | None = None, resolved_by: str = "",
                           resolved_at: datetime | None = None,
                           ) -> ConsolidationResult:
        """Settle a discussion segment by group decision.

        ``outcome`` is "accept" (with the agreed ``label_code``) or
        "reject". Only segments currently in DISCUSS can be resolved;
        anything else raises StateError. The resolution is pinned.
        """
        if outcome not in ("accept", "reject"):
            raise ValueError("outcome must be 'accept' or 'reject', got %r" % (outcome,))
        if outcome == "accept":
            if label_code is None:
                raise InvalidLabel("accepting a discussion requires a label code")
            label_code = label_from_code(label_code).code
        elif label_code is not None:
            raise InvalidLabel("rejecting a discussion takes no label code")
        if resolved_at is None:
            resolved_at = datetime.now(timezone.utc)
        with self._lock:
            ref = (doc_id, seg_id)
            current = self._consolidations.get(ref)
            if current is None or current.status is not Status.DISCUSS:
                raise StateError(
                    "segment %s/%s is not under discussion" % (doc_id, seg_id)
                )
            result = ConsolidationResult(
                doc_id=doc_id, seg_id=seg_id,
                status=Status.ACCEPTED if outcome == "accept" else Status.REJECTED,
                gold_label_code=label_code if outcome == "accept" else None,
                agreement=current.agreement,
                resolved_by=resolved_by, resolved_at=resolved_at,
            )
            self._consolidations[ref] = result
            self._pinned.add(ref)
            return result

    def gold_dataset(self) -> list[LabeledSegment]:
        """Accepted segments with a requirement label, for training.

        Segments whose gold label is the catch-all class are excluded,
        as are discussion and rejected segments. Sorted by segment ref
        for reproducibility.
        """
        with self._lock:
            out = []
            for ref in sorted(self._consolidations):
                res = self._consolidations[ref]
                if res.status is Status.ACCEPTED and res.gold_label_code != 0:
                    out.append(
                        LabeledSegment(
                            segment=self._segments[ref],
                            label_code=res.gold_label_code,
                        )
                    )
            return out

    # -- persistence ------------------------------------------------

    def save(self, labels_path, consolidations_path) -> None:
        """Write the audit log and consolidation state as JSON lines."""
        with self._lock:
            with open(labels_path, "w", encoding="utf-8") as fh:
                for ref in sorted(self._audit):
                    for rec in self._audit[ref]:
                        fh.write(json.dumps({
                            "doc_id": rec.doc_id,
                            "seg_id": rec.seg_id,
                            "annotator_id": rec.annotator_id,
                            "label_code": rec.label_code,
                            "submitted_at": rec.submitted_at.isoformat(),
                        }, ensure_ascii=True, separators=(",", ":")) + "\n")
            with open(consolidations_path, "w", encoding="utf-8") as fh:
                for res in self.consolidations():
                    row = {
                        "doc_id": res.doc_id,
                        "seg_id": res.seg_id,
                        "status": res.status.value,
                        "gold_label_code": res.gold_label_code,
                        "agreement": res.agreement,
                    }
                    if res.resolved_by is not None:
                        row["resolved_by"] = res.resolved_by
                    if res.resolved_at is not None:
                        row["resolved_at"] = res.resolved_at.isoformat()
                    fh.write(json.dumps(row, ensure_ascii=True,
                                        separators=(",", ":")) + "\n")

    @classmethod
    def load(cls, segments, labels_path, consolidations_path=None,
             n_annotators: int = 4, accept_threshold: float = 0.75,
             discuss_threshold: float = 0.5) -> "LabelStore":
        """Rebuild a store from saved files.

        Labels are replayed in file order, re-running automatic
        consolidation. Stored consolidation rows then override the
        replayed state; a row that disagrees with the recomputation is
        treated as a manual resolution and pinned.
        """
        store = cls(n_annotators=n_annotators, accept_threshold=accept_threshold,
                    discuss_threshold=discuss_threshold)
        store.add_segments(segments)
        for lineno, row in _read_jsonl(labels_path):
            try:
                store.record_label(
                    doc_id=row["doc_id"], seg_id=int(row["seg_id"]),
                    annotator_id=row["annotator_id"],
                    label_code=int(row["label_code"]),
                    submitted_at=datetime.fromisoformat(row["submitted_at"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError("bad label row: %s" % (exc,), line=lineno)
        if consolidations_path is not None and Path(consolidations_path).is_file():
            for lineno, row in _read_jsonl(consolidations_path):
                try:
                    result = ConsolidationResult(
                        doc_id=row["doc_id"], seg_id=int(row["seg_id"]),
                        status=Status(row["status"]),
                        gold_label_code=row.get("gold_label_code"),
                        agreement=float(row["agreement"]),
                        resolved_by=row.get("resolved_by"),
                        resolved_at=(
                            datetime.fromisoformat(row["resolved_at"])
                            if row.get("resolved_at") else None
                        ),
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise ParseError("bad consolidation row: %s" % (exc,), line=lineno)
                with store._lock:
                    ref = result.ref
                    if ref not in store._segments:
                        raise ParseError(
                            "consolidation for unknown segment %s/%s"
                            % (result.doc_id, result.seg_id), line=lineno)
                    replayed = store._consolidations.get(ref)
                    store._consolidations[ref] = result
                    if replayed != result:
                        store._pinned.add(ref)
        return store


def _read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError("invalid JSON: %s" % (exc,), line=lineno)
            if not isinstance(row, dict):
                raise ParseError("expected a JSON object", line=lineno)
            yield lineno, row

"""Corpus-wide disclosure coverage measurement and reporting.

A policy covers a requirement when at least one of its segments is
classified as that requirement with probability above the evidence
threshold. Coverage vectors aggregate into per-requirement site counts
and a histogram of policies by how many of the 18 requirements they
disclose.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .classifier import predict_batch
from .errors import EmptyDataset, EmptyPolicy, IoError
from .labels import N_REQUIREMENTS, REQUIREMENT_LABELS


@dataclass
class ComplianceVector:
    """Which requirements one policy discloses, with the evidence."""

    doc_id: str
    covered: list[bool]
    evidence: list[list[tuple[int, float]]]

    def __post_init__(self) -> None:
        if len(self.covered) != N_REQUIREMENTS or len(self.evidence) != N_REQUIREMENTS:
            raise ValueError("coverage and evidence must have one slot per requirement")
        for flag, ev in zip(self.covered, self.evidence):
            if flag != bool(ev):
                raise ValueError("covered flag must mirror non-empty evidence")

    @property
    def n_covered(self) -> int:
        return sum(self.covered)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "covered": [bool(flag) for flag in self.covered],
            "evidence": [[[seg_id, p] for seg_id, p in ev] for ev in self.evidence],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComplianceVector":
        return cls(
            doc_id=str(data["doc_id"]),
            covered=[bool(flag) for flag in data["covered"]],
            evidence=[[(int(seg_id), float(p)) for seg_id, p in ev]
                      for ev in data["evidence"]],
        )


@dataclass
class ComplianceSummary:
    """Aggregate coverage over a corpus."""

    n_policies: int
    requirement_counts: list[int]
    requirement_fractions: list[float]
    histogram: list[int] = field(default_factory=list)

    @property
    def full_compliance_fraction(self) -> float:
        return self.histogram[N_REQUIREMENTS] / self.n_policies

    def to_dict(self) -> dict:
        return {
            "n_policies": self.n_policies,
            "requirement_counts": list(self.requirement_counts),
            "requirement_fractions": list(self.requirement_fractions),
            "histogram": list(self.histogram),
            "full_compliance_fraction": self.full_compliance_fraction,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComplianceSummary":
        return cls(
            n_policies=int(data["n_policies"]),
            requirement_counts=[int(n) for n in data["requirement_counts"]],
            requirement_fractions=[float(x) for x in data["requirement_fractions"]],
            histogram=[int(n) for n in data["histogram"]],
        )


def measure_policy(model, embeddings, policy, tau: float = 0.5) -> ComplianceVector:
    """Coverage vector for one policy.

    Requirement c counts as covered when some segment's top class is c
    with probability strictly above ``tau``. Evidence lists every such
    segment, most probable first (ties by segment id).
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1], got %r" % (tau,))
    if not policy.segments:
        raise EmptyPolicy("policy %s has no segments" % (policy.doc_id,))
    probs, codes, _ = predict_batch(model, embeddings, policy.segments)
    evidence: list[list[tuple[int, float]]] = [[] for _ in range(N_REQUIREMENTS)]
    for seg, code, row in zip(policy.segments, codes, probs):
        p = float(row[code - 1])
        if p > tau:
            evidence[code - 1].append((seg.seg_id, p))
    for ev in evidence:
        ev.sort(key=lambda pair: (-pair[1], pair[0]))
    covered = [bool(ev) for ev in evidence]
    return ComplianceVector(doc_id=policy.doc_id, covered=covered, evidence=evidence)


def aggregate(vectors) -> ComplianceSummary:
    """Reduce per-policy vectors into corpus-level counts."""
    vectors = list(vectors)
    if not vectors:
        raise EmptyDataset("no compliance vectors to aggregate")
    counts = [0] * N_REQUIREMENTS
    histogram = [0] * (N_REQUIREMENTS + 1)
    for vec in vectors:
        histogram[vec.n_covered] += 1
        for c in range(N_REQUIREMENTS):
            if vec.covered[c]:
                counts[c] += 1
    n = len(vectors)
    return ComplianceSummary(
        n_policies=n,
        requirement_counts=counts,
        requirement_fractions=[count / n for count in counts],
        histogram=histogram,
    )


def export_report(summary: ComplianceSummary, vectors, out_dir,
                  formats=("csv", "json")) -> list[Path]:
    """Write the coverage report files into ``out_dir``.

    csv: ``report_policies.csv`` (one row per policy: doc_id, one flag
    column per requirement in class-code order, covered count) and
    ``report_summary.csv`` (requirement name, count, fraction).
    json: ``report.json`` with the summary, including the 0..18
    histogram. Returns the written paths.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError("cannot create report directory %s: %s" % (out_dir, exc))
    written = []
    try:
        if "csv" in formats:
            policies_path = out_dir / "report_policies.csv"
            with open(policies_path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(
                    ["doc_id"]
                    + [label.name for label in REQUIREMENT_LABELS]
                    + ["covered_count"]
                )
                for vec in vectors:
                    writer.writerow(
                        [vec.doc_id]
                        + [int(flag) for flag in vec.covered]
                        + [vec.n_covered]
                    )
            written.append(policies_path)
            summary_path = out_dir / "report_summary.csv"
            with open(summary_path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["requirement", "count", "fraction"])
                for label, count, fraction in zip(
                    REQUIREMENT_LABELS, summary.requirement_counts,
                    summary.requirement_fractions,
                ):
                    writer.writerow([label.name, count, "%.6f" % fraction])
            written.append(summary_path)
        if "json" in formats:
            json_path = out_dir / "report.json"
            with open(json_path, "w", encoding="utf-8") as fh:
                json.dump(summary.to_dict(), fh, ensure_ascii=True, indent=2,
                          sort_keys=True)
                fh.write("\n")
            written.append(json_path)
    except OSError as exc:
        raise IoError("cannot write report: %s" % (exc,))
    return written

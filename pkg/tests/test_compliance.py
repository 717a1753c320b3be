"""Tests for per-policy coverage measurement and corpus aggregation."""

import csv
import json
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdprscan.compliance import (
    ComplianceSummary,
    ComplianceVector,
    aggregate,
    export_report,
    measure_policy,
)
from gdprscan.corpus import PolicyDocument, Segment
from gdprscan.errors import EmptyDataset, EmptyPolicy
from gdprscan.labels import REQUIREMENT_LABELS
from gdprscan.synth import planted_policy

from conftest import TINY_CORPUS


class _ScriptedModel:
    """Stand-in classifier that replays a fixed probability row per segment."""

    def __init__(self, rows, max_len=12, n_classes=18):
        self.rows = np.asarray(rows, dtype=np.float64)
        self.config = SimpleNamespace(max_len=max_len, n_classes=n_classes)
        self._cursor = 0
        self.net = SimpleNamespace(forward_batch=self._forward_batch)

    def check_embeddings(self, embeddings):
        pass

    def _forward_batch(self, encoded, train_mode=False, rng=None):
        batch = self.rows[self._cursor:self._cursor + len(encoded)]
        self._cursor += len(encoded)
        return batch


def _policy(n_segments, doc_id="pol-x"):
    return PolicyDocument(
        doc_id=doc_id, url="https://example.test/x", fetched_at=None,
        segments=[Segment(doc_id=doc_id, seg_id=i, text="words here",
                          tokens=["words", "here"]) for i in range(n_segments)],
    )


def _row(code, p):
    rest = (1.0 - p) / 17.0
    row = [rest] * 18
    row[code - 1] = p
    return row


def _vector(doc_id, covered):
    evidence = [[(0, 0.9)] if flag else [] for flag in covered]
    return ComplianceVector(doc_id=doc_id, covered=list(covered), evidence=evidence)


class TestMeasurePolicy:
    def test_flags_exactly_the_requirements_above_threshold(self, tiny_world):
        model = _ScriptedModel([
            _row(1, 0.8), _row(2, 0.7), _row(14, 0.9), _row(5, 0.3),
        ])
        vec = measure_policy(model, tiny_world.embeddings, _policy(4), tau=0.5)
        assert [c + 1 for c, flag in enumerate(vec.covered) if flag] == [1, 2, 14]
        assert vec.evidence[0] == [(0, pytest.approx(0.8))]
        assert vec.evidence[13] == [(2, pytest.approx(0.9))]
        assert vec.n_covered == 3

    def test_nothing_above_threshold_means_all_false(self, tiny_world):
        model = _ScriptedModel([_row(3, 0.4), _row(9, 0.45)])
        vec = measure_policy(model, tiny_world.embeddings, _policy(2), tau=0.5)
        assert vec.covered == [False] * 18

    def test_probability_equal_to_tau_does_not_count(self, tiny_world):
        model = _ScriptedModel([_row(3, 0.5)])
        vec = measure_policy(model, tiny_world.embeddings, _policy(1), tau=0.5)
        assert not vec.covered[2]

    def test_tau_one_flags_nothing(self, tiny_world):
        model = _ScriptedModel([_row(c, 0.99) for c in range(1, 19)])
        vec = measure_policy(model, tiny_world.embeddings, _policy(18), tau=1.0)
        assert vec.covered == [False] * 18

    def test_evidence_sorted_by_probability_then_segment(self, tiny_world):
        model = _ScriptedModel([_row(3, 0.7), _row(3, 0.9), _row(3, 0.7)])
        vec = measure_policy(model, tiny_world.embeddings, _policy(3), tau=0.5)
        assert vec.evidence[2] == [
            (1, pytest.approx(0.9)), (0, pytest.approx(0.7)), (2, pytest.approx(0.7))]

    def test_planted_policy_covers_every_requirement(self, tiny_world):
        """A model that memorized the keyword corpus must flag all 18
        requirements on the one-segment-per-class fixture document."""
        fixture = planted_policy(TINY_CORPUS)
        vec = measure_policy(tiny_world.model, tiny_world.embeddings, fixture)
        assert vec.covered == [True] * 18

    def test_empty_policy_rejected(self, tiny_world):
        with pytest.raises(EmptyPolicy):
            measure_policy(tiny_world.model, tiny_world.embeddings, _policy(0))

    def test_tau_out_of_range_rejected(self, tiny_world):
        with pytest.raises(ValueError):
            measure_policy(tiny_world.model, tiny_world.embeddings, _policy(1),
                           tau=1.5)


class TestComplianceVector:
    def test_flag_must_mirror_evidence(self):
        with pytest.raises(ValueError):
            ComplianceVector(doc_id="d", covered=[True] + [False] * 17,
                             evidence=[[] for _ in range(18)])

    def test_dict_round_trip(self):
        vec = _vector("d", [i % 3 == 0 for i in range(18)])
        assert ComplianceVector.from_dict(vec.to_dict()) == vec


class TestAggregate:
    def test_three_fully_compliant_policies_out_of_100(self):
        vectors = [_vector("full-%d" % i, [True] * 18) for i in range(3)]
        vectors += [_vector("part-%d" % i, [True] + [False] * 17)
                    for i in range(97)]
        summary = aggregate(vectors)
        assert summary.n_policies == 100
        assert summary.histogram[18] == 3
        assert summary.full_compliance_fraction == pytest.approx(0.03)

    def test_all_false_vector_lands_in_histogram_zero(self):
        summary = aggregate([_vector("d", [False] * 18)])
        assert summary.histogram[0] == 1
        assert summary.requirement_counts == [0] * 18

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyDataset):
            aggregate([])

    @given(st.lists(st.lists(st.booleans(), min_size=18, max_size=18),
                    min_size=1, max_size=30))
    @settings(max_examples=60, deadline=None)
    def test_fractions_match_column_sums(self, flags):
        vectors = [_vector("d-%d" % i, row) for i, row in enumerate(flags)]
        summary = aggregate(vectors)
        n = len(flags)
        for c in range(18):
            column = sum(1 for row in flags if row[c])
            assert summary.requirement_counts[c] == column
            assert summary.requirement_fractions[c] == pytest.approx(column / n)
        assert sum(summary.histogram) == n
        assert len(summary.histogram) == 19
        assert summary.histogram[18] == sum(1 for row in flags if all(row))

    @given(st.lists(st.lists(st.booleans(), min_size=18, max_size=18),
                    min_size=1, max_size=15),
           st.randoms())
    @settings(max_examples=40, deadline=None)
    def test_order_of_policies_is_irrelevant(self, flags, rnd):
        vectors = [_vector("d-%d" % i, row) for i, row in enumerate(flags)]
        shuffled = list(vectors)
        rnd.shuffle(shuffled)
        a = aggregate(vectors)
        b = aggregate(shuffled)
        assert a.requirement_counts == b.requirement_counts
        assert a.histogram == b.histogram

    def test_summary_dict_round_trip(self):
        summary = aggregate([_vector("d", [True] * 18)])
        restored = ComplianceSummary.from_dict(summary.to_dict())
        assert restored == summary


class TestExportReport:
    def _sample(self):
        vectors = [
            _vector("pol-a", [True] * 18),
            _vector("pol-b", [c < 4 for c in range(18)]),
        ]
        return aggregate(vectors), vectors

    def test_policy_csv_has_header_and_one_row_per_policy(self, tmp_path):
        summary, vectors = self._sample()
        export_report(summary, vectors, tmp_path)
        with open(tmp_path / "report_policies.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 3
        assert rows[0][0] == "doc_id"
        assert rows[0][-1] == "covered_count"
        assert rows[0][1:-1] == [label.name for label in REQUIREMENT_LABELS]
        assert rows[1][0] == "pol-a"
        assert rows[1][-1] == "18"
        assert rows[2][-1] == "4"

    def test_summary_csv_rows_follow_class_code_order(self, tmp_path):
        summary, vectors = self._sample()
        export_report(summary, vectors, tmp_path)
        with open(tmp_path / "report_summary.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["requirement", "count", "fraction"]
        assert [row[0] for row in rows[1:]] == [
            label.name for label in REQUIREMENT_LABELS]
        assert rows[1] == ["Data Categories", "2", "1.000000"]

    def test_json_report_carries_19_bin_histogram(self, tmp_path):
        summary, vectors = self._sample()
        paths = export_report(summary, vectors, tmp_path)
        assert [p.name for p in paths] == [
            "report_policies.csv", "report_summary.csv", "report.json"]
        data = json.loads((tmp_path / "report.json").read_text())
        assert len(data["histogram"]) == 19
        assert data["n_policies"] == 2
        assert data["full_compliance_fraction"] == pytest.approx(0.5)

    def test_json_only_export(self, tmp_path):
        summary, vectors = self._sample()
        paths = export_report(summary, vectors, tmp_path, formats=("json",))
        assert [p.name for p in paths] == ["report.json"]
        assert not (tmp_path / "report_policies.csv").exists()

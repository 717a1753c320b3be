"""The requirement label space and its lookups."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gdprscan.errors import InvalidLabel
from gdprscan.labels import (
    ALL_LABELS,
    N_REQUIREMENTS,
    OTHER,
    REQUIREMENT_LABELS,
    label_from_code,
    label_from_name,
)


def test_eighteen_requirements():
    assert N_REQUIREMENTS == 18
    assert len(REQUIREMENT_LABELS) == 18
    assert len(ALL_LABELS) == 19


def test_row_one_is_data_categories():
    label = label_from_code(1)
    assert label.name == "Data Categories"
    assert label.gdpr_article_ref == "14(1.d)"


def test_row_seven_is_profiling():
    label = label_from_code(7)
    assert label.name == "Profiling"
    assert label.gdpr_article_ref == "14(2.g)"


def test_other_is_code_zero():
    assert OTHER.code == 0
    assert OTHER.is_other()
    assert not label_from_code(1).is_other()


def test_out_of_range_codes_rejected():
    with pytest.raises(InvalidLabel):
        label_from_code(19)
    with pytest.raises(InvalidLabel):
        label_from_code(-1)


def test_non_integer_code_rejected():
    with pytest.raises(InvalidLabel):
        label_from_code("7")
    with pytest.raises(InvalidLabel):
        label_from_code(True)


@given(st.integers(0, 18))
def test_code_round_trip(code):
    assert label_from_code(code).code == code


def test_codes_are_bijective():
    codes = [label.code for label in ALL_LABELS]
    assert codes == list(range(19))
    names = {label.name for label in ALL_LABELS}
    assert len(names) == 19


def test_lookup_by_name():
    assert label_from_name("Profiling").code == 7
    with pytest.raises(InvalidLabel):
        label_from_name("No Such Requirement")

"""The label space: 18 GDPR privacy-disclosure requirement categories plus Other.

Codes 1..18 are the disclosure requirements a privacy policy must state
(GDPR Art. 12-23). Code 0 (Other) marks segments relevant to no
requirement; it exists so annotation can record it, but the classifier
and compliance measurements operate on 1..18 only.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidLabel

N_REQUIREMENTS = 18


@dataclass(frozen=True)
class RequirementLabel:
    code: int
    name: str
    gdpr_article_ref: str

    def is_other(self) -> bool:
        return self.code == 0


_LABEL_ROWS = (
    (0, "Other", ""),
    (1, "Data Categories", "14(1.d)"),
    (2, "Processing Purpose", "13(3)"),
    (3, "Data Recipients", "13(1.e)"),
    (4, "Source of Data", "14(2.f)"),
    (5, "Provision Requirement", "14(5.b)"),
    (6, "Data Safeguards", "14(1.f)"),
    (7, "Profiling", "14(2.g)"),
    (8, "Storage Period", "13(2.a)"),
    (9, "Adequacy Decision", "13(1.f)"),
    (10, "Controller's Contact", "13(1.a)"),
    (11, "DPO Contact", "13(1.b)"),
    (12, "Withdraw Consent", "13(2.c)"),
    (13, "Lodge Complaint", "13(2.d)"),
    (14, "Right to Access", "14(2.c)"),
    (15, "Right to Erase", "14(2.c)"),
    (16, "Right to Restrict", "14(2.c)"),
    (17, "Right to Object", "14(2.c)"),
    (18, "Right to Portability", "14(2.c)"),
)

ALL_LABELS: tuple[RequirementLabel, ...] = tuple(RequirementLabel(*row) for row in _LABEL_ROWS)
OTHER: RequirementLabel = ALL_LABELS[0]
# The 18 requirement categories, in canonical report order (codes 1..18).
REQUIREMENT_LABELS: tuple[RequirementLabel, ...] = ALL_LABELS[1:]

_BY_NAME = {label.name: label for label in ALL_LABELS}


def label_from_code(code: int) -> RequirementLabel:
    """Return the unique label for ``code`` in 0..18."""
    if not isinstance(code, int) or isinstance(code, bool) or not 0 <= code <= N_REQUIREMENTS:
        raise InvalidLabel(f"label code must be in 0..{N_REQUIREMENTS}, got {code!r}")
    return ALL_LABELS[code]


def label_from_name(name: str) -> RequirementLabel:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise InvalidLabel(f"unknown label name {name!r}") from None


def requirement_from_code(code: int) -> RequirementLabel:
    """Like label_from_code but rejects Other (code 0)."""
    label = label_from_code(code)
    if label.is_other():
        raise InvalidLabel("Other (code 0) is not a requirement category")
    return label

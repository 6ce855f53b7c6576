"""Exact arithmetic for Minkowski's question-mark function and the
certificate checks around the set where its derivative is infinite."""

__version__ = "0.1.0"

from qmark.cf import continuant, expand, split_product, to_fraction
from qmark.constants import constants
from qmark.errors import DomainError, Infeasible, InvalidInput, LemmaViolation, QmarkError, ResourceLimit
from qmark.intervals import CertifiedInterval
from qmark.minkowski import DyadicRational, question_mark, question_mark_of, stern_brocot_level

__all__ = [
    "CertifiedInterval",
    "DomainError",
    "DyadicRational",
    "Infeasible",
    "InvalidInput",
    "LemmaViolation",
    "QmarkError",
    "ResourceLimit",
    "constants",
    "continuant",
    "expand",
    "question_mark",
    "question_mark_of",
    "split_product",
    "stern_brocot_level",
    "to_fraction",
]

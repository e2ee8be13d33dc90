"""Statistical validation battery."""
from .agreement import AgreementResult, bland_altman, limits_of_agreement
from .correlation import CorrelationResult, average_ranks, spearman
from .icc import IccResult, icc_two_way_mixed
from .normality import shapiro_wilk
from .scales import Reliability, Strength, classify_correlation, classify_icc

__all__ = [
    "AgreementResult",
    "CorrelationResult",
    "IccResult",
    "Reliability",
    "Strength",
    "average_ranks",
    "bland_altman",
    "classify_correlation",
    "classify_icc",
    "icc_two_way_mixed",
    "limits_of_agreement",
    "shapiro_wilk",
    "spearman",
]

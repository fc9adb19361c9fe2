"""Rolling two-pass factor model estimation and generalized GRS testing."""

from ._aptroll import (
    AdfResult,
    ConvergenceError,
    DataError,
    FirstPassFit,
    GrsResult,
    Panel,
    RiskPremiumEstimate,
    SingularMatrixError,
    adf_test,
    f_quantile,
    f_upper_tail,
    first_pass,
    grs_statistic,
    mc_experiment,
    roll,
    second_pass,
    simulate,
)

__all__ = [
    "AdfResult",
    "ConvergenceError",
    "DataError",
    "FirstPassFit",
    "GrsResult",
    "Panel",
    "RiskPremiumEstimate",
    "SingularMatrixError",
    "adf_test",
    "f_quantile",
    "f_upper_tail",
    "first_pass",
    "grs_statistic",
    "mc_experiment",
    "roll",
    "second_pass",
    "simulate",
]

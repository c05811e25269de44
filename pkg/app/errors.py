"""
錯誤類型
所有模組共用的例外階層，CLI 依 code 輸出結構化錯誤
"""


class AnalyzerError(Exception):
    """所有分析錯誤的基類"""

    code = "analyzer_error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code

    def to_dict(self) -> dict:
        return {"error": self.code, "message": self.message}


class SingularH(AnalyzerError):
    code = "singular_h"


class NotRegular(AnalyzerError):
    code = "not_regular"


class IllConditioned(AnalyzerError):
    code = "ill_conditioned"


class ZeroArgument(AnalyzerError):
    code = "zero_argument"


class EmptySupport(AnalyzerError):
    code = "empty_support"


class GridMiss(AnalyzerError):
    code = "grid_miss"


class InsufficientBins(AnalyzerError):
    code = "insufficient_bins"


class DegenerateFit(AnalyzerError):
    code = "degenerate_fit"


class BranchViolation(AnalyzerError):
    code = "branch_violation"


class TruncationFailure(AnalyzerError):
    code = "truncation_failure"


class DivisionFailure(AnalyzerError):
    code = "division_failure"


class NotInvariant(AnalyzerError):
    code = "not_invariant"


class TooCloseToWall(AnalyzerError):
    code = "too_close_to_wall"


class StencilCrossesWall(TooCloseToWall):
    code = "stencil_crosses_wall"


class OutsideDomain(AnalyzerError):
    code = "outside_domain"


class LogPole(AnalyzerError):
    code = "log_pole"


class FitFailure(AnalyzerError):
    code = "fit_failure"


class SupportViolation(AnalyzerError):
    code = "support_violation"


class IrregularCharacter(AnalyzerError):
    code = "irregular_character"

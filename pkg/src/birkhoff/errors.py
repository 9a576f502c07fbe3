"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI.
"""


class BirkhoffError(Exception):
    code = "E_DOMAIN"


class DimensionMismatch(BirkhoffError, ValueError):
    code = "E_DIM"


class CoefficientKindMismatch(BirkhoffError, TypeError):
    code = "E_KIND"


class InvalidGenerator(BirkhoffError, ValueError):
    code = "E_GENERATOR"


class NotQuadratic(BirkhoffError, ValueError):
    code = "E_NOT_QUADRATIC"


class EigenvalueClustering(BirkhoffError):
    code = "E_CLUSTER"


class UnsupportedEigenstructure(BirkhoffError):
    code = "E_EIGENSTRUCTURE"


class NearResonance(BirkhoffError):
    code = "E_NEAR_RESONANCE"


class ExactModeUnavailable(BirkhoffError):
    code = "E_EXACT_UNAVAILABLE"


class LatticeError(BirkhoffError):
    code = "E_LATTICE"


class NonConvergence(BirkhoffError):
    code = "E_NONCONVERGENCE"


class RegularityViolation(BirkhoffError):
    code = "E_SINGULAR"


class DegenerateCurve(BirkhoffError, ValueError):
    code = "E_CURVE"


class OutOfRadius(BirkhoffError):
    code = "E_RADIUS"


class ValidationError(BirkhoffError):
    code = "E_VALIDATION"


class ParseError(BirkhoffError):
    code = "E_PARSE"

    def __init__(self, message, line=0, column=0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, col {column}: {message}")

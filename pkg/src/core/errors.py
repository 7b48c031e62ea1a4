"""
Exception hierarchy shared by the core modules and the command line
"""


class TernaryError(Exception):
    """Base class for every error raised on purpose by this package"""
    exit_code = 3

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


class UsageError(TernaryError):
    """Bad command-line arguments or configuration"""


class OutOfRange(TernaryError):
    pass


class NotSquarefree(TernaryError):
    pass


class VariantMismatch(TernaryError):
    pass


class NotPrime(TernaryError):
    pass


class NotPositiveDefinite(TernaryError):
    pass


class IsotropicAtQ(TernaryError):
    pass


class DimensionMismatch(TernaryError):
    pass


class NotIntegral(TernaryError):
    pass


class NotTotallyPD(TernaryError):
    pass


class UnknownName(TernaryError):
    pass


class AdmissibleD(TernaryError):
    """D is one of the fields expected to carry a universal ternary lattice"""


class RankNot3(TernaryError):
    pass


class ParseError(TernaryError):
    """Malformed element, matrix or data file"""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line

    def to_dict(self) -> dict:
        data = super().to_dict()
        data["line"] = self.line
        return data


class ChecksumMismatch(TernaryError):
    """Checkpoint belongs to a different problem"""


class InvariantViolation(TernaryError):
    """An internal consistency check failed; results must not be trusted"""
    exit_code = 4

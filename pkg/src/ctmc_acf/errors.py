"""Exception hierarchy.

Every error carries a short ``code`` used by the command-line front end in
its ``ERROR <code>: <detail>`` line.  Errors flagged ``numerical`` map to exit
status 2, everything else (bad input, failed validation) to exit status 1.
"""


class CtmcError(Exception):
    code = "CtmcError"
    numerical = False

    def __init__(self, detail=""):
        super().__init__(detail)
        self.detail = detail

    def __str__(self):
        return f"{self.code}: {self.detail}" if self.detail else self.code


class ModelError(CtmcError, ValueError):
    code = "ModelError"


class NonSquare(ModelError):
    code = "NonSquare"


class DimensionMismatch(ModelError):
    code = "DimensionMismatch"


class InvalidStateSpace(ModelError):
    code = "InvalidStateSpace"


class InvalidProbVector(ModelError):
    code = "InvalidProbVector"


class NegativeOffDiagonal(ModelError):
    code = "NegativeOffDiagonal"


class RowSumNonZero(ModelError):
    code = "RowSumNonZero"


class NotIrreducible(ModelError):
    code = "NotIrreducible"


class InsufficientVisits(CtmcError, ValueError):
    code = "InsufficientVisits"


class NumericalError(CtmcError, ArithmeticError):
    code = "NumericalError"
    numerical = True


class SingularSystem(NumericalError):
    code = "SingularSystem"


class DegenerateSpectrum(NumericalError):
    """Eigenvalues too close together for a trustworthy residue expansion."""

    code = "DegenerateSpectrum"


class ImaginaryResidueTooLarge(NumericalError):
    code = "ImaginaryResidueTooLarge"


class OverflowHorizon(NumericalError):
    code = "OverflowHorizon"


class MixtureUnavailable(NumericalError):
    code = "MixtureUnavailable"


class AbsorbingState(NumericalError):
    code = "AbsorbingState"

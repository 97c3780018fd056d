"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes or factor dimensions."""


class NotHermitianError(ValueError):
    """A matrix required to be Hermitian deviates beyond tolerance."""


class NotDensityMatrixError(ValueError):
    """A state input fails the density-matrix checks (PSD, unit trace)."""


class NotUnitaryError(ValueError):
    """A matrix required to be unitary deviates beyond tolerance."""


class EigenConvergenceError(RuntimeError):
    """The Hermitian eigensolver did not converge."""


class NumericalInconsistencyError(RuntimeError):
    """Two independent computation paths disagree beyond tolerance.

    Raised when an internal cross-check fails, e.g. a quasiprobability
    table computed two ways, a probability more negative than roundoff
    can explain, or an imaginary residue where a real value is forced.
    """


class ConfigError(ValueError):
    """A scenario or sweep configuration failed validation.

    ``field`` holds the path of the offending entry, e.g.
    ``channels[1].eta``.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")

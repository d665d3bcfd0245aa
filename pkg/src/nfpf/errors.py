"""Exception and warning types shared across the toolkit."""


class NfpfError(Exception):
    """Base class for toolkit failures."""


class SchemaError(NfpfError):
    """Model file violates the expected layout; carries the offending field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class NotAtEquilibriumError(NfpfError):
    """Vector field is not zero at the proposed expansion point."""

    def __init__(self, residual_norm, message=None):
        self.residual_norm = float(residual_norm)
        super().__init__(
            message or f"residual norm {residual_norm:.3e} exceeds equilibrium tolerance"
        )


class EquilibriumError(NfpfError):
    """Newton solve for the swing equilibrium failed."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class DefectiveMatrixError(NfpfError):
    """State matrix has no usable eigenbasis within tolerance."""


class ConvergenceError(NfpfError):
    """Iteration did not converge; carries the last residual."""

    def __init__(self, residual, message=None):
        self.residual = float(residual)
        super().__init__(message or f"no convergence, last residual {residual:.3e}")


class DivergenceError(NfpfError):
    """Trajectory left the finite range; carries the divergence time."""

    def __init__(self, time, message=None):
        self.time = float(time)
        super().__init__(message or f"state became non-finite at t = {time:.6g} s")


class ResonanceWarning(UserWarning):
    """Near-resonant denominator encountered while building normal-form coefficients."""


class IntegrationAccuracyWarning(UserWarning):
    """Step-halving self check exceeded its tolerance."""

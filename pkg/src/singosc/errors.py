"""Exception hierarchy shared by all modules."""


class SingOscError(Exception):
    """Base class for all package errors."""


class DomainError(SingOscError, ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(SingOscError, ArithmeticError):
    """A series or iteration failed to converge within its budget."""


class CollapseError(DomainError):
    """1 + 4c < 0: the inverse-square coupling is supercritical."""


class AdmissibilityError(DomainError):
    """Bargman index kappa <= 1/4 (or otherwise inadmissible)."""


class NormalizabilityError(DomainError):
    """Requested eigenstate is not normalizable."""


class TruncationError(SingOscError, ArithmeticError):
    """Fock-space truncation could not certify the requested tail."""


class IntegrationError(SingOscError, ArithmeticError):
    """ODE or PDE integration became unreliable."""


class CausticError(DomainError):
    """Green function evaluated at a caustic (sin gamma_12 = 0)."""


class OutOfSpanError(DomainError):
    """Time outside the span covered by a trajectory."""


class ScenarioError(SingOscError, ValueError):
    """Scenario document is malformed or violates an invariant."""


class ExpressionError(SingOscError, ValueError):
    """Syntax or name error in a time expression."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class FrameError(SingOscError, TypeError):
    """Arithmetic between su(1,1) elements living in different frames."""

"""Exception hierarchy for the deformation engine.

Every error carries the CLI exit code it maps to, so ``cli.main`` can turn any
library failure into the documented exit status without inspecting messages.
"""

from src import EXIT_INPUT, EXIT_INTERNAL, EXIT_USAGE


class DefcohomError(Exception):
    """Base class for all engine errors."""

    exit_code = EXIT_INTERNAL


class UsageError(DefcohomError):
    """Bad command-line usage or an unresolvable selector."""

    exit_code = EXIT_USAGE


class InputValidationError(DefcohomError):
    """A document or value supplied by the user is invalid."""

    exit_code = EXIT_INPUT


class SchemaError(InputValidationError):
    """A JSON document does not conform to its schema."""


class ModelValidationError(InputValidationError):
    """A model fails d^2 = 0, integrability or the Jacobi identity."""


class PreconditionError(InputValidationError):
    """An operation was called with inputs violating its precondition."""


class ArithmeticFault(DefcohomError):
    """Division by zero or mixing values from incompatible rings."""


class InvariantViolation(DefcohomError):
    """An internal invariant failed; results cannot be trusted."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NonIntegrableError(PreconditionError):
    """A deformed structure was used where integrability is required.

    ``defect`` holds the offending integrability or Maurer-Cartan defect.
    """

    def __init__(self, message: str, defect=None):
        super().__init__(message)
        self.defect = defect

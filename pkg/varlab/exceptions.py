# varlab/exceptions.py

class ValidationError(Exception):
    """Invalid input, parameters or configuration."""
    pass

class InvalidBoxError(ValidationError):
    """Box with a degenerate or out-of-period axis."""
    pass

class UnknownFunctionError(ValidationError):
    """Closed-form source name not found in the registry."""
    pass

class UnknownConditionError(ValidationError):
    """Condition id outside {lambda, lambda1, lambda2, lambda3, var}."""
    pass

class HorizonError(ValidationError):
    """Materialized sequence too short for the requested index."""
    pass

class PreconditionError(Exception):
    """A mathematical precondition of an operation does not hold."""
    pass

class OracleRefusedError(Exception):
    """Exhaustive enumeration requested on an instance above the cap."""
    pass

class ExactModeRefusedError(Exception):
    """Exact multi-axis variation requested beyond the enumeration caps."""
    pass

class ServiceError(Exception):
    """Custom exception for experiment orchestration errors."""
    pass

class InconsistentBoundsError(Exception):
    """Lower, exact and upper values of a variation bracket out of order."""
    pass

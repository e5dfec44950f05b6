"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration, profile, or file input."""


class SingularityError(ArithmeticError):
    """A circuit evaluation hit a (near-)singular denominator."""


class ProtocolInfeasibleError(RuntimeError):
    """The sounding protocol cannot fit inside one coherence block."""


class DivergenceError(RuntimeError):
    """Training produced non-finite network parameters."""

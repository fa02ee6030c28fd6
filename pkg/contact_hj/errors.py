"""Exception hierarchy shared by the solvers and the command line."""


class ContactHJError(Exception):
    pass


class CatalogError(ContactHJError):
    """Unknown Hamiltonian name."""


class ParameterError(ContactHJError, ValueError):
    """A numeric parameter is outside its admissible range."""


class IntegrityError(ContactHJError):
    """An internal contract was violated (corrupted argmin field, broken monotonicity)."""


class ConfigError(ContactHJError):
    pass


class BlowUpError(ContactHJError):
    """Finite-difference values left the ceiling regime."""

    def __init__(self, message, t=None, max_value=None):
        super().__init__(message)
        self.t = t
        self.max_value = max_value

class PeerSelectError(Exception):
    """Base class for exceptions."""
    def __init__(self, value):
        self.value = value

    def __str__(self):
        return repr(self.value)


class ValidationError(PeerSelectError):
    """Exception raised when an instance or argument violates a precondition."""
    pass


class InfeasibleError(ValidationError):
    "Exception raised when generation parameters admit no instance."
    pass


class ParseError(PeerSelectError):
    """Exception raised for errors in an input file or literal."""
    pass

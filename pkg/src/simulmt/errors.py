"""Exception hierarchy shared across the package."""


class SimulMTError(Exception):
    """Base class for every error raised by simulmt."""


class EmptyInput(SimulMTError, ValueError):
    pass


class TokenizerFault(SimulMTError, ValueError):
    pass


class InvalidParameter(SimulMTError, ValueError):
    pass


class InvalidPolicy(SimulMTError, ValueError):
    pass


class ShapeMismatch(SimulMTError, ValueError):
    pass


class InvalidAlignment(SimulMTError, ValueError):
    pass


class IncompleteInput(SimulMTError, ValueError):
    pass


class IncompleteTrace(SimulMTError, ValueError):
    pass


class MemoryFinished(SimulMTError, RuntimeError):
    """Raised when appending to a memory whose translation has ended."""


class NonProgressingAgent(SimulMTError, RuntimeError):
    pass


class ProtocolError(SimulMTError, RuntimeError):
    """The inference server answered with something we cannot interpret."""


class AgentUnavailable(SimulMTError, RuntimeError):
    """The translation agent could not be reached.

    When raised out of a session, ``trace`` holds everything recorded
    before the failure.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace

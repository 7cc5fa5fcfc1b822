"""Exception types raised by netclust."""


class InputError(ValueError):
    """Malformed graph, partition or file content."""


class DisconnectedGraphError(InputError):
    """A closed-form H2 quantity was requested on a disconnected damper graph."""


class H2UndefinedError(ArithmeticError):
    """The system has an observable and controllable marginal mode, so its H2 norm is infinite."""


class IntegrationError(RuntimeError):
    """Time integration produced a non-finite state."""

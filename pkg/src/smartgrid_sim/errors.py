"""Exception hierarchy shared by every module of the simulator."""


class SimulatorError(Exception):
    """Base class for all errors raised by :mod:`smartgrid_sim`."""


class ParseError(SimulatorError):
    """The scenario document is not well-formed JSON or not a JSON object."""


class ValidationError(SimulatorError):
    """A scenario value violates an invariant.

    ``field`` holds the name of the offending key (e.g. ``"peak_windows"``).
    """

    def __init__(self, field: str, message: str = "invalid value"):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class ContractViolation(SimulatorError):
    """A plant or controller operation was called outside its contract."""


class InternalInvariantError(SimulatorError):
    """A module contract tripped during a run; carries the tick index."""

    def __init__(self, tick: int, message: str):
        self.tick = tick
        super().__init__(f"tick {tick}: {message}")

"""Exception types shared across the package."""


class NetsamplerError(Exception):
    """Base class for all package errors."""


class ParameterError(NetsamplerError):
    """An argument violates a documented precondition."""


class GenerationError(NetsamplerError):
    """A random generator exhausted its retry budget (e.g. connectivity)."""


class TopologyParseError(NetsamplerError):
    """A topology file could not be parsed; message carries line context."""


class DecisionError(NetsamplerError):
    """A node submitted an invalid decision."""

    def __init__(self, node: int, why: str):
        self.node = node
        self.why = why
        super().__init__(f"invalid decision for node {node}: {why}")


class WeightFormatError(NetsamplerError):
    """A weight file violates the schema; message names the field."""

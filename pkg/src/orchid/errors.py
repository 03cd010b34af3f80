class OrchidError(Exception):
    """Base class for library errors."""


class ParseError(OrchidError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class IsolatedNode(OrchidError):
    """A node without neighbors cannot spread walk mass."""

    def __init__(self, node: int):
        super().__init__(f"node {node} has no neighbors")
        self.node = node


class InfiniteCost(OrchidError):
    """Transport between measures whose supports are mutually unreachable."""


class InfiniteDistance(OrchidError):
    """Curvature requested across connected components."""


class DistanceCapExceeded(OrchidError):
    """A truncated distance lookup missed a pair that should lie within the cap."""


class Unsupported(OrchidError):
    pass


class DiameterUnavailable(OrchidError):
    pass


class SpecError(OrchidError, ValueError):
    """Invalid generator parameters."""


class EmptyFeature(OrchidError):
    pass


class ShapeError(OrchidError, ValueError):
    pass

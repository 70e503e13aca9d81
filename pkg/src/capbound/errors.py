"""Exception types shared across the package."""


class CapboundError(Exception):
    """Base class for all package-specific errors."""


class MeshError(CapboundError):
    """Invalid mesh topology, geometry, or file content (an input error)."""


class NumericalError(CapboundError):
    """A solver or quadrature failed to meet its accuracy contract."""

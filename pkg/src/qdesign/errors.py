class QDesignError(Exception):
    """Base class for errors raised by qdesign."""


class SizeCapError(QDesignError):
    """A dense construction would exceed the configured dimension cap."""


class DesignFormatError(QDesignError):
    """A design file could not be parsed or failed validation."""


class ConstructionError(QDesignError):
    """A POVM set could not be assembled from the given design and grouping."""


class ConvergenceError(QDesignError):
    """An iterative routine ran out of iterations."""

"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Mismatched register widths, vector lengths, or permutation sizes."""


class ValidationError(ValueError):
    """Input data violates a contract (e.g. unnormalized distribution)."""


class ResourceLimitError(RuntimeError):
    """An enumeration or matrix size exceeds the configured desk-scale guard."""

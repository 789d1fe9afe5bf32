"""Exception types shared across the package; the CLI maps them to exit codes."""
from __future__ import annotations


class CamcError(Exception):
    """Base class for package errors."""


class ValidationError(CamcError):
    """Bad inputs: malformed specs, non-closing arcs, invalid parameters. Exit code 2."""


class DimensionMismatchError(ValidationError):
    """A direction or point of the wrong ambient dimension."""

    def __init__(self, expected_n: int, actual_n: int):
        self.expected_n = expected_n
        self.actual_n = actual_n
        super().__init__(f"dimension mismatch: expected n={expected_n}, got n={actual_n}")


class ToleranceError(CamcError):
    """A quantitative check missed its stated tolerance. Exit code 3."""


class ResourceCapError(CamcError):
    """A configurable work cap was exceeded. Exit code 4."""

    def __init__(self, cap: int, what: str = "partial paths"):
        self.cap = cap
        super().__init__(f"enumeration exceeded the cap of {cap} {what}")


class ExtinctionError(ValidationError):
    """The self-similar family was queried at or past its extinction time."""


class MeshError(CamcError):
    """Degenerate mesh data (rank-deficient tangent, zero-length segment)."""


class ConvexityDiagnosticError(CamcError):
    """Eigenvalue and midpoint convexity verdicts disagree; carries both witnesses."""

    def __init__(self, eigen_witness, eigen_value, midpoint_witness, midpoint_gap):
        self.eigen_witness = eigen_witness
        self.eigen_value = eigen_value
        self.midpoint_witness = midpoint_witness
        self.midpoint_gap = midpoint_gap
        super().__init__(
            "convexity verdicts disagree: min eigenvalue "
            f"{eigen_value!r} at {eigen_witness}, midpoint gap {midpoint_gap!r}")

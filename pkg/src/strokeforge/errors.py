"""Exception taxonomy shared across the package.

Two broad families matter to callers: bad input (maps to CLI exit code 2)
and numeric breakdown during a computation (exit code 3).
"""


class StrokeforgeError(Exception):
    """Base class for all package errors."""


class InputError(StrokeforgeError):
    """Invalid user input: unsupported file, malformed points, bad parameters."""


class NumericError(StrokeforgeError):
    """A computation failed numerically (divergence, degenerate system)."""


class ParameterRangeError(InputError):
    """Curve parameter outside the spline's [0, n] domain."""


class ConstraintSpacingError(InputError):
    """Two constrained nodes without a free node between them."""

    def __init__(self, node_a: int, node_b: int):
        self.node_a = node_a
        self.node_b = node_b
        super().__init__(
            f"constrained nodes {node_a} and {node_b} are adjacent; "
            "at least one free node is required between interpolated nodes"
        )

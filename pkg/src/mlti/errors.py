"""Exception types raised across the package."""
from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Operands have incompatible shapes, modes or index ranges."""


class SingularTensorError(np.linalg.LinAlgError):
    """An even-order square tensor is numerically singular under the unfolding."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance.

    ``residual`` is the last relative residual, ``iterate`` the last iterate
    (or ``None`` if the method broke down before producing one).
    """

    def __init__(self, message, residual=float("nan"), iterate=None):
        super().__init__(message)
        self.residual = residual
        self.iterate = iterate


class PoleError(ArithmeticError):
    """Transfer function evaluated at (or numerically at) a pole."""

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class PreconditionError(ValueError):
    """An operation's mathematical precondition (e.g. stability) does not hold."""


class CapabilityError(ValueError):
    """The request exceeds a documented capability limit."""

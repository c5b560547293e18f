################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Equidistant B-spline bases."""
import warnings
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Tuple

import numpy as np
from scipy.interpolate import BSpline

from ..errors import ConfigurationError, DomainError
from ..typing import RealVector


@dataclass(frozen=True)
class KnotGrid:
    """Equidistant knots of a B-spline basis over `boundary`.

    The `inner_knots` knots split the boundary interval into equally long
    cells; `degree` further knots are placed beyond each boundary at the same
    spacing, so the basis has `inner_knots + degree + 1` functions.
    """

    inner_knots: int = 20
    degree: int = 3
    boundary: Tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.inner_knots < 0:
            raise ConfigurationError(
                f"Number of inner knots must be non-negative, got {self.inner_knots}."
            )
        if self.degree < 0:
            raise ConfigurationError(f"Degree must be non-negative, got {self.degree}.")
        low, high = (float(value) for value in self.boundary)
        if not (np.isfinite(low) and np.isfinite(high)) or not low < high:
            raise DomainError(f"Degenerate spline boundary [{low}, {high}].")
        object.__setattr__(self, "boundary", (low, high))

    @classmethod
    def from_data(cls, x: RealVector, inner_knots: int = 20, degree: int = 3):
        """Knot grid spanning the observed range of `x` (NaNs ignored)."""
        x = np.asarray(x, dtype=float)
        x = x[~np.isnan(x)]
        if x.size == 0:
            raise DomainError("Cannot place knots without observed values.")
        return cls(inner_knots, degree, (float(x.min()), float(x.max())))

    @property
    def n_basis(self) -> int:
        return self.inner_knots + self.degree + 1

    @property
    def spacing(self) -> float:
        low, high = self.boundary
        return (high - low) / (self.inner_knots + 1)

    @property
    def expanded_knots(self) -> np.ndarray:
        low, high = self.boundary
        step = self.spacing
        return np.concatenate(
            (
                np.linspace(low - self.degree * step, low - step, self.degree),
                np.linspace(low, high, self.inner_knots + 2),
                np.linspace(high + step, high + self.degree * step, self.degree),
            )
        )

    def clamp(self, x: RealVector) -> np.ndarray:
        """Values of `x` clipped to the boundary, warning if any was outside."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("Spline arguments must be finite.")
        low, high = self.boundary
        outside = (x < low) | (x > high)
        if outside.any():
            warnings.warn(
                f"{int(outside.sum())} values outside of [{low}, {high}] were clamped "
                "to the boundary.",
                UserWarning,
            )
        return np.clip(x, low, high)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "inner_knots": self.inner_knots,
            "degree": self.degree,
            "boundary": list(self.boundary),
        }

    @classmethod
    def from_dict(cls, dictionary: Mapping[str, Any]) -> "KnotGrid":
        return cls(
            int(dictionary["inner_knots"]),
            int(dictionary["degree"]),
            tuple(dictionary["boundary"]),
        )


def bspline_design(x: RealVector, grid: KnotGrid) -> np.ndarray:
    """B-spline basis functions of `grid` evaluated at `x`.

    Args:
        x: covariate values; values outside of the grid boundary are clamped.
        grid: knot grid of the basis.

    Returns:
        Dense matrix of shape (len(x), grid.n_basis). Rows are non-negative and
        sum to one.
    """
    x = grid.clamp(x)
    design = BSpline.design_matrix(x, grid.expanded_knots, grid.degree)
    return design.toarray()

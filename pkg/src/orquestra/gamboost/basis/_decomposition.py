################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Split of a P-spline into constant, linear and penalized nonlinear parts."""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from ..errors import DomainError
from ..typing import RealVector
from ._penalties import PenaltyMatrix, difference_penalty, ridge_penalty
from ._splines import KnotGrid, bspline_design


@dataclass(frozen=True)
class DecomposedDesign:
    """Reparameterized second-order P-spline.

    The spline span is split into `constant_part` (ones), `linear_part`
    (covariate centered at its weighted mean) and `nonlinear_part`, whose
    columns are weighted-orthogonal to the first two and carry an identity
    penalty.

    `transform`, `projection` and `center` map any B-spline design of the same
    knot grid to the nonlinear part (see `nonlinear_design`).
    """

    constant_part: np.ndarray
    linear_part: np.ndarray
    nonlinear_part: np.ndarray
    transform: np.ndarray
    projection: np.ndarray
    center: float

    @property
    def penalty(self) -> PenaltyMatrix:
        return ridge_penalty(self.nonlinear_part.shape[1])

    def nonlinear_design(self, design: np.ndarray, x: RealVector) -> np.ndarray:
        """Nonlinear part for B-spline rows `design` evaluated at covariate `x`."""
        x = np.asarray(x, dtype=float)
        parametric = np.column_stack([np.ones_like(x), x - self.center])
        return design @ self.transform - parametric @ self.projection


def spectral_transform(penalty: PenaltyMatrix, tol: float = 1e-10) -> np.ndarray:
    """Columns Γ₊Ω₊^(-1/2) of the penalized eigen-directions of K = ΓΩΓᵀ.

    With β = Tγ the penalty βᵀKβ becomes the identity penalty γᵀγ.
    """
    eigenvalues, eigenvectors = scipy.linalg.eigh(penalty.matrix)
    positive = eigenvalues > tol * max(eigenvalues.max(), 1.0)
    return eigenvectors[:, positive] / np.sqrt(eigenvalues[positive])


def decompose_pspline(
    design: np.ndarray,
    penalty: PenaltyMatrix,
    x: RealVector,
    w: Optional[RealVector] = None,
) -> DecomposedDesign:
    """Decompose a P-spline with second-order difference penalty.

    Args:
        design: B-spline design of `x` (equidistant knots).
        penalty: second-order difference penalty of the basis.
        x: covariate values of the design rows.
        w: observation weights used for centering and orthogonalization.

    Returns:
        The decomposed design; its nonlinear part satisfies
        ``nonlinear_partᵀ W [1, x] = 0``.

    Raises:
        DomainError: the penalty isn't of second order, x is constant on the
            weighted rows or the nonlinear part vanishes.
    """
    if penalty.order != 2:
        raise DomainError(
            f"Decomposition needs a second-order difference penalty, got order "
            f"{penalty.order}."
        )
    design = np.asarray(design, dtype=float)
    x = np.asarray(x, dtype=float)
    w = np.ones_like(x) if w is None else np.asarray(w, dtype=float)
    weighted_rows = w > 0
    if not weighted_rows.any() or np.ptp(x[weighted_rows]) == 0:
        raise DomainError("Cannot decompose a spline of a constant covariate.")

    center = float(np.dot(w, x) / w.sum())
    parametric = np.column_stack([np.ones_like(x), x - center])
    transform = spectral_transform(penalty)
    reparameterized = design @ transform
    weighted = parametric * w[:, None]
    projection = np.linalg.solve(parametric.T @ weighted, weighted.T @ reparameterized)
    nonlinear = reparameterized - parametric @ projection

    scale = np.sqrt(w)[:, None]
    if np.linalg.matrix_rank(np.column_stack([parametric, nonlinear]) * scale) < 3:
        raise DomainError("Nonlinear part of the decomposed spline vanishes.")
    return DecomposedDesign(
        constant_part=np.ones((x.size, 1)),
        linear_part=x - center,
        nonlinear_part=nonlinear,
        transform=transform,
        projection=projection,
        center=center,
    )


def decompose_covariate(
    x: RealVector, grid: KnotGrid, w: Optional[RealVector] = None
) -> DecomposedDesign:
    """Decomposed P-spline of `x` on `grid` with second-order difference penalty."""
    design = bspline_design(x, grid)
    return decompose_pspline(design, difference_penalty(grid.n_basis, 2), x, w)

################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
from typing import Tuple

import numpy as np

from ..typing import RealVector
from ._penalties import PenaltyMatrix, difference_penalty, kronecker_sum_penalty
from ._splines import KnotGrid, bspline_design


def row_tensor(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Row-wise Kronecker product; column i * m2 + j pairs column i with j."""
    n_rows = first.shape[0]
    return (first[:, :, None] * second[:, None, :]).reshape(n_rows, -1)


def tensor_product_design(
    x1: RealVector, x2: RealVector, grid1: KnotGrid, grid2: KnotGrid
) -> Tuple[np.ndarray, PenaltyMatrix]:
    """Bivariate tensor product P-spline with first-order difference penalties.

    Returns:
        Design of width ``grid1.n_basis * grid2.n_basis`` (rows sum to one) and
        the Kronecker-sum penalty K1 ⊗ I + I ⊗ K2.
    """
    design = row_tensor(bspline_design(x1, grid1), bspline_design(x2, grid2))
    penalty = kronecker_sum_penalty(
        difference_penalty(grid1.n_basis, 1), difference_penalty(grid2.n_basis, 1)
    )
    return design, penalty

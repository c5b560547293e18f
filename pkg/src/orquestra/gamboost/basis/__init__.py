################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Spline bases, difference penalties and their reparameterizations."""
from ._decomposition import (
    DecomposedDesign,
    decompose_covariate,
    decompose_pspline,
    spectral_transform,
)
from ._penalties import (
    PenaltyMatrix,
    difference_matrix,
    difference_penalty,
    kronecker_sum_penalty,
    ridge_penalty,
    zero_penalty,
)
from ._splines import KnotGrid, bspline_design
from ._tensor import row_tensor, tensor_product_design

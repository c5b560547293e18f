################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class PenaltyMatrix:
    """Symmetric positive semi-definite penalty of a coefficient vector.

    `order` is the difference order the penalty was built from (0 for ridge
    penalties).
    """

    order: int
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("Penalty matrix has to be square.")
        if not np.allclose(matrix, matrix.T):
            raise ValueError("Penalty matrix has to be symmetric.")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def quadratic_form(self, coefficients: np.ndarray) -> float:
        coefficients = np.asarray(coefficients, dtype=float)
        return float(coefficients @ self.matrix @ coefficients)

    def null_space_dimension(self, tol: float = 1e-9) -> int:
        scale = max(float(np.abs(self.matrix).max()), 1.0)
        return self.size - int(np.linalg.matrix_rank(self.matrix, tol=tol * scale))


def ridge_penalty(size: int) -> PenaltyMatrix:
    return PenaltyMatrix(0, np.eye(size))


def zero_penalty(size: int) -> PenaltyMatrix:
    return PenaltyMatrix(0, np.zeros((size, size)))


def difference_matrix(m: int, d: int) -> np.ndarray:
    """The (m - d) x m operator of d-th order differences."""
    return np.diff(np.eye(m), n=d, axis=0)


def difference_penalty(m: int, d: int) -> PenaltyMatrix:
    """Penalty DᵀD of the squared d-th order differences of m coefficients.

    Raises:
        DomainError: unless m > d >= 1.
    """
    if d < 1 or m <= d:
        raise DomainError(
            f"Difference penalty of order {d} needs more than {d} coefficients, "
            f"got {m}."
        )
    difference = difference_matrix(m, d)
    return PenaltyMatrix(d, difference.T @ difference)


def kronecker_sum_penalty(first: PenaltyMatrix, second: PenaltyMatrix) -> PenaltyMatrix:
    """Penalty K1 ⊗ I + I ⊗ K2 of a row-wise tensor product basis."""
    matrix = np.kron(first.matrix, np.eye(second.size)) + np.kron(
        np.eye(first.size), second.matrix
    )
    return PenaltyMatrix(min(first.order, second.order), matrix)

"""Dense-matrix counterparts of the diagonal model.

Coordinates of H1 are ordered kernel block first, then the span
coefficients, matching HilbertElement.as_vector().
"""

import logging
from typing import Any, Optional

import numpy as np
import scipy.linalg

from .errors import StructuralError
from .gaussian import ModelSpec
from .spectral import (H1, H2, DiagonalOperator, HilbertElement, SingularSystem,
                       frozen)

_logger = logging.getLogger("fhptool")


def forward_matrix(A):  # type: (SingularSystem) -> np.ndarray
    """A as an N x (d0 + N) matrix."""
    return np.hstack([np.zeros((A.truncation, A.kernel_dim)), np.diag(A.lambdas)])


def pseudo_inverse_matrix(A):  # type: (SingularSystem) -> np.ndarray
    """A*(AA*)^-1 as a (d0 + N) x N matrix."""
    M = forward_matrix(A)
    return scipy.linalg.solve(M.dot(M.T), M, assume_a="pos").T


def operator_matrix(op, kernel_dim=0):  # type: (DiagonalOperator, int) -> np.ndarray
    if op.space == H2:
        return np.diag(op.diag)
    kernel = np.broadcast_to(np.asarray(op.kernel_action, dtype=float), (kernel_dim,))
    return np.diag(np.concatenate([kernel, op.diag]))


def dense_minimize(A, B, x):
    # type: (SingularSystem, DiagonalOperator, HilbertElement) -> HilbertElement
    """Solve (I + A*BA) y = x directly."""
    A.check(x, H1)
    M = forward_matrix(A)
    lhs = np.eye(M.shape[1]) + M.T.dot(operator_matrix(B)).dot(M)
    y = scipy.linalg.solve(lhs, x.as_vector(), assume_a="pos")
    return HilbertElement.from_vector(y, A.kernel_dim, H1)


def dense_jb(A, B, x, y):
    # type: (SingularSystem, DiagonalOperator, HilbertElement, HilbertElement) -> float
    M = forward_matrix(A)
    diff = x.as_vector() - y.as_vector()
    Ay = M.dot(y.as_vector())
    return float(diff.dot(diff) + Ay.dot(operator_matrix(B)).dot(Ay))


def dense_covariances(m):  # type: (ModelSpec) -> Any
    """(Sigma_X, Sigma_XY) of the joint Gaussian (x, y)."""
    G = pseudo_inverse_matrix(m.A)
    Q = G.dot(np.diag(m.tau)).dot(G.T)
    sigma_u = np.diag(np.concatenate([m.sigma_u.kernel_vars, m.mu]))
    return sigma_u + Q, Q


def dense_conditional_expectation(m, x):
    # type: (ModelSpec, HilbertElement) -> HilbertElement
    """E[y|x] = E[y] + Sigma_XY Sigma_X^-1 (x - E[x]) with E[x] = E[y] = y0."""
    m.A.check(x, H1)
    sigma_x, sigma_xy = dense_covariances(m)
    mean = m.y0().as_vector()
    w = scipy.linalg.solve(sigma_x, x.as_vector() - mean, assume_a="pos")
    return HilbertElement.from_vector(mean + sigma_xy.dot(w), m.kernel_dim, H1)


def second_difference_matrix(T):  # type: (int) -> np.ndarray
    """P with (Py)_t = y_t - 2 y_{t-1} + y_{t-2}, a (T-2) x T matrix."""
    if T < 3:
        raise StructuralError(u"the second difference needs T >= 3, got %d" % T)
    P = np.zeros((T - 2, T))
    rows = np.arange(T - 2)
    P[rows, rows] = 1.0
    P[rows, rows + 1] = -2.0
    P[rows, rows + 2] = 1.0
    return P


class MatrixEmbedding(object):
    """A finite matrix operator expressed through its computed SVD.

    The right singular vectors with nonzero singular value span Ker(A)^perp;
    the remaining ones form the kernel block.
    """

    def __init__(self, matrix, rcond=None):  # type: (Any, Optional[float]) -> None
        M = np.asarray(matrix, dtype=float)
        if M.ndim != 2 or min(M.shape) == 0:
            raise StructuralError(u"expected a nonempty 2-d matrix, got shape %s" % (M.shape,))
        U, s, Vh = scipy.linalg.svd(M, full_matrices=True)
        if rcond is None:
            rcond = max(M.shape) * np.finfo(float).eps
        rank = int(np.sum(s > rcond * s[0])) if s.size and s[0] > 0 else 0
        if rank == 0:
            raise StructuralError(u"the matrix has numerical rank 0")
        if rank < M.shape[0]:
            _logger.warning(u"matrix has rank %d < %d rows; components outside the "
                            u"range are dropped", rank, M.shape[0])
        self.matrix = M
        self.left = frozen_matrix(U[:, :rank])
        self.right = frozen_matrix(Vh[:rank])
        self.kernel_basis = frozen_matrix(Vh[rank:])
        self.system = SingularSystem(s[:rank], Vh.shape[0] - rank)

    def analyze(self, vector):  # type: (Any) -> HilbertElement
        """Coordinates of a domain vector in (kernel basis, e_k)."""
        vec = frozen(vector, "vector")
        if vec.size != self.matrix.shape[1]:
            raise StructuralError(u"vector has length %d, the matrix has %d columns"
                                  % (vec.size, self.matrix.shape[1]))
        return HilbertElement(self.right.dot(vec), self.kernel_basis.dot(vec), H1)

    def analyze_range(self, vector):  # type: (Any) -> HilbertElement
        """Coordinates of a range vector in (d_k)."""
        vec = frozen(vector, "vector")
        if vec.size != self.matrix.shape[0]:
            raise StructuralError(u"vector has length %d, the matrix has %d rows"
                                  % (vec.size, self.matrix.shape[0]))
        return HilbertElement(self.left.T.dot(vec), None, H2)

    def synthesize(self, h):  # type: (HilbertElement) -> np.ndarray
        self.system.check(h, H1)
        return self.right.T.dot(h.span) + self.kernel_basis.T.dot(h.kernel)


def frozen_matrix(values):  # type: (Any) -> np.ndarray
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr

"""The functional Hodrick-Prescott filter.

For a smoothing operator B on H2, diagonal with entries beta_k >= 0, the
filtered signal y(B, x) minimizes

    J_B(y) = ||x - y||^2 + <Ay, BAy>

and is given by (I + A*BA)^-1 x. The optimal operator B-hat makes y(B-hat, x)
the best predictor of the signal given x, up to the Ker(A) component of the
noise, which no smoothing operator can remove.
"""

import logging
from typing import Any, Dict, List, Sequence, Text, Tuple

import numpy as np
import scipy.linalg
from joblib import Parallel, delayed
from scipy.optimize import minimize_scalar

from .dense import second_difference_matrix
from .errors import PreconditionError, StructuralError
from .gaussian import CANDIDATE_STREAM, ModelSpec, conditional_expectation, substream
from .spectral import (H1, H2, MAX_FLOAT, DiagonalOperator, HilbertElement,
                       QuotientOperator, SingularSystem, saturating_ratio)

_logger = logging.getLogger("fhptool")

CANDIDATE_SCALES = (0.25, 0.5, 2.0, 4.0)


def check_smoothing(A, B):  # type: (SingularSystem, DiagonalOperator) -> None
    if B.space != H2:
        raise StructuralError(u"smoothing operators act on H2, got %s" % B.space)
    if B.truncation != A.truncation:
        raise StructuralError(u"smoothing operator has %d entries, A has %d"
                              % (B.truncation, A.truncation))
    if not B.is_psd():
        raise PreconditionError(u"smoothing operator has negative entries at k=%s"
                                % (np.flatnonzero(B.diag < 0) + 1).tolist())


def evaluate_jb(A, B, x, y):
    # type: (SingularSystem, DiagonalOperator, HilbertElement, HilbertElement) -> float
    check_smoothing(A, B)
    A.check(x, H1)
    A.check(y, H1)
    fidelity = (x - y).norm() ** 2
    return float(fidelity + np.sum(penalty_weights(A, B) * y.span ** 2))


def penalty_weights(A, B):  # type: (SingularSystem, DiagonalOperator) -> np.ndarray
    """lambda_k^2 beta_k, the weights of <Ay, BAy> on the span coefficients."""
    num, den = B.fraction()
    return saturating_ratio(A.lambdas ** 2 * num, den)[0]


def smoothing_multipliers(A, B):  # type: (SingularSystem, DiagonalOperator) -> np.ndarray
    """(1 + lambda_k^2 beta_k)^-1, evaluated on beta_k = p_k / q_k as
    q_k / (q_k + lambda_k^2 p_k)."""
    check_smoothing(A, B)
    num, den = B.fraction()
    with np.errstate(over="ignore"):
        return den / (den + A.lambdas ** 2 * num)


def minimize(A, B, x):
    # type: (SingularSystem, DiagonalOperator, HilbertElement) -> HilbertElement
    """y(B, x) = (I + A*BA)^-1 x; A*BA vanishes on Ker(A)."""
    A.check(x, H1)
    return HilbertElement(x.span * smoothing_multipliers(A, B), x.kernel, H1)


def scalar_operator(A, alpha):  # type: (SingularSystem, float) -> DiagonalOperator
    """alpha I on H2; minimize then gives the Tikhonov-Phillips solution y(alpha, x)."""
    if not alpha >= 0:
        raise PreconditionError(u"alpha must be >= 0, got %r" % alpha)
    return DiagonalOperator(np.full(A.truncation, float(alpha)), 0.0, H2)


def optimal_b(m):  # type: (ModelSpec) -> DiagonalOperator
    """B-hat = (AA*)^-1 A Sigma_u A* Sigma_v^-1, diag mu_k / tau_k.

    The action on (Ran A)^perp is left at zero. The pair (mu, tau) is kept,
    so smoothing_multipliers evaluates tau_k / (tau_k + lambda_k^2 mu_k) even
    where mu_k / tau_k leaves the float range.
    """
    b_hat = QuotientOperator(m.mu, m.tau, H2)
    if b_hat.held:
        _logger.debug(u"mu_k/tau_k exceeds the float range for %d modes; B-hat.diag "
                      u"is held at the largest float there", b_hat.held)
    return b_hat


def residual(m, x):  # type: (ModelSpec, HilbertElement) -> HilbertElement
    """y(B-hat, x) - E[y|x], which equals (I - Pi)(x - E[x])."""
    return minimize(m.A, optimal_b(m), x) - conditional_expectation(m, x)


def residual_covariance(m):  # type: (ModelSpec) -> Tuple[DiagonalOperator, float]
    """cov(y(B-hat, x) - E[y|x]) = (I - Pi) Sigma_u and its trace."""
    kernel_vars = m.sigma_u.kernel_vars
    op = DiagonalOperator(np.zeros(m.truncation),
                          kernel_vars if kernel_vars.size else 0.0, H1)
    return op, float(np.sum(kernel_vars))


class OptimalityReport(object):
    """Distances ||y(B, x) - E[y|x]|| for a list of candidates, in candidate
    order, against the distance attained by B-hat."""

    def __init__(self, distances, optimal_distance, lower_bound, tolerance):
        # type: (List[float], float, float, float) -> None
        self.distances = distances
        self.optimal_distance = optimal_distance
        self.lower_bound = lower_bound
        self.tolerance = tolerance
        self.violations = [i for i, d in enumerate(distances)
                           if d < optimal_distance - tolerance]

    @property
    def attains_bound(self):  # type: () -> bool
        return abs(self.optimal_distance - self.lower_bound) <= self.tolerance

    def rows(self):  # type: () -> List[Dict[Text, Any]]
        return [{"candidate": i, "distance": d,
                 "excess": d - self.optimal_distance}
                for i, d in enumerate(self.distances)]

    def as_dict(self):  # type: () -> Dict[Text, Any]
        return {"candidates": len(self.distances),
                "optimal_distance": self.optimal_distance,
                "lower_bound": self.lower_bound,
                "attains_bound": self.attains_bound,
                "violations": list(self.violations)}


def verify_optimality(m, x, candidates, workers=1, rtol=1e-12):
    # type: (ModelSpec, HilbertElement, Sequence[DiagonalOperator], int, float) -> OptimalityReport
    for index, B in enumerate(candidates):
        try:
            check_smoothing(m.A, B)
        except PreconditionError as e:
            raise PreconditionError(u"candidate %d: %s" % (index, e))
    target = conditional_expectation(m, x)

    def distance(B):  # type: (DiagonalOperator) -> float
        return (minimize(m.A, B, x) - target).norm()

    distances = Parallel(n_jobs=max(1, int(workers)), prefer="threads")(
        delayed(distance)(B) for B in candidates)

    optimal = distance(optimal_b(m))
    bound = float(np.linalg.norm(x.kernel - m.y0_kernel))
    report = OptimalityReport(distances, optimal, bound, rtol * max(1.0, x.norm()))
    if report.violations:
        _logger.warning(u"%d candidates beat B-hat: %s",
                        len(report.violations), report.violations)
    return report


def candidate_family(m, count=200, seed=0):
    # type: (ModelSpec, int, int) -> List[DiagonalOperator]
    """The zero operator, c B-hat for c in CANDIDATE_SCALES, then `count`
    random nonnegative diagonals: even ones perturb B-hat by log-normal
    factors, odd ones are uniform on [0, 2 max B-hat]."""
    b_hat = optimal_b(m)
    out = [DiagonalOperator(np.zeros(m.truncation), 0.0, H2)]
    out.extend(b_hat.scaled(c) for c in CANDIDATE_SCALES)
    top = float(np.max(b_hat.diag))
    top = 2.0 * top if top < MAX_FLOAT / 2 else MAX_FLOAT
    for i in range(count):
        rng = substream(seed, i, CANDIDATE_STREAM)
        if i % 2 == 0:
            out.append(b_hat.scaled(rng.lognormal(0.0, 1.0, m.truncation)))
        else:
            out.append(DiagonalOperator(rng.uniform(0.0, top, m.truncation), 0.0, H2))
    return out


def best_scalar_alpha(m, x, log_bounds=(-30.0, 30.0)):
    # type: (ModelSpec, HilbertElement, Tuple[float, float]) -> float
    """The alpha minimizing ||y(alpha I, x) - E[y|x]||, searched over log alpha."""
    target = conditional_expectation(m, x)

    def objective(t):  # type: (float) -> float
        gap = minimize(m.A, scalar_operator(m.A, np.exp(t)), x) - target
        return float(np.sum(gap.span ** 2))

    result = minimize_scalar(objective, bounds=log_bounds, method="bounded",
                             options={"xatol": 1e-10})
    _logger.debug(u"best scalar alpha: log alpha=%r, objective=%r", result.x, result.fun)
    return float(np.exp(result.x))


def filter_identity_gap(m, x):  # type: (ModelSpec, HilbertElement) -> HilbertElement
    """(I + Sigma_u A* Sigma_v^-1 A)^-1 x - (I - Pi)(x - E[x]) - E[y|x]."""
    m.A.check(x, H1)
    factor = m.tau / (m.tau + m.mu * m.lambdas ** 2)
    smoothed = HilbertElement(x.span * factor, x.kernel, H1)
    discrepancy = HilbertElement(np.zeros(m.truncation), x.kernel - m.y0_kernel, H1)
    return smoothed - discrepancy - conditional_expectation(m, x)


def classical_hp(x, alpha):  # type: (Any, float) -> np.ndarray
    """argmin sum (x_t - y_t)^2 + alpha sum (y_t - 2 y_{t-1} + y_{t-2})^2."""
    series = np.asarray(x, dtype=float)
    if series.ndim != 1 or series.size < 3:
        raise StructuralError(u"classical HP needs a series of length >= 3")
    if not alpha > 0:
        raise PreconditionError(u"alpha must be > 0, got %r" % alpha)
    P = second_difference_matrix(series.size)
    lhs = np.eye(series.size) + alpha * P.T.dot(P)
    return scipy.linalg.solve(lhs, series, assume_a="pos")

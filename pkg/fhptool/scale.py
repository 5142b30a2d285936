"""The Hilbert scale generated by K1 = (A*A)^-1 and K2 = (AA*)^-1.

Elements stay in base-space coefficients; the scale index enters only as
lambda-power weights inside norms and covariances. Ker(A) has zero norm in
every H1^-n, so everything here acts on the span block only.
"""

import logging
from typing import Any, Dict, List, Optional, Text

import numpy as np

from .errors import PreconditionError, StructuralError
from .gaussian import ModelSpec, conditional_multipliers
from .hpfilter import check_smoothing, optimal_b, penalty_weights
from .series import Asymptotic, SeriesCheck, check_series, product
from .spectral import H1, H2, DiagonalOperator, HilbertElement, SingularSystem

_logger = logging.getLogger("fhptool")

DEFAULT_N_MAX = 4


def fractional_power(A, s):  # type: (SingularSystem, float) -> DiagonalOperator
    """K1^s, diag lambda_k^(-2s).

    K1 is unbounded on Ker(A); only K1^0 acts there, as the identity. The
    semigroup law K1^s K1^t = K1^(s+t) therefore holds on the span block
    only.
    """
    return DiagonalOperator(A.lambdas ** (-2.0 * s), 1.0 if s == 0 else 0.0, H1)


def scale_weights(A, s):  # type: (SingularSystem, float) -> np.ndarray
    return A.lambdas ** (4.0 * s)


def scale_norm(A, h, s):  # type: (SingularSystem, HilbertElement, float) -> float
    """Norm of h in H^-s: sqrt(sum lambda_k^(4s) h_k^2); negative s gives the
    positive-index norms."""
    if h.truncation != A.truncation:
        raise StructuralError(u"element has %d span coefficients, A has %d"
                              % (h.truncation, A.truncation))
    return float(np.sqrt(np.sum(scale_weights(A, s) * h.span ** 2)))


def _check_index(n):  # type: (Any) -> int
    if int(n) != n or n < 1:
        raise PreconditionError(u"scale index must be a positive integer, got %r" % (n,))
    return int(n)


class ScaleModel(object):
    """A model lifted to H1^-n: extended covariances, the extended Q_v and
    the decisions that make the lifted model admissible."""

    def __init__(self, base, scale_index):  # type: (ModelSpec, int) -> None
        n = _check_index(scale_index)
        lam = base.lambdas
        self.base = base
        self.scale_index = n
        self.extended_sigma_u = DiagonalOperator(lam ** (4 * n) * base.mu, 0.0, H1)
        self.extended_sigma_v = DiagonalOperator(lam ** (4 * n) * base.tau, 0.0, H2)
        self.extended_qv = DiagonalOperator(lam ** (2 * (2 * n - 1)) * base.tau, 0.0, H1)
        for name, op in (("Sigma_u", self.extended_sigma_u),
                         ("Sigma_v", self.extended_sigma_v),
                         ("Q_v", self.extended_qv)):
            if np.any(op.diag == 0):
                _logger.warning(u"extended %s underflows to 0 at n=%d", name, n)

        l_a, mu_a, tau_a = base.asymptotics()
        self.trace_condition_mu = check_series(
            product((l_a, 4 * n - 2), (mu_a, 1)), lam ** (4 * n - 2) * base.mu)
        self.trace_condition_tau = check_series(
            product((l_a, 4 * n), (tau_a, 1)), lam ** (4 * n) * base.tau)
        self.trace_sigma_u = check_series(
            product((l_a, 4 * n), (mu_a, 1)), self.extended_sigma_u.diag)
        self.white_noise_condition = check_series(
            product((l_a, 2 * (2 * n - 1))), lam ** (2 * (2 * n - 1)))
        self.hs_tilde = check_series(
            hs_tilde_asymptotic(l_a, mu_a, tau_a, n),
            self.extended_qv.diag * conditional_multipliers(base))

    @property
    def trace_conditions(self):  # type: () -> Dict[Text, SeriesCheck]
        return {"lambda_mu": self.trace_condition_mu, "lambda_tau": self.trace_condition_tau}

    def as_row(self):  # type: () -> Dict[Text, Any]
        return {"n": self.scale_index,
                "trace_condition_mu": self.trace_condition_mu.decision,
                "trace_condition_mu_partial": self.trace_condition_mu.partial_sum,
                "trace_condition_tau": self.trace_condition_tau.decision,
                "trace_condition_tau_partial": self.trace_condition_tau.partial_sum,
                "trace_sigma_u": self.trace_sigma_u.decision,
                "white_noise_condition": self.white_noise_condition.decision,
                "white_noise_condition_partial": self.white_noise_condition.partial_sum,
                "hs_tilde": self.hs_tilde.decision,
                "hs_tilde_partial": self.hs_tilde.partial_sum}


def hs_tilde_asymptotic(lam, mu, tau, n):
    # type: (Optional[Asymptotic], Optional[Asymptotic], Optional[Asymptotic], int) -> Optional[Asymptotic]
    qv = product((lam, 2 * (2 * n - 1)), (tau, 1))
    ratio = product((lam, 2), (mu, 1), (tau, -1))
    if qv is None or ratio is None:
        return None
    return qv.eventual_min(qv / ratio)


def extend_model(m, n):  # type: (ModelSpec, int) -> ScaleModel
    sm = ScaleModel(m, n)
    _logger.debug(u"scale n=%d: %s", n, sm.as_row())
    return sm


def check_hs_tilde(sm):  # type: (ScaleModel) -> SeriesCheck
    """||T~||^2 = sum tau_k lambda_k^(2(2n-1)) (1 + lambda_k^2 mu_k/tau_k)^-1."""
    return sm.hs_tilde


def optimal_b_scale(sm):  # type: (ScaleModel) -> DiagonalOperator
    """(AA*)^-1 A Sigma~_u A* Sigma~_v^-1, diag lambda^4n mu_k / lambda^4n tau_k.

    The lambda^4n factors are cancelled before evaluation, so the operator is
    bit-identical to optimal_b of the base model.
    """
    return optimal_b(sm.base)


def conditional_expectation_scale(sm, x):
    # type: (ScaleModel, HilbertElement) -> HilbertElement
    """Q~_v (Sigma~_u + Q~_v)^-1 x in H1^-n; E[x] = 0 there and the kernel
    block is dropped."""
    m = sm.base
    if x.truncation != m.truncation:
        raise StructuralError(u"element has %d span coefficients, model has %d"
                              % (x.truncation, m.truncation))
    if sm.hs_tilde.divergent:
        _logger.warning(u"T~ is not Hilbert-Schmidt at n=%d; the conditional "
                        u"expectation is computed at truncation N=%d only",
                        sm.scale_index, m.truncation)
    kernel = np.zeros(m.kernel_dim) if x.space == H1 else None
    return HilbertElement(x.span * conditional_multipliers(m), kernel, x.space)


def evaluate_jb_scale(A, B, x, y, n):
    # type: (SingularSystem, DiagonalOperator, HilbertElement, HilbertElement, int) -> float
    """||x - y||^2 in H1^-n plus <Ay, BAy> in H2^-n."""
    n = _check_index(n)
    check_smoothing(A, B)
    A.check(x, H1)
    A.check(y, H1)
    weights = scale_weights(A, n)
    diff = x.span - y.span
    return float(np.sum(weights * (diff ** 2 + penalty_weights(A, B) * y.span ** 2)))


def scale_report(m, n_max=DEFAULT_N_MAX):  # type: (ModelSpec, int) -> List[ScaleModel]
    """Lifted models for n = 1..n_max; choosing n is left to the caller."""
    return [extend_model(m, n) for n in range(1, _check_index(n_max) + 1)]

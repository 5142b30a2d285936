"""The Gaussian signal/noise model and its admissibility diagnostics.

    x = y + u,   A y = v,   y = y0 + A*(AA*)^-1 v

with u ~ N(0, Sigma_u) on H1 and v ~ N(0, Sigma_v) on H2 independent, both
covariances diagonal in the singular basis of A.
"""

import logging
from collections import namedtuple
from typing import Any, Dict, List, Optional, Text, Tuple

import numpy as np
from joblib import Parallel, delayed

from .errors import StructuralError
from .series import Asymptotic, SeriesCheck, check_series, product
from .spectral import (H1, H2, MAX_FLOAT, DiagonalOperator, HilbertElement,
                       SequenceFamily, SingularSystem, frozen, saturating_ratio,
                       solve_min_norm)

_logger = logging.getLogger("fhptool")

ADMISSIBILITY_CHECKS = ("trace_sigma_u", "trace_sigma_v", "trace_qv", "hilbert_schmidt_t")


class DiagonalCovariance(object):
    """Positive-definite covariance, diagonal in the singular basis.

    On H1 the kernel block carries its own variances; on H2 there is no
    kernel block.
    """

    def __init__(self, span_vars, kernel_vars=None, space=H1, family=None):
        # type: (Any, Any, Text, Optional[SequenceFamily]) -> None
        self.space = space
        self.span_vars = frozen(span_vars, "span variances")
        if space == H2:
            if kernel_vars is not None and len(kernel_vars) > 0:
                raise StructuralError(u"covariances on H2 have no kernel block")
            self.kernel_vars = frozen(np.zeros(0))
        else:
            self.kernel_vars = frozen(np.zeros(0) if kernel_vars is None else kernel_vars,
                                      "kernel variances")
        for name, values in (("span variances", self.span_vars),
                             ("kernel variances", self.kernel_vars)):
            if not np.all(np.isfinite(values)) or np.any(values <= 0):
                raise StructuralError(u"%s must be strictly positive" % name)
        self.family = family

    @classmethod
    def from_family(cls, family, truncation, kernel_vars=None, space=H1):
        # type: (SequenceFamily, int, Any, Text) -> DiagonalCovariance
        return cls(family.terms(truncation), kernel_vars, space, family)

    @property
    def truncation(self):  # type: () -> int
        return self.span_vars.size

    def asymptotic(self):  # type: () -> Optional[Asymptotic]
        return self.family.asymptotic() if self.family is not None else None

    def trace(self):  # type: () -> float
        return float(np.sum(self.kernel_vars) + np.sum(self.span_vars))

    def as_operator(self):  # type: () -> DiagonalOperator
        kernel = self.kernel_vars if self.kernel_vars.size else 0.0
        return DiagonalOperator(self.span_vars, kernel, self.space)


class ModelSpec(object):
    """A, y0, Sigma_u and Sigma_v with the dimension bookkeeping checked."""

    def __init__(self, A, sigma_u, sigma_v, y0_kernel=None):
        # type: (SingularSystem, DiagonalCovariance, DiagonalCovariance, Any) -> None
        if sigma_u.space != H1 or sigma_v.space != H2:
            raise StructuralError(u"Sigma_u must live on H1 and Sigma_v on H2")
        if sigma_u.truncation != A.truncation or sigma_v.truncation != A.truncation:
            raise StructuralError(u"covariances have %d/%d span variances, A has %d"
                                  % (sigma_u.truncation, sigma_v.truncation, A.truncation))
        if sigma_u.kernel_vars.size != A.kernel_dim:
            raise StructuralError(u"Sigma_u has %d kernel variances, kernel_dim is %d"
                                  % (sigma_u.kernel_vars.size, A.kernel_dim))
        self.A = A
        self.sigma_u = sigma_u
        self.sigma_v = sigma_v
        self.y0_kernel = frozen(np.zeros(A.kernel_dim) if y0_kernel is None else y0_kernel,
                                "y0 kernel part")
        if self.y0_kernel.size != A.kernel_dim:
            raise StructuralError(u"y0 has %d kernel coordinates, kernel_dim is %d"
                                  % (self.y0_kernel.size, A.kernel_dim))
        if not np.all(np.isfinite(self.y0_kernel)):
            raise StructuralError(u"y0 must be finite")

    @property
    def lambdas(self):  # type: () -> np.ndarray
        return self.A.lambdas

    @property
    def mu(self):  # type: () -> np.ndarray
        return self.sigma_u.span_vars

    @property
    def tau(self):  # type: () -> np.ndarray
        return self.sigma_v.span_vars

    @property
    def truncation(self):  # type: () -> int
        return self.A.truncation

    @property
    def kernel_dim(self):  # type: () -> int
        return self.A.kernel_dim

    def y0(self):  # type: () -> HilbertElement
        return HilbertElement.kernel_element(self.y0_kernel, self.truncation)

    def asymptotics(self):
        # type: () -> Tuple[Optional[Asymptotic], Optional[Asymptotic], Optional[Asymptotic]]
        """Decay classes of (lambda, mu, tau)."""
        return self.A.asymptotic(), self.sigma_u.asymptotic(), self.sigma_v.asymptotic()


class AdmissibilityReport(object):
    def __init__(self, trace_sigma_u, trace_sigma_v, trace_qv, hilbert_schmidt_t,
                 b_hat_compact=None):
        # type: (SeriesCheck, SeriesCheck, SeriesCheck, SeriesCheck, Optional[bool]) -> None
        self.trace_sigma_u = trace_sigma_u
        self.trace_sigma_v = trace_sigma_v
        self.trace_qv = trace_qv
        self.hilbert_schmidt_t = hilbert_schmidt_t
        # whether mu_k / tau_k -> 0; None when a family is explicit
        self.b_hat_compact = b_hat_compact

    def checks(self):  # type: () -> List[Tuple[Text, SeriesCheck]]
        return [(name, getattr(self, name)) for name in ADMISSIBILITY_CHECKS]

    def decisions(self):  # type: () -> Dict[Text, Text]
        return dict((name, check.decision) for name, check in self.checks())

    def any_divergent(self):  # type: () -> bool
        return any(check.divergent for _, check in self.checks())

    def as_dict(self):  # type: () -> Dict[Text, Any]
        out = dict((name, check.as_dict()) for name, check in self.checks())
        out["b_hat_compact"] = self.b_hat_compact
        return out


def compute_qv(m):  # type: (ModelSpec) -> DiagonalOperator
    """Q_v = A*(AA*)^-1 Sigma_v (AA*)^-1 A, diag tau_k / lambda_k^2.

    Entries beyond the float range, including those where lambda_k^2
    underflows to 0, are held at MAX_FLOAT.
    """
    diag, held = saturating_ratio(m.tau, m.lambdas ** 2)
    if held:
        _logger.warning(u"tau_k/lambda_k^2 exceeds the float range for %d of %d modes "
                        u"(first k=%d); Q_v is held at the largest float there",
                        held, m.truncation, int(np.flatnonzero(diag == MAX_FLOAT)[0]) + 1)
    return DiagonalOperator(diag, 0.0, H1)


def hs_summands(m):  # type: (ModelSpec) -> np.ndarray
    """||T e_k||^2 = (tau_k/lambda_k^2) (1 + lambda_k^2 mu_k/tau_k)^-1, held at
    MAX_FLOAT beyond the float range."""
    return saturating_ratio(m.tau * conditional_multipliers(m), m.lambdas ** 2)[0]


def hs_asymptotic(lam, mu, tau):
    # type: (Optional[Asymptotic], Optional[Asymptotic], Optional[Asymptotic]) -> Optional[Asymptotic]
    qv = product((tau, 1), (lam, -2))
    ratio = product((lam, 2), (mu, 1), (tau, -1))
    if qv is None or ratio is None:
        return None
    # (1 + r)^-1 behaves like min(1, 1/r)
    return qv.eventual_min(qv / ratio)


def check_hilbert_schmidt(m):  # type: (ModelSpec) -> SeriesCheck
    lam, mu, tau = m.asymptotics()
    return check_series(hs_asymptotic(lam, mu, tau), hs_summands(m))


def check_admissibility(m):  # type: (ModelSpec) -> AdmissibilityReport
    lam, mu, tau = m.asymptotics()
    sigma_u = check_series(mu, np.concatenate([m.sigma_u.kernel_vars, m.mu]))
    sigma_v = check_series(tau, m.tau)
    qv = check_series(product((tau, 1), (lam, -2)), compute_qv(m).diag)
    hs = check_series(hs_asymptotic(lam, mu, tau), hs_summands(m))
    ratio = product((mu, 1), (tau, -1))
    compact = None if ratio is None else ratio.trend() < 0
    report = AdmissibilityReport(sigma_u, sigma_v, qv, hs, compact)
    _logger.debug(u"admissibility: %s", report.decisions())
    return report


def conditional_multipliers(m):  # type: (ModelSpec) -> np.ndarray
    """(1 + lambda_k^2 mu_k / tau_k)^-1, evaluated as tau_k / (tau_k + lambda_k^2 mu_k)."""
    return m.tau / (m.tau + m.lambdas ** 2 * m.mu)


def conditional_expectation(m, x):  # type: (ModelSpec, HilbertElement) -> HilbertElement
    """E[y|x] = y0 + sum <x - y0, e_k> (1 + lambda_k^2 mu_k/tau_k)^-1 e_k."""
    m.A.check(x, H1)
    hs = check_hilbert_schmidt(m)
    if hs.divergent:
        _logger.warning(u"T is not Hilbert-Schmidt for this model; the conditional "
                        u"expectation is computed at truncation N=%d only", m.truncation)
    return HilbertElement(x.span * conditional_multipliers(m), m.y0_kernel, H1)


SAMPLE_STREAM = 0
CANDIDATE_STREAM = 1


def substream(seed, index=0, stream=SAMPLE_STREAM):
    # type: (int, int, int) -> np.random.Generator
    """Independent generator for item `index` of `stream` in a run seeded
    with `seed`; draws never depend on which other items were generated."""
    if index < 0:
        raise StructuralError(u"sample index must be nonnegative")
    seq = np.random.SeedSequence([abs(int(seed)), int(seed < 0)],
                                 spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.PCG64(seq))


def sample_pair(m, seed, index=0):
    # type: (ModelSpec, int, int) -> Tuple[HilbertElement, HilbertElement]
    """Karhunen-Loeve draw of (x, y): independent normals scaled by the
    square roots of the variances."""
    n, d0 = m.truncation, m.kernel_dim
    z = substream(seed, index).standard_normal(2 * n + d0)
    u_span = np.sqrt(m.mu) * z[:n]
    u_kernel = np.sqrt(m.sigma_u.kernel_vars) * z[n:n + d0]
    v = HilbertElement(np.sqrt(m.tau) * z[n + d0:], None, H2)
    y = solve_min_norm(m.A, v, m.y0_kernel)
    x = y + HilbertElement(u_span, u_kernel, H1)
    return x, y


SampleBatch = namedtuple("SampleBatch", ["x_kernel", "x_span", "y_kernel", "y_span"])


def sample_pairs(m, seed, count, workers=1):
    # type: (ModelSpec, int, int, int) -> SampleBatch
    """`count` pairs stacked row-wise in index order; row i is
    sample_pair(m, seed, i) whatever the number of workers."""
    pairs = Parallel(n_jobs=max(1, int(workers)), prefer="threads")(
        delayed(sample_pair)(m, seed, i) for i in range(count))

    def stack(rows, width):  # type: (List[np.ndarray], int) -> np.ndarray
        return np.array(rows, dtype=float).reshape(count, width)

    return SampleBatch(
        x_kernel=stack([x.kernel for x, _ in pairs], m.kernel_dim),
        x_span=stack([x.span for x, _ in pairs], m.truncation),
        y_kernel=stack([y.kernel for _, y in pairs], m.kernel_dim),
        y_span=stack([y.span for _, y in pairs], m.truncation))

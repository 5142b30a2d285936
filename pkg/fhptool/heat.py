"""Backward heat conduction on a wire [0, pi] with ends held at zero.

The operator mapping the temperature at time t0 to the temperature at time
tau > t0 is diagonal in the sine basis e_n(s) = sqrt(2/pi) sin(n s) with
singular values exp(-n^2 (tau - t0)). Covariances are taken diagonal in the
same basis.
"""

import logging
from typing import Any, Dict, List, Optional, Text

import numpy as np
from scipy.integrate import trapezoid

from .errors import StructuralError
from .gaussian import DiagonalCovariance, ModelSpec
from .spectral import H1, H2, HilbertElement, SequenceFamily, SingularSystem

_logger = logging.getLogger("fhptool")

DEFAULT_GRID = 2048

SMALLEST_NORMAL = np.finfo(float).tiny

# exp(-x) stays a normal float for x below this
UNDERFLOW_EXPONENT = -np.log(SMALLEST_NORMAL)


class HeatProblem(object):
    def __init__(self, tau, t0, truncation, grid=DEFAULT_GRID):
        # type: (float, float, int, int) -> None
        if not (np.isfinite(tau) and np.isfinite(t0)):
            raise StructuralError(u"tau and t0 must be finite")
        if not tau > t0:
            raise StructuralError(u"tau must exceed t0, got tau=%r t0=%r" % (tau, t0))
        if int(truncation) != truncation or truncation < 1:
            raise StructuralError(u"truncation must be a positive integer")
        if int(grid) != grid or grid < 3:
            raise StructuralError(u"grid must be an integer >= 3")
        self.tau = float(tau)
        self.t0 = float(t0)
        self.truncation = int(truncation)
        self.grid = int(grid)

    @property
    def delta(self):  # type: () -> float
        return self.tau - self.t0

    def max_modes(self):  # type: () -> int
        """Largest n whose squared singular value exp(-2 n^2 (tau - t0)) is
        still a normal float."""
        return int(np.floor(np.sqrt(UNDERFLOW_EXPONENT / (2.0 * self.delta))))

    def grid_points(self):  # type: () -> np.ndarray
        return np.linspace(0.0, np.pi, self.grid)

    def __repr__(self):  # type: () -> str
        return "HeatProblem(tau=%r, t0=%r, N=%d, grid=%d)" % (
            self.tau, self.t0, self.truncation, self.grid)


def representable_modes(p, sigma_u=None, sigma_v=None):
    # type: (HeatProblem, Optional[SequenceFamily], Optional[SequenceFamily]) -> int
    """Largest N <= p.truncation for which lambda_n^2, mu_n, tau_n and
    tau_n / lambda_n^2 are normal floats for every n <= N."""
    count = min(p.truncation, p.max_modes())
    if count < 1:
        return 0
    n = np.arange(1, count + 1, dtype=float)
    lam2 = np.exp(-2.0 * p.delta * n * n)
    ok = np.ones(count, dtype=bool)
    for family in (sigma_u, sigma_v):
        if family is not None:
            ok &= family.terms(count) >= SMALLEST_NORMAL
    if sigma_v is not None:
        with np.errstate(over="ignore"):
            ok &= np.isfinite(sigma_v.terms(count) / lam2)
    bad = np.flatnonzero(~ok)
    return int(bad[0]) if bad.size else count


def build_heat_system(p, sigma_u=None, sigma_v=None):
    # type: (HeatProblem, Optional[SequenceFamily], Optional[SequenceFamily]) -> SingularSystem
    """lambda_n = exp(-n^2 (tau - t0)); no kernel.

    The truncation is capped where lambda_n^2, or the variances of the given
    families, stop being normal floats.
    """
    family = SequenceFamily.exponential(rate=p.delta, quadratic=True)
    n = representable_modes(p, sigma_u, sigma_v)
    if n < 1:
        raise StructuralError(u"tau - t0 = %r leaves no representable mode" % p.delta)
    if n < p.truncation:
        _logger.warning(u"heat system underflows beyond n=%d; truncating at N=%d "
                        u"instead of %d", n, n, p.truncation)
    return SingularSystem.from_family(family, n, 0)


def heat_model(p, sigma_u, sigma_v):
    # type: (HeatProblem, SequenceFamily, SequenceFamily) -> ModelSpec
    A = build_heat_system(p, sigma_u, sigma_v)
    return ModelSpec(A,
                     DiagonalCovariance.from_family(sigma_u, A.truncation, None, H1),
                     DiagonalCovariance.from_family(sigma_v, A.truncation, None, H2))


def sine_basis(s, count):  # type: (Any, int) -> np.ndarray
    """len(s) x count matrix of sqrt(2/pi) sin(n s), n = 1..count."""
    points = np.asarray(s, dtype=float)
    n = np.arange(1, count + 1, dtype=float)
    return np.sqrt(2.0 / np.pi) * np.sin(np.outer(points, n))


def synthesize_grid(h, p):  # type: (HilbertElement, HeatProblem) -> np.ndarray
    """sum_n h_n e_n(s_j) on the uniform grid of p."""
    return sine_basis(p.grid_points(), h.truncation).dot(h.span)


def analyze_grid(s, values, count):  # type: (Any, Any, int) -> HilbertElement
    """<f, e_n> by composite trapezoid quadrature of the sampled profile."""
    points = np.asarray(s, dtype=float)
    samples = np.asarray(values, dtype=float)
    if points.ndim != 1 or points.shape != samples.shape or points.size < 2:
        raise StructuralError(u"grid and values must be vectors of equal length >= 2")
    if np.any(np.diff(points) <= 0):
        raise StructuralError(u"grid points must be strictly increasing")
    if points[0] < 0 or points[-1] > np.pi:
        raise StructuralError(u"grid points must lie in [0, pi]")
    basis = sine_basis(points, count)
    coeffs = trapezoid(basis * samples[:, np.newaxis], points, axis=0)
    return HilbertElement(coeffs, None, H1)


def heat_multipliers(p, sigma_u, sigma_v):
    # type: (HeatProblem, SequenceFamily, SequenceFamily) -> np.ndarray
    """(1 + (mu_n/tau_n) exp(-2 n^2 (tau - t0)))^-1, evaluated as
    tau_n / (tau_n + exp(-2 n^2 (tau - t0)) mu_n)."""
    count = representable_modes(p, sigma_u, sigma_v)
    n = np.arange(1, count + 1, dtype=float)
    mu = sigma_u.terms(count)
    tau = sigma_v.terms(count)
    return tau / (tau + np.exp(-2.0 * p.delta * n * n) * mu)


def run_heat_filter(p, sigma_u, sigma_v, x):
    # type: (HeatProblem, SequenceFamily, SequenceFamily, HilbertElement) -> HilbertElement
    multipliers = heat_multipliers(p, sigma_u, sigma_v)
    if x.truncation != multipliers.size:
        raise StructuralError(u"data has %d sine coefficients, the heat system has %d"
                              % (x.truncation, multipliers.size))
    return HilbertElement(x.span * multipliers, None, H1)


def multiplier_table(p, sigma_u, sigma_v):
    # type: (HeatProblem, SequenceFamily, SequenceFamily) -> List[Dict[Text, Any]]
    multipliers = heat_multipliers(p, sigma_u, sigma_v)
    return [{"n": n, "lambda": float(np.exp(-p.delta * n * n)), "multiplier": float(w)}
            for n, w in enumerate(multipliers, start=1)]

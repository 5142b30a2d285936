import os

import numpy as np

from fhptool.gaussian import DiagonalCovariance, ModelSpec
from fhptool.spectral import H1, H2, SequenceFamily, SingularSystem

try:
    from pkg_resources import (Requirement, ResolutionError,  # type: ignore
                               resource_filename)
except ImportError:  # pragma: no cover
    resource_filename = None  # type: ignore


def get_data(filename):
    filepath = None
    if resource_filename is not None:
        try:
            filepath = resource_filename(
                Requirement.parse("fhptool"), filename)
        except ResolutionError:
            pass
    if not filepath or not os.path.isfile(filepath):
        filepath = os.path.join(os.path.dirname(__file__), os.pardir, filename)
    return filepath


def family_model(truncation=16, kernel_dim=2, lam=2.0, mu=8.0, tau=6.0,
                 kernel_vars=None, y0=None):
    """Power-law model lambda_k = k^-lam, mu_k = k^-mu, tau_k = k^-tau."""
    A = SingularSystem.from_family(SequenceFamily.power_law(lam), truncation, kernel_dim)
    if kernel_vars is None:
        kernel_vars = np.ones(kernel_dim)
    return ModelSpec(
        A,
        DiagonalCovariance.from_family(SequenceFamily.power_law(mu), truncation,
                                       kernel_vars, H1),
        DiagonalCovariance.from_family(SequenceFamily.power_law(tau), truncation, None, H2),
        y0)


def random_model(rng, max_truncation=8, max_kernel=2):
    """A model with explicit random positive spectra."""
    n = int(rng.integers(1, max_truncation + 1))
    d0 = int(rng.integers(0, max_kernel + 1))
    lambdas = np.sort(rng.uniform(0.1, 2.0, n))[::-1]
    A = SingularSystem(lambdas, d0)
    return ModelSpec(
        A,
        DiagonalCovariance(rng.uniform(0.1, 2.0, n), rng.uniform(0.1, 2.0, d0), H1),
        DiagonalCovariance(rng.uniform(0.1, 2.0, n), None, H2),
        rng.normal(size=d0))

"""Singular-system representation of a compact operator A: H1 -> H2.

Everything in the package is diagonal in the singular basis (e_k) of H1 and
(d_k) of H2, so elements are stored as coefficient vectors on the first N
singular directions, plus a finite block of coordinates for Ker(A) on the H1
side. (Ran A)^perp in H2 is not modelled: H2 elements carry no kernel block.

All objects are immutable after construction; their arrays are read-only.
"""

import logging
from typing import Any, Dict, Optional, Sequence, Text, Tuple, Union

import numpy as np

from .errors import StructuralError
from .series import Asymptotic

_logger = logging.getLogger("fhptool")

H1 = "H1"
H2 = "H2"
SPACES = (H1, H2)

POWER_LAW = "power_law"
EXPONENTIAL = "exponential"
CONSTANT = "constant"
EXPLICIT = "explicit"
FAMILY_KINDS = (POWER_LAW, EXPONENTIAL, CONSTANT, EXPLICIT)

MAX_FLOAT = float(np.finfo(float).max)


def frozen(values, name="values"):  # type: (Any, Text) -> np.ndarray
    arr = np.array(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise StructuralError(u"%s must be a vector, got shape %s" % (name, arr.shape))
    arr.setflags(write=False)
    return arr


def saturating_ratio(numerator, denominator):  # type: (Any, Any) -> Tuple[np.ndarray, int]
    """numerator / denominator for nonnegative numerators and denominators,
    with entries beyond the float range held at MAX_FLOAT. Also returns how
    many entries were held."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ratio = np.asarray(numerator, dtype=float) / np.asarray(denominator, dtype=float)
    held = ~np.isfinite(ratio)
    return np.where(held, MAX_FLOAT, ratio), int(np.count_nonzero(held))


class SequenceFamily(object):
    """Positive nonincreasing sequence used for singular values and variances.

    power_law:    scale * k^-exponent
    exponential:  scale * exp(-rate * k), or scale * exp(-rate * k^2) when
                  quadratic is set
    constant:     scale (white noise)
    explicit:     a finite list of values
    """

    def __init__(self, kind, scale=1.0, exponent=None, rate=None,
                 quadratic=False, values=None):
        # type: (Text, float, float, float, bool, Sequence[float]) -> None
        if kind not in FAMILY_KINDS:
            raise StructuralError(u"kind must be one of %s, got '%s'"
                                  % (", ".join(FAMILY_KINDS), kind))
        if not scale > 0 or not np.isfinite(scale):
            raise StructuralError(u"%s must be > 0" % ("value" if kind == CONSTANT else "scale"))
        self.kind = kind
        self.scale = float(scale)
        self.exponent = None  # type: Optional[float]
        self.rate = None  # type: Optional[float]
        self.quadratic = bool(quadratic)
        self.values = None  # type: Optional[np.ndarray]

        if kind == POWER_LAW:
            if exponent is None or not exponent > 0 or not np.isfinite(exponent):
                raise StructuralError(u"exponent must be > 0")
            self.exponent = float(exponent)
        elif kind == EXPONENTIAL:
            if rate is None or not rate > 0 or not np.isfinite(rate):
                raise StructuralError(u"rate must be > 0")
            self.rate = float(rate)
        elif kind == EXPLICIT:
            if values is None or len(values) == 0:
                raise StructuralError(u"values must be a nonempty list")
            vals = frozen(values, "values")
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                raise StructuralError(u"values must be strictly positive")
            if np.any(np.diff(vals) > 0):
                raise StructuralError(u"values must be nonincreasing")
            self.values = vals

    @classmethod
    def power_law(cls, exponent, scale=1.0):  # type: (float, float) -> SequenceFamily
        return cls(POWER_LAW, scale=scale, exponent=exponent)

    @classmethod
    def exponential(cls, rate, quadratic=False, scale=1.0):
        # type: (float, bool, float) -> SequenceFamily
        return cls(EXPONENTIAL, scale=scale, rate=rate, quadratic=quadratic)

    @classmethod
    def constant(cls, value):  # type: (float) -> SequenceFamily
        return cls(CONSTANT, scale=value)

    @classmethod
    def explicit(cls, values):  # type: (Sequence[float]) -> SequenceFamily
        return cls(EXPLICIT, values=values)

    def terms(self, count):  # type: (int) -> np.ndarray
        """The first `count` terms, k = 1..count."""
        if count < 0:
            raise StructuralError(u"term count must be nonnegative")
        k = np.arange(1, count + 1, dtype=float)
        if self.kind == POWER_LAW:
            out = self.scale * k ** -self.exponent
        elif self.kind == EXPONENTIAL:
            out = self.scale * np.exp(-self.rate * (k * k if self.quadratic else k))
        elif self.kind == CONSTANT:
            out = np.full(count, self.scale)
        else:
            if count > self.values.size:
                raise StructuralError(
                    u"explicit family has %d values, %d requested"
                    % (self.values.size, count))
            out = np.array(self.values[:count])
        return frozen(out)

    def asymptotic(self):  # type: () -> Optional[Asymptotic]
        """Decay class of the family; None for explicit data."""
        if self.kind == POWER_LAW:
            return Asymptotic(power=self.exponent)
        if self.kind == EXPONENTIAL:
            if self.quadratic:
                return Asymptotic(quadratic=self.rate)
            return Asymptotic(linear=self.rate)
        if self.kind == CONSTANT:
            return Asymptotic()
        return None

    def as_dict(self):  # type: () -> Dict[Text, Any]
        if self.kind == POWER_LAW:
            return {"kind": self.kind, "exponent": self.exponent, "scale": self.scale}
        if self.kind == EXPONENTIAL:
            return {"kind": self.kind, "rate": self.rate,
                    "quadratic": self.quadratic, "scale": self.scale}
        if self.kind == CONSTANT:
            return {"kind": self.kind, "value": self.scale}
        return {"kind": self.kind, "values": [float(v) for v in self.values]}

    def __eq__(self, other):  # type: (Any) -> bool
        return isinstance(other, SequenceFamily) and self.as_dict() == other.as_dict()

    def __ne__(self, other):  # type: (Any) -> bool
        return not self == other

    __hash__ = None  # type: ignore

    def __repr__(self):  # type: () -> str
        return "SequenceFamily(%r)" % self.as_dict()


class SingularSystem(object):
    """Truncated singular system (lambda_k, e_k, d_k), k = 1..N, of A plus a
    kernel block of dimension kernel_dim."""

    def __init__(self, singular_values, kernel_dim=0, family=None):
        # type: (Any, int, SequenceFamily) -> None
        lambdas = frozen(singular_values, "singular values")
        if lambdas.size == 0:
            raise StructuralError(u"truncation must be a positive integer")
        if not np.all(np.isfinite(lambdas)) or np.any(lambdas <= 0):
            raise StructuralError(u"singular values must be strictly positive")
        if np.any(np.diff(lambdas) > 0):
            raise StructuralError(u"singular values must be nonincreasing")
        if int(kernel_dim) != kernel_dim or kernel_dim < 0:
            raise StructuralError(u"kernel_dim must be a nonnegative integer")
        self.lambdas = lambdas
        self.kernel_dim = int(kernel_dim)
        self.family = family

    @classmethod
    def from_family(cls, family, truncation, kernel_dim=0):
        # type: (SequenceFamily, int, int) -> SingularSystem
        if int(truncation) != truncation or truncation < 1:
            raise StructuralError(u"truncation must be a positive integer")
        return cls(family.terms(int(truncation)), kernel_dim, family)

    @property
    def truncation(self):  # type: () -> int
        return self.lambdas.size

    def asymptotic(self):  # type: () -> Optional[Asymptotic]
        return self.family.asymptotic() if self.family is not None else None

    def check(self, h, space):  # type: (HilbertElement, Text) -> None
        if h.space != space:
            raise StructuralError(u"expected an element of %s, got %s" % (space, h.space))
        if h.truncation != self.truncation:
            raise StructuralError(u"element has %d span coefficients, system has %d"
                                  % (h.truncation, self.truncation))
        if space == H1 and h.kernel_dim != self.kernel_dim:
            raise StructuralError(u"element has kernel dimension %d, system has %d"
                                  % (h.kernel_dim, self.kernel_dim))

    def zeros(self, space=H1):  # type: (Text) -> HilbertElement
        return HilbertElement.zeros(self.truncation,
                                    self.kernel_dim if space == H1 else 0, space)

    def __repr__(self):  # type: () -> str
        return "SingularSystem(N=%d, kernel_dim=%d)" % (self.truncation, self.kernel_dim)


class HilbertElement(object):
    """Element of H1 (kernel block + span coefficients <h, e_k>) or of H2
    (span coefficients <h, d_k> only)."""

    def __init__(self, span_coeffs, kernel_part=None, space=H1):
        # type: (Any, Any, Text) -> None
        if space not in SPACES:
            raise StructuralError(u"space must be one of %s" % ", ".join(SPACES))
        self.space = space
        self.span = frozen(span_coeffs, "span coefficients")
        if space == H2:
            if kernel_part is not None and np.any(np.asarray(kernel_part, dtype=float) != 0):
                raise StructuralError(u"H2 elements have no component in (Ran A)^perp")
            self.kernel = frozen(np.zeros(0))
        else:
            self.kernel = frozen(np.zeros(0) if kernel_part is None else kernel_part,
                                 "kernel part")

    @classmethod
    def zeros(cls, truncation, kernel_dim=0, space=H1):
        # type: (int, int, Text) -> HilbertElement
        return cls(np.zeros(truncation), np.zeros(kernel_dim) if space == H1 else None, space)

    @classmethod
    def basis(cls, k, truncation, kernel_dim=0, space=H1):
        # type: (int, int, int, Text) -> HilbertElement
        """The singular basis vector e_k (or d_k in H2), 1-based."""
        if not 1 <= k <= truncation:
            raise StructuralError(u"basis index %d out of range 1..%d" % (k, truncation))
        span = np.zeros(truncation)
        span[k - 1] = 1.0
        return cls(span, np.zeros(kernel_dim) if space == H1 else None, space)

    @classmethod
    def kernel_element(cls, kernel_part, truncation):
        # type: (Any, int) -> HilbertElement
        return cls(np.zeros(truncation), kernel_part, H1)

    @classmethod
    def from_vector(cls, vector, kernel_dim=0, space=H1):
        # type: (Any, int, Text) -> HilbertElement
        """Inverse of as_vector: kernel coordinates first, then span."""
        vec = np.asarray(vector, dtype=float)
        return cls(vec[kernel_dim:], vec[:kernel_dim] if space == H1 else None, space)

    @property
    def truncation(self):  # type: () -> int
        return self.span.size

    @property
    def kernel_dim(self):  # type: () -> int
        return self.kernel.size

    def as_vector(self):  # type: () -> np.ndarray
        return np.concatenate([self.kernel, self.span])

    def norm(self):  # type: () -> float
        return float(np.sqrt(inner(self, self)))

    def check_compatible(self, other):  # type: (HilbertElement) -> None
        if not isinstance(other, HilbertElement):
            raise StructuralError(u"expected a HilbertElement, got %r" % (other,))
        if self.space != other.space:
            raise StructuralError(u"space mismatch: %s vs %s" % (self.space, other.space))
        if self.truncation != other.truncation or self.kernel_dim != other.kernel_dim:
            raise StructuralError(u"dimension mismatch: (%d, %d) vs (%d, %d)" % (
                self.kernel_dim, self.truncation, other.kernel_dim, other.truncation))

    def __add__(self, other):  # type: (HilbertElement) -> HilbertElement
        self.check_compatible(other)
        return HilbertElement(self.span + other.span, self.kernel + other.kernel, self.space)

    def __sub__(self, other):  # type: (HilbertElement) -> HilbertElement
        self.check_compatible(other)
        return HilbertElement(self.span - other.span, self.kernel - other.kernel, self.space)

    def __neg__(self):  # type: () -> HilbertElement
        return HilbertElement(-self.span, -self.kernel, self.space)

    def __mul__(self, factor):  # type: (float) -> HilbertElement
        return HilbertElement(factor * self.span, factor * self.kernel, self.space)

    __rmul__ = __mul__

    def __eq__(self, other):  # type: (Any) -> bool
        return (isinstance(other, HilbertElement) and
                self.space == other.space and
                np.array_equal(self.span, other.span) and
                np.array_equal(self.kernel, other.kernel))

    def __ne__(self, other):  # type: (Any) -> bool
        return not self == other

    __hash__ = None  # type: ignore

    def __repr__(self):  # type: () -> str
        return "HilbertElement(%s, kernel=%s, span=%s)" % (
            self.space, self.kernel.tolist(), self.span.tolist())


class DiagonalOperator(object):
    """Bounded operator diagonal in the singular basis.

    `diag[k]` acts on e_k (H1) or d_k (H2). On the kernel block of H1 the
    operator acts as `kernel_action`, either a scalar multiple of the identity
    or a vector of per-coordinate factors.
    """

    def __init__(self, diag, kernel_action=0.0, space=H1):
        # type: (Any, Union[float, Sequence[float]], Text) -> None
        if space not in SPACES:
            raise StructuralError(u"space must be one of %s" % ", ".join(SPACES))
        self.space = space
        self.diag = frozen(diag, "diagonal")
        if not np.all(np.isfinite(self.diag)):
            raise StructuralError(u"diagonal entries must be finite")
        if np.ndim(kernel_action) == 0:
            self.kernel_action = float(kernel_action)  # type: Union[float, np.ndarray]
        else:
            self.kernel_action = frozen(kernel_action, "kernel action")
        if np.any(np.asarray(self.kernel_action) < 0) or \
                not np.all(np.isfinite(self.kernel_action)):
            raise StructuralError(u"kernel action must be finite and >= 0")

    @classmethod
    def identity(cls, truncation, space=H1):  # type: (int, Text) -> DiagonalOperator
        return cls(np.ones(truncation), 1.0 if space == H1 else 0.0, space)

    @property
    def truncation(self):  # type: () -> int
        return self.diag.size

    def norm(self):  # type: () -> float
        """Operator norm."""
        kernel = np.abs(np.atleast_1d(self.kernel_action)) if self.space == H1 else np.zeros(0)
        return float(max(np.max(np.abs(self.diag), initial=0.0),
                         np.max(kernel, initial=0.0)))

    def is_psd(self):  # type: () -> bool
        return bool(np.all(self.diag >= 0))

    def apply(self, h):  # type: (HilbertElement) -> HilbertElement
        if h.space != self.space:
            raise StructuralError(u"operator on %s applied to element of %s" % (self.space, h.space))
        if h.truncation != self.truncation:
            raise StructuralError(u"operator has %d diagonal entries, element has %d"
                                  % (self.truncation, h.truncation))
        kernel = None
        if self.space == H1:
            action = self.kernel_action
            if isinstance(action, np.ndarray) and action.size != h.kernel_dim:
                raise StructuralError(u"kernel action has %d entries, element has %d"
                                      % (action.size, h.kernel_dim))
            kernel = action * h.kernel
        return HilbertElement(self.diag * h.span, kernel, self.space)

    def compose(self, other):  # type: (DiagonalOperator) -> DiagonalOperator
        """self after other."""
        if other.space != self.space or other.truncation != self.truncation:
            raise StructuralError(u"cannot compose operators on different spaces")
        return DiagonalOperator(self.diag * other.diag,
                                np.asarray(self.kernel_action) * np.asarray(other.kernel_action)
                                if isinstance(self.kernel_action, np.ndarray) or
                                isinstance(other.kernel_action, np.ndarray)
                                else self.kernel_action * other.kernel_action,
                                self.space)

    def scaled(self, factor):  # type: (float) -> DiagonalOperator
        return DiagonalOperator(factor * self.diag,
                                np.asarray(self.kernel_action) * factor
                                if isinstance(self.kernel_action, np.ndarray)
                                else self.kernel_action * factor,
                                self.space)

    def trace(self):  # type: () -> float
        return float(np.sum(self.diag) + np.sum(self.kernel_action)
                     if isinstance(self.kernel_action, np.ndarray)
                     else np.sum(self.diag))

    def fraction(self):  # type: () -> Tuple[np.ndarray, np.ndarray]
        """(numerator, denominator) arrays whose quotient is diag."""
        return self.diag, np.ones_like(self.diag)

    def __eq__(self, other):  # type: (Any) -> bool
        return (isinstance(other, DiagonalOperator) and
                self.space == other.space and
                np.array_equal(self.diag, other.diag) and
                np.array_equal(np.asarray(self.kernel_action), np.asarray(other.kernel_action)))

    def __ne__(self, other):  # type: (Any) -> bool
        return not self == other

    __hash__ = None  # type: ignore

    def __repr__(self):  # type: () -> str
        return "DiagonalOperator(%s, diag=%s, kernel_action=%s)" % (
            self.space, self.diag.tolist(), np.asarray(self.kernel_action).tolist())


class QuotientOperator(DiagonalOperator):
    """Diagonal operator with entries numerator_k / denominator_k.

    The pair is kept alongside `diag`, so quotients beyond the float range
    (where `diag` holds MAX_FLOAT) stay exact inside `fraction()`. The
    kernel block, if any, is annihilated.
    """

    def __init__(self, numerator, denominator, space=H2):
        # type: (Any, Any, Text) -> None
        num = frozen(numerator, "numerator")
        den = frozen(denominator, "denominator")
        if num.shape != den.shape:
            raise StructuralError(u"numerator has %d entries, denominator has %d"
                                  % (num.size, den.size))
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise StructuralError(u"numerator and denominator must be finite")
        if np.any(num < 0) or np.any(den <= 0):
            raise StructuralError(u"numerator must be >= 0 and denominator > 0")
        diag, self.held = saturating_ratio(num, den)
        super(QuotientOperator, self).__init__(diag, 0.0, space)
        self.numerator = num
        self.denominator = den

    def fraction(self):  # type: () -> Tuple[np.ndarray, np.ndarray]
        return self.numerator, self.denominator

    def scaled(self, factor):  # type: (Any) -> DiagonalOperator
        """Entries multiplied by `factor`, a scalar or one factor per entry."""
        return QuotientOperator(np.asarray(factor) * self.numerator, self.denominator,
                                self.space)


def apply_forward(A, h):  # type: (SingularSystem, HilbertElement) -> HilbertElement
    """A h = sum lambda_k <h, e_k> d_k; Ker(A) is annihilated."""
    A.check(h, H1)
    return HilbertElement(A.lambdas * h.span, None, H2)


def apply_adjoint(A, g):  # type: (SingularSystem, HilbertElement) -> HilbertElement
    """A* g = sum lambda_k <g, d_k> e_k."""
    A.check(g, H2)
    return HilbertElement(A.lambdas * g.span, np.zeros(A.kernel_dim), H1)


def solve_min_norm(A, v, y0_kernel):
    # type: (SingularSystem, HilbertElement, Any) -> HilbertElement
    """y = y0 + A*(AA*)^-1 v, the solutions of A y = v."""
    A.check(v, H2)
    y0 = frozen(np.zeros(0) if y0_kernel is None else y0_kernel, "y0 kernel part")
    if y0.size != A.kernel_dim:
        raise StructuralError(u"y0 has %d kernel coordinates, system has %d"
                              % (y0.size, A.kernel_dim))
    return HilbertElement(v.span / A.lambdas, y0, H1)


def project_pi(A, h):  # type: (SingularSystem, HilbertElement) -> HilbertElement
    """Pi = A*(AA*)^-1 A, the orthogonal projector onto Ker(A)^perp."""
    A.check(h, H1)
    return HilbertElement(h.span, np.zeros(A.kernel_dim), H1)


def project_kernel(A, h):  # type: (SingularSystem, HilbertElement) -> HilbertElement
    """(I - Pi) h."""
    A.check(h, H1)
    return HilbertElement(np.zeros(A.truncation), h.kernel, H1)


def inner(h1, h2):  # type: (HilbertElement, HilbertElement) -> float
    h1.check_compatible(h2)
    return float(np.dot(h1.kernel, h2.kernel) + np.dot(h1.span, h2.span))

"""Analytic convergence decisions for series built from sequence families.

Every parametric family of the package decays like

    c * k^-p * exp(-(a*k + b*k^2))

and products, powers and quotients of such sequences stay in that class.
Convergence of the series of a class member is decided from (p, a, b) alone,
with exact rational arithmetic so that cancellations such as tau/lambda^2 with
tau = lambda^2 are recognised exactly. A partial sum can never prove anything,
so partial sums are only reported next to the decision.
"""

from fractions import Fraction
from typing import Any, Dict, Iterable, Optional, Text, Tuple

import numpy as np

PROVEN_CONVERGENT = "ProvenConvergent"
PROVEN_DIVERGENT = "ProvenDivergent"
UNKNOWN_EXPLICIT = "UnknownExplicitFamily"

DECISIONS = (PROVEN_CONVERGENT, PROVEN_DIVERGENT, UNKNOWN_EXPLICIT)


class Asymptotic(object):
    """Asymptotic class k^-power * exp(-(linear*k + quadratic*k^2))."""

    __slots__ = ("power", "linear", "quadratic")

    def __init__(self, power=0, linear=0, quadratic=0):
        # type: (Any, Any, Any) -> None
        self.power = Fraction(power)
        self.linear = Fraction(linear)
        self.quadratic = Fraction(quadratic)

    def __mul__(self, other):  # type: (Asymptotic) -> Asymptotic
        return Asymptotic(self.power + other.power,
                          self.linear + other.linear,
                          self.quadratic + other.quadratic)

    def __pow__(self, exponent):  # type: (Any) -> Asymptotic
        e = Fraction(exponent)
        return Asymptotic(self.power * e, self.linear * e, self.quadratic * e)

    def __truediv__(self, other):  # type: (Asymptotic) -> Asymptotic
        return self * other ** -1

    def __eq__(self, other):  # type: (Any) -> bool
        return (isinstance(other, Asymptotic) and
                (self.power, self.linear, self.quadratic) ==
                (other.power, other.linear, other.quadratic))

    def __ne__(self, other):  # type: (Any) -> bool
        return not self == other

    def __hash__(self):  # type: () -> int
        return hash((self.power, self.linear, self.quadratic))

    def __repr__(self):  # type: () -> str
        return "Asymptotic(power=%s, linear=%s, quadratic=%s)" % (
            self.power, self.linear, self.quadratic)

    def trend(self):  # type: () -> int
        """-1 if the sequence tends to 0, +1 if it diverges, 0 if it is
        asymptotically constant."""
        for coefficient in (self.quadratic, self.linear, self.power):
            if coefficient != 0:
                return -1 if coefficient > 0 else 1
        return 0

    def summable(self):  # type: () -> bool
        if self.quadratic != 0:
            return self.quadratic > 0
        if self.linear != 0:
            return self.linear > 0
        return self.power > 1

    def eventual_min(self, other):  # type: (Asymptotic) -> Asymptotic
        """The class of min(self, other) for large k."""
        if (self / other).trend() <= 0:
            return self
        return other


def product(*factors):
    # type: (*Tuple[Optional[Asymptotic], Any]) -> Optional[Asymptotic]
    """Multiply (class, exponent) pairs; None (explicit data) is absorbing."""
    result = Asymptotic()
    for asym, exponent in factors:
        if asym is None:
            return None
        result = result * asym ** exponent
    return result


def decide(asym):  # type: (Optional[Asymptotic]) -> Text
    if asym is None:
        return UNKNOWN_EXPLICIT
    return PROVEN_CONVERGENT if asym.summable() else PROVEN_DIVERGENT


class SeriesCheck(object):
    """A convergence decision together with the partial sum at truncation.

    `last_term` is the summand at the truncation index, a rough indication of
    the tail the truncation drops.
    """

    def __init__(self, decision, partial_sum, terms=0, last_term=0.0):
        # type: (Text, float, int, float) -> None
        if decision not in DECISIONS:
            raise ValueError(u"Unknown decision %s" % decision)
        self.decision = decision
        self.partial_sum = partial_sum
        self.terms = terms
        self.last_term = last_term

    @property
    def convergent(self):  # type: () -> bool
        return self.decision == PROVEN_CONVERGENT

    @property
    def divergent(self):  # type: () -> bool
        return self.decision == PROVEN_DIVERGENT

    def as_dict(self):  # type: () -> Dict[Text, Any]
        return {"decision": self.decision,
                "partial_sum": self.partial_sum,
                "terms": self.terms,
                "last_term": self.last_term}

    def __repr__(self):  # type: () -> str
        return "SeriesCheck(%s, partial_sum=%r, terms=%d)" % (
            self.decision, self.partial_sum, self.terms)


def check_series(asym, summands):
    # type: (Optional[Asymptotic], Iterable[float]) -> SeriesCheck
    values = np.asarray(list(summands) if not isinstance(summands, np.ndarray)
                        else summands, dtype=float)
    last = float(values[-1]) if values.size else 0.0
    with np.errstate(over="ignore"):
        partial = float(np.sum(values))
    return SeriesCheck(decide(asym), partial, int(values.size), last)

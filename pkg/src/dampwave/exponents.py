"""Critical exponents, regime classification and lifespan predictions.

Everything here is closed form.  The only theorem-backed lifespan table is
the two dimensional one with damping coefficient ``mu = 2``; the general
tables are available behind ``extended=True`` and are flagged conjectural.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

__all__ = [
    "ModelParams",
    "Regime",
    "DataClass",
    "LifespanForm",
    "LifespanPrediction",
    "fujita_exponent",
    "gamma",
    "strauss_exponent",
    "mu_zero",
    "classify_regime",
    "predicted_lifespan",
]


class Regime(enum.Enum):
    HEAT_LIKE = "HeatLike"
    INTERMEDIATE = "Intermediate"
    WAVE_LIKE = "WaveLike"


class DataClass(enum.Enum):
    NONZERO_INTEGRAL = "NonzeroIntegral"
    ZERO_INTEGRAL = "ZeroIntegral"


class LifespanForm(enum.Enum):
    POWER_LAW = "PowerLaw"
    EXP_POWER_LAW = "ExpPowerLaw"


@dataclass(frozen=True)
class ModelParams:
    """Parameters ``(n, mu, p, k, epsilon)`` of the damped problem."""

    n: int = 2
    mu: float = 2.0
    p: float = 2.0
    k: float = 1.0
    epsilon: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.k >= 1:
            raise ValueError(f"support radius k must be >= 1, got {self.k}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    def with_epsilon(self, epsilon: float) -> "ModelParams":
        return ModelParams(self.n, self.mu, self.p, self.k, epsilon)


@dataclass(frozen=True)
class LifespanPrediction:
    """Predicted lifespan law.

    ``exponent`` is the power of epsilon for a power law (negative) and the
    power ``theta`` in ``exp(c * eps**-theta)`` for an exponential law.
    """

    form: LifespanForm
    exponent: float
    data_class: DataClass
    theorem_backed: bool = True

    def __post_init__(self):
        if self.form is LifespanForm.POWER_LAW and not self.exponent < 0:
            raise ValueError("power-law lifespan exponent must be negative")
        if self.form is LifespanForm.EXP_POWER_LAW and not self.exponent > 0:
            raise ValueError("exp-law theta must be positive")


def _as_fraction(x) -> Fraction:
    """Exact rational for ``x``; floats snap to a nearby small-denominator
    rational (so ``2.8 -> 14/5`` and ``5/3 -> 5/3``)."""
    if isinstance(x, (Rational, str)):
        return Fraction(x)
    x = float(x)
    exact = Fraction(x)
    near = exact.limit_denominator(1000)
    if abs(float(near) - x) <= 1e-12 * max(1.0, abs(x)):
        return near
    return exact


def fujita_exponent(n: int) -> float:
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    return 1.0 + 2.0 / n


def gamma(p: float, d: float) -> float:
    """``2 + (d+1) p - (d-1) p**2``; its positive root is the Strauss exponent."""
    return 2.0 + (d + 1.0) * p - (d - 1.0) * p * p


def strauss_exponent(d: float) -> float:
    """Positive root of ``gamma(., d)``; ``inf`` at ``d == 1``."""
    if d < 1:
        raise ValueError(f"Strauss exponent needs d >= 1, got {d}")
    if d - 1.0 <= 1e-14:
        return math.inf
    return (d + 1.0 + math.sqrt(d * d + 10.0 * d - 7.0)) / (2.0 * (d - 1.0))


def mu_zero(n: int) -> float:
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    return (n * n + n + 2) / (n + 2)


def classify_regime(n: int, mu) -> Regime:
    """Compare ``mu`` with ``mu_zero(n)`` exactly, in rationals."""
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    m = _as_fraction(mu)
    if m <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    threshold = Fraction(n * n + n + 2, n + 2)
    if m > threshold:
        return Regime.HEAT_LIKE
    if m == threshold:
        return Regime.INTERMEDIATE
    return Regime.WAVE_LIKE


def predicted_lifespan(params: ModelParams, data_class: DataClass,
                       extended: bool = False) -> LifespanPrediction:
    """Lifespan law for ``params`` and the integral class of the data.

    Without ``extended`` only ``n = 2, mu = 2, 1 < p <= 2`` is accepted.
    With ``extended`` the conjectural heat-like and wave-like tables are used
    for other ``(n, mu)``; the result has ``theorem_backed = False``.
    """
    data_class = DataClass(data_class)
    n, mu, p = params.n, params.mu, params.p
    if n == 2 and _as_fraction(mu) == 2:
        if not 1 < p <= 2:
            raise ValueError(f"lifespan table for n=2, mu=2 needs 1 < p <= 2, got {p}")
        critical = _as_fraction(p) == 2
        if data_class is DataClass.NONZERO_INTEGRAL:
            if critical:
                return LifespanPrediction(LifespanForm.EXP_POWER_LAW, 0.5, data_class)
            return LifespanPrediction(LifespanForm.POWER_LAW,
                                      -(p - 1.0) / (4.0 - 2.0 * p), data_class)
        if critical:
            return LifespanPrediction(LifespanForm.EXP_POWER_LAW, 2.0 / 3.0, data_class)
        return LifespanPrediction(LifespanForm.POWER_LAW,
                                  -2.0 * p * (p - 1.0) / gamma(p, 4.0), data_class)

    if not extended:
        raise ValueError("theorem-backed lifespan table covers only n=2, mu=2; "
                         "pass extended=True for the conjectural tables")
    regime = classify_regime(n, mu)
    if regime is Regime.HEAT_LIKE:
        pf = fujita_exponent(n)
        if p < pf:
            return LifespanPrediction(LifespanForm.POWER_LAW,
                                      -(p - 1.0) / (2.0 - n * (p - 1.0)),
                                      data_class, theorem_backed=False)
        if math.isclose(p, pf, rel_tol=0, abs_tol=1e-12):
            return LifespanPrediction(LifespanForm.EXP_POWER_LAW, p - 1.0,
                                      data_class, theorem_backed=False)
        raise ValueError(f"p={p} is above the Fujita exponent {pf}: global existence expected")
    ps = strauss_exponent(n + mu)
    if p < ps:
        return LifespanPrediction(LifespanForm.POWER_LAW,
                                  -2.0 * p * (p - 1.0) / gamma(p, n + mu),
                                  data_class, theorem_backed=False)
    if math.isclose(p, ps, rel_tol=1e-12):
        return LifespanPrediction(LifespanForm.EXP_POWER_LAW, p * (p - 1.0),
                                  data_class, theorem_backed=False)
    raise ValueError(f"p={p} is above the Strauss exponent {ps}: global existence expected")

"""Averaged functionals, the Kato-type ODE and the slicing recursions.

``F(t) = int u dx`` satisfies ``F'' = (1+t)^{1-p} int |u|^p dx`` for the
u-form, and Hoelder on the cone turns this into ``F'' >= B (t+k)^{-q} |F|^p``.
The blow-up time of the comparison ODE and the double-exponential growth of
the slicing sequences are what drive the lifespan bounds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .duhamel import SpaceTimeField

__all__ = [
    "compute_F",
    "bessel_i0",
    "phi1",
    "compute_F1",
    "KatoParams",
    "KatoQuantities",
    "kato_quantities",
    "OdeStatus",
    "OdeBlowup",
    "ode_blowup_time",
    "SlicingVariant",
    "SlicingState",
    "SlicingResult",
    "slicing_q_limit",
    "slicing_iterate",
    "critical_lifespan_bound",
]


# --------------------------------------------------------------------------
# functionals on solver output


def _radial_trapezoid(values, r):
    return 2.0 * math.pi * np.trapezoid(values * r, r, axis=-1)


def compute_F(field: SpaceTimeField, p: float):
    """``F(t_n) = int u dx`` and ``G(t_n) = (1+t_n)^{1-p} int |u|^p dx``."""
    r, t = field.r, field.t
    F = _radial_trapezoid(field.values, r)
    G = _radial_trapezoid(np.abs(field.values) ** p, r) / (1.0 + t) ** (p - 1.0)
    return F, G


def bessel_i0(x, rtol: float = 1e-14):
    """``I_0`` by its power series ``sum (x^2/4)^m / (m!)^2``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 500):
        raise ValueError("I0 series is only used for |x| <= 500")
    z = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    m = 0
    while True:
        m += 1
        term = term * z / (m * m)
        total = total + term
        if np.all(term <= rtol * total):
            return total


def phi1(r):
    """``int_{S^1} exp(x . omega) d omega = 2 pi I_0(|x|)``."""
    return 2.0 * math.pi * bessel_i0(r)


def compute_F1(field: SpaceTimeField):
    """``F1(t) = e^{-t} int u phi1 dx``."""
    r, t = field.r, field.t
    return np.exp(-t) * _radial_trapezoid(field.values * phi1(r), r)


# --------------------------------------------------------------------------
# Kato lemma


@dataclass(frozen=True)
class KatoParams:
    """Constants of ``F >= A t^a`` (``t >= T0``), ``F'' >= B (t+k)^{-q} |F|^p``."""

    p: float
    a: float
    q: float
    B: float = 1.0
    A: float = 1.0
    T0: float = 1.0
    k: float = 1.0

    @property
    def M(self) -> float:
        return 0.5 * (self.p - 1.0) * self.a - 0.5 * self.q + 1.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if not self.M > 1e-14:
            raise ValueError(f"Kato condition M > 0 fails (M = {self.M})")


@dataclass(frozen=True)
class KatoQuantities:
    M: float
    prefactor: float            # 2^{2/M}
    amplitude_exponent: float   # T1 scales like A^{-(p-1)/(2M)}
    T1: float

    def lifespan_bound(self) -> float:
        return self.prefactor * self.T1


def kato_quantities(kp: KatoParams, F0: float = 0.0, F0prime: float = 1.0,
                    t0: float | None = None) -> KatoQuantities:
    """``M`` and the bound ``T < 2^{2/M} T1``.

    ``T1 = max(T0, F(0)/F'(0), k)``; when ``t0`` is given (data with
    ``F'(0) = 0`` and ``F(t0) >= 2 F(0)``) it is ``max(T0, t0, k)`` instead.
    """
    M = kp.M
    if t0 is not None:
        T1 = max(kp.T0, t0, kp.k)
    else:
        if not F0prime > 0:
            raise ValueError("F'(0) must be positive (or pass t0)")
        T1 = max(kp.T0, F0 / F0prime, kp.k)
    return KatoQuantities(M, 2.0 ** (2.0 / M), -(kp.p - 1.0) / (2.0 * M), T1)


# --------------------------------------------------------------------------
# comparison ODE


class OdeStatus(enum.Enum):
    BLEW_UP = "BlewUp"
    SURVIVED = "SurvivedHorizon"


@dataclass(frozen=True)
class OdeBlowup:
    time: float
    status: OdeStatus
    time_half: float
    rel_diff: float

    @property
    def consistent(self) -> bool:
        return self.status is OdeStatus.SURVIVED or self.rel_diff < 0.01


def _rk4(t, F, dF, h, p, q, B, k):
    def acc(tt, x):
        return B * (tt + k) ** (-q) * abs(x) ** p

    k1f, k1v = dF, acc(t, F)
    k2f, k2v = dF + 0.5 * h * k1v, acc(t + 0.5 * h, F + 0.5 * h * k1f)
    k3f, k3v = dF + 0.5 * h * k2v, acc(t + 0.5 * h, F + 0.5 * h * k2f)
    k4f, k4v = dF + h * k3v, acc(t + h, F + h * k3f)
    return (F + h / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f),
            dF + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v))


def _integrate_ode(p, q, B, k, F0, F1, eta, threshold, t_max):
    t, F, dF = 0.0, float(F0), float(F1)
    while t < t_max:
        acc = B * (t + k) ** (-q) * abs(F) ** p
        scale = t + k
        if dF != 0:
            scale = min(scale, abs(F) / abs(dF)) if F != 0 else scale
        if acc != 0 and dF != 0:
            scale = min(scale, abs(dF) / acc)
        h = max(eta * scale, 1e-14 * (t + k))
        Fn, dFn = _rk4(t, F, dF, h, p, q, B, k)
        if not (math.isfinite(Fn) and abs(Fn) < threshold):
            # bisect on the fraction of the step that reaches the threshold
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                Fm, _ = _rk4(t, F, dF, mid * h, p, q, B, k)
                if math.isfinite(Fm) and abs(Fm) < threshold:
                    lo = mid
                else:
                    hi = mid
            return t + 0.5 * (lo + hi) * h, True
        t, F, dF = t + h, Fn, dFn
    return t_max, False


def ode_blowup_time(p: float, q: float, B: float, k: float, F0: float, F0prime: float,
                    dt: float = 2e-3, threshold: float = 1e12,
                    t_max: float = 1e9) -> OdeBlowup:
    """First time ``|F|`` exceeds ``threshold`` for ``F'' = B (t+k)^{-q} |F|^p``.

    The step is ``dt`` times the smallest of ``t + k``, ``|F/F'|`` and
    ``|F'/F''|`` (RK4).  The run is repeated with ``dt/2``; ``rel_diff`` is
    the relative change of the blow-up time.
    """
    if F0 < 0 or F0prime < 0 or (F0 == 0 and F0prime == 0):
        raise ValueError("need F0 >= 0, F0' >= 0, not both zero")
    T1, b1 = _integrate_ode(p, q, B, k, F0, F0prime, dt, threshold, t_max)
    T2, b2 = _integrate_ode(p, q, B, k, F0, F0prime, dt / 2, threshold, t_max)
    if not (b1 and b2):
        return OdeBlowup(math.inf, OdeStatus.SURVIVED, math.inf, 0.0)
    return OdeBlowup(T2, OdeStatus.BLEW_UP, T1, abs(T1 - T2) / T2)


# --------------------------------------------------------------------------
# slicing


class SlicingVariant(enum.Enum):
    A = "Critical-A"   # d_{j+1} = d_j^2 / 2^{3j+9},      a_0 = 0
    B = "Critical-B"   # d_{j+1} = d_j^2 / (3 2^{3j+9}),  a_0 = 1


@dataclass(frozen=True)
class SlicingState:
    j: int
    a: int
    log_d: float
    l: float


@dataclass
class SlicingResult:
    states: list
    q_limit: float
    log_d0: float
    bound_holds: bool

    def lower_bound(self, j: int) -> float:
        """``2^j (log d_0 + q)``: the log of the closed lower bound."""
        return 2.0**j * (self.log_d0 + self.q_limit)


def _log_divisor(j: int, variant: SlicingVariant) -> float:
    extra = math.log(3.0) if variant is SlicingVariant.B else 0.0
    return extra + (3 * j + 9) * math.log(2.0)


def slicing_q_limit(variant: SlicingVariant = SlicingVariant.A, tol: float = 1e-15) -> float:
    """``q = -sum_j log(divisor_j) / 2^{j+1}``, summed until terms drop below ``tol``."""
    variant = SlicingVariant(variant)
    total, j = 0.0, 0
    while True:
        term = _log_divisor(j, variant) / 2.0 ** (j + 1)
        total += term
        if term < tol:
            return -total
        j += 1


def slicing_iterate(E0: float, eps: float, j_max: int,
                    variant: SlicingVariant = SlicingVariant.A) -> SlicingResult:
    """Slicing sequences ``(a_j, log d_j, l_j)`` for ``j = 0..j_max``.

    ``d_0 = E0 eps`` (variant A) or ``E0 eps^2`` (variant B).  The lower bound
    ``log d_j >= 2^j (log d_0 + q)`` is checked for every ``j``.
    """
    variant = SlicingVariant(variant)
    if not (E0 > 0 and eps > 0):
        raise ValueError("E0 and eps must be positive")
    power = 1 if variant is SlicingVariant.A else 2
    log_d0 = math.log(E0) + power * math.log(eps)
    a = 0 if variant is SlicingVariant.A else 1
    log_d = log_d0
    l = 1.0
    states = [SlicingState(0, a, log_d, l)]
    for j in range(j_max):
        a = 2 * a + 2
        log_d = 2.0 * log_d - _log_divisor(j, variant)
        l += 2.0 ** -(j + 1)
        states.append(SlicingState(j + 1, a, log_d, l))
    q = slicing_q_limit(variant)
    res = SlicingResult(states, q, log_d0, True)
    res.bound_holds = all(s.log_d >= res.lower_bound(s.j) - 1e-9 * abs(res.lower_bound(s.j))
                          for s in states)
    return res


def critical_lifespan_bound(B: float, eps, case: str = "A"):
    """``exp(4 B eps^{-1/2})`` (case A) or ``exp(4 B eps^{-2/3})`` (case B).

    Returns ``inf`` where the value overflows.
    """
    if not B > 0:
        raise ValueError("B must be positive")
    eps = np.asarray(eps, dtype=float)
    if np.any(eps <= 0):
        raise ValueError("eps must be positive")
    theta = {"A": 0.5, "B": 2.0 / 3.0}[case]
    expo = 4.0 * B * eps ** (-theta)
    with np.errstate(over="ignore"):
        out = np.where(expo < 709.0, np.exp(np.minimum(expo, 709.0)), np.inf)
    return float(out) if out.ndim == 0 else out

"""Compactly supported radial initial data.

All profiles are built from the mollifier ``b(s) = exp(-1/(1 - s^2))`` on
``|s| < 1``.  A radial function is a finite sum of shifted and scaled copies,
``A * b((r - c) / w)``, so values, first and second radial derivatives are
available in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import exp1

from .exponents import DataClass

__all__ = [
    "bump",
    "bump_d1",
    "bump_d2",
    "BUMP_DISC_MOMENT",
    "RadialFunction",
    "ProfileKind",
    "DataProfile",
    "DataIntegrals",
    "make_case_A",
    "make_case_B",
    "zero_profile",
    "radial_integral",
    "integrals",
]

# int_0^1 s b(s) ds = (e^-1 - E1(1)) / 2
BUMP_DISC_MOMENT = 0.5 * (math.exp(-1.0) - float(exp1(1.0)))


def _inside(s):
    s = np.asarray(s, dtype=float)
    return s, np.abs(s) < 1.0


def bump(s):
    s, m = _inside(s)
    out = np.zeros_like(s)
    sm = s[m]
    out[m] = np.exp(-1.0 / (1.0 - sm * sm))
    return out


def bump_d1(s):
    s, m = _inside(s)
    out = np.zeros_like(s)
    sm = s[m]
    one = 1.0 - sm * sm
    out[m] = np.exp(-1.0 / one) * (-2.0 * sm / one**2)
    return out


def bump_d2(s):
    s, m = _inside(s)
    out = np.zeros_like(s)
    sm = s[m]
    one = 1.0 - sm * sm
    q1 = -2.0 * sm / one**2
    q2 = -2.0 / one**2 - 8.0 * sm * sm / one**3
    out[m] = np.exp(-1.0 / one) * (q1 * q1 + q2)
    return out


@dataclass(frozen=True)
class _Atom:
    amplitude: float
    center: float
    width: float


@dataclass(frozen=True)
class RadialFunction:
    """``factor * sum_i A_i b((r - c_i) / w_i)`` as a function of ``r = |x|``.

    Atoms with ``c > 0`` are rings and must satisfy ``c - w > 0`` so the
    function stays smooth at the origin.
    """

    atoms: tuple = ()
    factor: float = 1.0

    def __post_init__(self):
        for a in self.atoms:
            if a.width <= 0:
                raise ValueError("atom width must be positive")
            if a.center != 0.0 and a.center - a.width <= 0.0:
                raise ValueError("ring atoms must stay away from the origin")

    @property
    def support(self) -> float:
        if not self.atoms:
            return 0.0
        return max(a.center + a.width for a in self.atoms)

    def scaled(self, alpha: float) -> "RadialFunction":
        return RadialFunction(self.atoms, self.factor * alpha)

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        def absorb(fn):
            return tuple(_Atom(a.amplitude * fn.factor, a.center, a.width) for a in fn.atoms)
        return RadialFunction(absorb(self) + absorb(other), 1.0)

    def _sum(self, kernel, r, order):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for a in self.atoms:
            out = out + a.amplitude * kernel((r - a.center) / a.width) / a.width**order
        return self.factor * out

    def __call__(self, r):
        return self._sum(bump, r, 0)

    def d1(self, r):
        return self._sum(bump_d1, r, 1)

    def d2(self, r):
        return self._sum(bump_d2, r, 2)

    def laplacian(self, r):
        """``phi'' + phi'/r`` with the origin value ``2 phi''(0)``."""
        r = np.asarray(r, dtype=float)
        d1 = self.d1(r)
        d2 = self.d2(r)
        small = r < 1e-12
        safe = np.where(small, 1.0, r)
        return np.where(small, 2.0 * d2, d2 + d1 / safe)

    def gradient(self, x):
        """Cartesian gradient at points ``x`` of shape ``(..., 2)``."""
        x = np.asarray(x, dtype=float)
        r = np.hypot(x[..., 0], x[..., 1])
        safe = np.where(r > 0, r, 1.0)
        g = np.where(r > 0, self.d1(r) / safe, 0.0)
        return x * g[..., None]

    def describe(self) -> dict:
        return {
            "factor": self.factor,
            "atoms": [[a.amplitude, a.center, a.width] for a in self.atoms],
        }

    @classmethod
    def from_description(cls, d: dict) -> "RadialFunction":
        return cls(tuple(_Atom(*map(float, a)) for a in d["atoms"]), float(d["factor"]))


class ProfileKind(enum.Enum):
    CASE_A = "CaseA_fZero_gBump"
    CASE_B_POS = "CaseB_fBump_gMinusF"
    CASE_B_NEG = "CaseB_fNegIntegral"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class DataProfile:
    """Initial pair ``(f, g)`` supported in ``|x| <= k``."""

    kind: ProfileKind
    k: float
    f: RadialFunction
    g: RadialFunction
    g_is_minus_f: bool = False
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"support radius must be >= 1, got {self.k}")
        if max(self.f.support, self.g.support) > self.k * (1 + 1e-12):
            raise ValueError("profile atoms extend past the support radius")

    def f_plus_g(self) -> RadialFunction:
        if self.g_is_minus_f:
            return RadialFunction((), 1.0)
        return self.f + self.g

    @property
    def data_class(self) -> DataClass:
        return DataClass.ZERO_INTEGRAL if self.g_is_minus_f else DataClass.NONZERO_INTEGRAL

    def scaled(self, alpha: float) -> "DataProfile":
        return DataProfile(self.kind, self.k, self.f.scaled(alpha), self.g.scaled(alpha),
                           self.g_is_minus_f, dict(self.notes))

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "k": self.k,
            "g_is_minus_f": self.g_is_minus_f,
            "f": self.f.describe(),
            "g": self.g.describe(),
            **{f"note_{key}": val for key, val in self.notes.items()},
        }

    def to_text(self) -> str:
        """One ``key = value`` per line; values are JSON literals."""
        import json
        return "".join(f"{key} = {json.dumps(val)}\n" for key, val in self.describe().items())

    @classmethod
    def from_text(cls, text: str) -> "DataProfile":
        import json
        d = {}
        for line in text.splitlines():
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            key, _, val = line.partition("=")
            d[key.strip()] = json.loads(val)
        notes = {key[5:]: val for key, val in d.items() if key.startswith("note_")}
        return cls(ProfileKind(d["kind"]), float(d["k"]),
                   RadialFunction.from_description(d["f"]),
                   RadialFunction.from_description(d["g"]),
                   bool(d["g_is_minus_f"]), notes)


def _unit_bump(k: float) -> RadialFunction:
    """Bump on ``|x| < k`` normalised to unit integral over the plane."""
    amp = 1.0 / (2.0 * math.pi * k * k * BUMP_DISC_MOMENT)
    return RadialFunction((_Atom(amp, 0.0, k),))


def make_case_A(k: float = 1.0) -> DataProfile:
    """``f = 0`` and ``g`` a nonnegative bump with unit integral."""
    if k < 1:
        raise ValueError(f"support radius must be >= 1, got {k}")
    g = _unit_bump(k)
    return DataProfile(ProfileKind.CASE_A, float(k), RadialFunction((), 1.0), g)


# ring atom of the negative-integral profile, in units of k
_RING_CENTER = 0.7
_RING_WIDTH = 0.3


def _ring_moment() -> float:
    """``int_0^1 s b((s - c)/w) ds = c w int_{-1}^{1} b``; the odd part cancels."""
    from scipy.integrate import quad
    line, _ = quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), -1.0, 1.0,
                   epsabs=0.0, epsrel=1e-13, limit=200)
    return _RING_CENTER * _RING_WIDTH * line


def make_case_B(k: float = 1.0, sign: str = "PosF") -> DataProfile:
    """``g = -f`` exactly.

    ``PosF``: ``f`` is the nonnegative unit bump.
    ``NegIntF``: ``f(r) = a * b(2r/k) - c * b((r/k - 0.7)/0.3)`` with the inner
    bump of unit integral and ``c`` fixed so that ``int f = -1``.
    """
    if k < 1:
        raise ValueError(f"support radius must be >= 1, got {k}")
    if sign == "PosF":
        f = _unit_bump(k)
        kind = ProfileKind.CASE_B_POS
        notes = {}
    elif sign == "NegIntF":
        inner = 1.0 / (2.0 * math.pi * (k / 2.0) ** 2 * BUMP_DISC_MOMENT)
        ring_int = 2.0 * math.pi * k * k * _ring_moment()
        # 1 - c * ring_int = -1
        c = 2.0 / ring_int
        f = RadialFunction((_Atom(inner, 0.0, k / 2.0),
                            _Atom(-c, _RING_CENTER * k, _RING_WIDTH * k)))
        kind = ProfileKind.CASE_B_NEG
        notes = {"ring_amplitude": c}
    else:
        raise ValueError(f"unknown sign option {sign!r}; use 'PosF' or 'NegIntF'")
    return DataProfile(kind, float(k), f, f.scaled(-1.0), g_is_minus_f=True, notes=notes)


def zero_profile(k: float = 1.0) -> DataProfile:
    empty = RadialFunction((), 1.0)
    return DataProfile(ProfileKind.CUSTOM, float(k), empty, empty)


@dataclass(frozen=True)
class DataIntegrals:
    int_f: float
    int_g: float
    int_f_plus_g: float
    data_class: DataClass
    error_estimate: float = 0.0


def radial_integral(phi, radius: float, n: int = 2048):
    """``2 pi int_0^radius phi(r) r dr`` by Richardson-extrapolated trapezoid.

    Returns ``(value, error_estimate)``.
    """
    if n <= 0:
        raise ValueError("resolution must be positive")

    def trap(m):
        r = np.linspace(0.0, radius, m + 1)
        vals = np.asarray(phi(r), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("non-finite values from radial profile")
        return 2.0 * math.pi * np.trapezoid(vals * r, r)

    coarse, fine = trap(n), trap(2 * n)
    return (4.0 * fine - coarse) / 3.0, abs(fine - coarse) / 3.0


def integrals(profile: DataProfile, resolution: int = 2048) -> DataIntegrals:
    int_f, ef = radial_integral(profile.f, profile.k, resolution)
    int_g, eg = radial_integral(profile.g, profile.k, resolution)
    # for g = -f the two trapezoid sums are exact negatives, so this is 0.0
    return DataIntegrals(int_f, int_g, int_f + int_g, profile.data_class, ef + eg)

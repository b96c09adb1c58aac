"""Free two dimensional wave propagator for radial data.

The spherical mean

    R(phi|x,t) = t/(2 pi) int_{|xi|<=1} phi(x + t xi) / sqrt(1 - |xi|^2) dxi

is evaluated with ``xi = sin(s) * omega``; the weight then cancels against the
Jacobian and the integrand becomes ``phi(x + t sin(s) omega) sin(s)``, smooth
on ``[0, pi/2] x [0, 2 pi)``.  Because all data are compactly supported, the
``s`` range is cut to the annulus that meets the support and the angular range
to the arc that lies inside it, so the tensor rule only sees the bump.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .initial_data import DataProfile, integrals

__all__ = [
    "Constant",
    "SphericalMeanQuadrature",
    "AsymptoticEnvelope",
    "EnvelopeFitError",
    "DecayReport",
    "spherical_mean",
    "spherical_mean_radial",
    "free_solution",
    "free_solution_radial",
    "verify_decay_lemma",
    "fit_envelope",
]


class Constant:
    """Radial constant ``c`` on the whole plane (or on ``|x| <= support``)."""

    def __init__(self, value: float = 1.0, support: float = math.inf):
        self.value = float(value)
        self.support = float(support)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.support, self.value, 0.0)

    def d1(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class SphericalMeanQuadrature:
    """Tensor rule on ``(s, theta)`` after the sine substitution.

    ``mode`` is ``"sine-gauss"`` (Gauss-Legendre, spectral on smooth data) or
    ``"sine-midpoint"`` (composite midpoint, order 2; kept for order checks).
    """

    n_angle: int = 48
    n_radial: int = 48
    mode: str = "sine-gauss"

    def __post_init__(self):
        if self.n_angle < 2 or self.n_radial < 2:
            raise ValueError("need at least two nodes per direction")
        if self.mode not in ("sine-gauss", "sine-midpoint"):
            raise ValueError(f"unknown quadrature mode {self.mode!r}")

    @property
    def nominal_order(self) -> float:
        return math.inf if self.mode == "sine-gauss" else 2.0

    def refined(self, factor: int = 2) -> "SphericalMeanQuadrature":
        return SphericalMeanQuadrature(self.n_angle * factor, self.n_radial * factor, self.mode)

    def nodes(self, n):
        """Nodes and weights on ``[0, 1]``."""
        if self.mode == "sine-gauss":
            x, w = np.polynomial.legendre.leggauss(n)
            return 0.5 * (x + 1.0), 0.5 * w
        x = (np.arange(n) + 0.5) / n
        return x, np.full(n, 1.0 / n)


DEFAULT_QUADRATURE = SphericalMeanQuadrature()
DECAY_QUADRATURE = SphericalMeanQuadrature(96, 96)


def _disc_terms(phi, r, t, quad, with_time_derivative, K=None, aux=None):
    """Core integral for arrays ``r``, ``t`` of equal shape (flattened).

    Returns ``int int phi(|y|) sin(s) ds dtheta`` and, if requested, the
    companion ``int int t sin(s) omega.grad phi(y) sin(s) ds dtheta``.
    ``K`` (scalar or per point) overrides ``phi.support``; with ``aux`` given
    the integrand is called as ``phi(|y|, aux)`` with ``aux`` shaped
    ``(P, 1, 1)``.
    """
    if K is None:
        K = float(getattr(phi, "support", math.inf))
    K = np.broadcast_to(np.asarray(K, dtype=float), r.shape)
    finite = np.isfinite(K)
    Kf = np.where(finite, K, 0.0)
    xs, ws = quad.nodes(quad.n_radial)
    xa, wa = quad.nodes(quad.n_angle)
    if aux is None:
        ev = phi
    else:
        a3 = np.asarray(aux, dtype=float)[:, None, None]
        ev = lambda y: phi(y, a3)  # noqa: E731

    rho_lo = np.where(finite, np.maximum(0.0, r - Kf), 0.0)
    rho_hi = np.where(finite, np.minimum(t, r + Kf), t)
    live = (rho_hi > rho_lo) & (t > 0)
    s_lo = np.arcsin(np.clip(np.where(live, rho_lo / np.where(t > 0, t, 1.0), 0.0), 0.0, 1.0))
    s_hi = np.arcsin(np.clip(np.where(live, rho_hi / np.where(t > 0, t, 1.0), 0.0), 0.0, 1.0))

    # (P, Ns)
    s = s_lo[:, None] + (s_hi - s_lo)[:, None] * xs[None, :]
    jac_s = (s_hi - s_lo)[:, None] * ws[None, :]
    rho = t[:, None] * np.sin(s)

    # angle measured from the direction of x; the arc inside |y| <= K is
    # [theta_lo, pi], doubled by symmetry
    rr = r[:, None]
    KK = Kf[:, None]
    denom = 2.0 * rr * rho
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        c = np.where(denom > 0, (KK * KK - rr * rr - rho * rho) / np.where(denom > 0, denom, 1.0), 1.0)
    th_lo = np.where(finite[:, None], np.arccos(np.clip(c, -1.0, 1.0)), 0.0)
    th = th_lo[..., None] + (math.pi - th_lo)[..., None] * xa
    jac_th = 2.0 * (math.pi - th_lo)[..., None] * wa

    rho3 = rho[..., None]
    cos_th = np.cos(th)
    y2 = rr[..., None] ** 2 + rho3 * rho3 + 2.0 * rr[..., None] * rho3 * cos_th
    y = np.sqrt(np.maximum(y2, 0.0))
    sin_s = np.sin(s)[..., None]
    weight = jac_s[..., None] * jac_th * sin_s

    main = np.sum(ev(y) * weight, axis=(1, 2))
    # at t = 0 the disc collapses onto x: the s-integral of sin(s) is 1
    at_zero = t == 0
    if np.any(at_zero):
        at_x = ev(np.broadcast_to(r[:, None, None], (r.size, 1, 1)))[:, 0, 0]
        main = np.where(at_zero, 2.0 * math.pi * at_x, main)
    if not with_time_derivative:
        return main, None
    # omega . grad phi(y) = phi'(|y|) (r cos(theta) + rho) / |y|
    safe = np.where(y > 0, y, 1.0)
    radial = np.where(y > 0, phi.d1(y) * (rr[..., None] * cos_th + rho3) / safe, 0.0)
    extra = np.sum(t[:, None, None] * sin_s * radial * weight, axis=(1, 2))
    return main, np.where(at_zero, 0.0, extra)


def _chunked(phi, r, t, quad, with_dt, chunk=256):
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    r, t = np.broadcast_arrays(r, t)
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    shape = r.shape
    rf, tf = r.ravel(), t.ravel()
    main = np.empty(rf.size)
    extra = np.empty(rf.size) if with_dt else None
    for a in range(0, rf.size, chunk):
        m, e = _disc_terms(phi, rf[a:a + chunk], tf[a:a + chunk], quad, with_dt)
        main[a:a + chunk] = m
        if with_dt:
            extra[a:a + chunk] = e
    return main.reshape(shape), (extra.reshape(shape) if with_dt else None)


def spherical_mean_radial(phi, r, t, quad: SphericalMeanQuadrature | None = None):
    """``R(phi|x,t)`` for ``|x| = r``; vectorised over broadcastable ``r, t``."""
    quad = quad or DEFAULT_QUADRATURE
    main, _ = _chunked(phi, r, t, quad, False)
    return np.asarray(t, dtype=float) * main / (2.0 * math.pi)


def spherical_mean(phi, x, t, quad: SphericalMeanQuadrature | None = None):
    """``R(phi|x,t)`` at points ``x`` of shape ``(..., 2)``."""
    x = np.asarray(x, dtype=float)
    return spherical_mean_radial(phi, np.hypot(x[..., 0], x[..., 1]), t, quad)


def free_solution_radial(profile: DataProfile, r, t, quad: SphericalMeanQuadrature | None = None):
    """``u_L = d/dt R(f) + R(f+g)`` at radius ``r`` (data without epsilon).

    ``d/dt R(f)`` is differentiated under the integral sign, which needs only
    ``f'`` in closed form.
    """
    quad = quad or DEFAULT_QUADRATURE
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros(np.broadcast(np.asarray(r, dtype=float), t_arr).shape)
    if profile.f.atoms:
        main, extra = _chunked(profile.f, r, t, quad, True)
        out = out + (main + extra) / (2.0 * math.pi)
    fg = profile.f_plus_g()
    if fg.atoms:
        out = out + spherical_mean_radial(fg, r, t, quad)
    return out


def free_solution(profile: DataProfile, x, t, quad: SphericalMeanQuadrature | None = None):
    x = np.asarray(x, dtype=float)
    return free_solution_radial(profile, np.hypot(x[..., 0], x[..., 1]), t, quad)


# --------------------------------------------------------------------------
# decay lemma checks


@dataclass
class DecayReport:
    """Scaled residuals of the two large-time expansions of ``u_L``.

    ``c_half`` is ``max |u_L - I/(2 pi sqrt((t+r)(t-r)))| (t+r)^{1/2} (t-r)^{3/2} / k``.
    ``c_three_half`` (only for ``f + g = 0``) is the analogous constant for
    ``u_L + t int f / (2 pi ((t+r)(t-r))^{3/2})`` with weight ``(t-r)^{5/2}``.
    ``*_refined`` are the same constants with a doubled quadrature.
    """

    n_samples: int
    c_half: float
    c_half_refined: float
    c_three_half: float
    c_three_half_refined: float
    leading_ratio: float
    passed: bool

    def to_csv(self, region: str = "") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["region", "n_samples", "c_half", "c_half_refined",
                    "c_three_half", "c_three_half_refined", "leading_ratio", "passed"])
        w.writerow([region, self.n_samples, repr(self.c_half), repr(self.c_half_refined),
                    repr(self.c_three_half), repr(self.c_three_half_refined),
                    repr(self.leading_ratio), "PASS" if self.passed else "FAIL"])
        return buf.getvalue()


def _check_lemma_region(r, t, k):
    if np.any(t - r < 2 * k - 1e-12) or np.any(t < 4 * k - 1e-12):
        raise ValueError("decay-lemma samples need t - r >= 2k and t >= 4k")


def _residual_constants(profile, r, t, quad, int_fg, int_f):
    k = profile.k
    u = free_solution_radial(profile, r, t, quad)
    plus, minus = t + r, t - r
    res_half = np.abs(u - int_fg / (2 * math.pi * np.sqrt(plus * minus))) \
        * np.sqrt(plus) * minus**1.5 / k
    if profile.g_is_minus_f:
        lead = -t * int_f / (2 * math.pi * (plus * minus) ** 1.5)
        res3 = np.abs(u - lead) * np.sqrt(plus) * minus**2.5 / k
        c3 = float(np.max(res3))
        i = int(np.argmax(minus))
        ratio = float(u[i] / lead[i]) if lead[i] != 0 else math.nan
    else:
        c3 = math.nan
        lead = int_fg / (2 * math.pi * np.sqrt(plus * minus))
        i = int(np.argmax(minus))
        ratio = float(u[i] / lead[i]) if lead[i] != 0 else math.nan
    return float(np.max(res_half)), c3, ratio


def verify_decay_lemma(profile: DataProfile, r, t, quad: SphericalMeanQuadrature | None = None,
                       stability: float = 0.2) -> DecayReport:
    """Empirical constants for the large-time expansions of ``u_L``.

    Samples must satisfy ``t - r >= 2k`` and ``t >= 4k``.  The check passes when
    every constant is finite and changes by less than ``stability`` (relative)
    when the quadrature is doubled.  The default rule is finer than for plain
    evaluation: for ``f + g = 0`` the residual is a small difference of O(1)
    terms and 48 nodes do not resolve it.
    """
    quad = quad or DECAY_QUADRATURE
    r, t = np.broadcast_arrays(np.asarray(r, dtype=float).ravel(),
                               np.asarray(t, dtype=float).ravel())
    if r.size == 0:
        raise ValueError("empty sample set")
    _check_lemma_region(r, t, profile.k)
    ints = integrals(profile)
    c1, c3, ratio = _residual_constants(profile, r, t, quad, ints.int_f_plus_g, ints.int_f)
    c1f, c3f, _ = _residual_constants(profile, r, t, quad.refined(), ints.int_f_plus_g, ints.int_f)

    def stable(a, b):
        if math.isnan(a) and math.isnan(b):
            return True
        if not (math.isfinite(a) and math.isfinite(b)):
            return False
        scale = max(abs(a), abs(b))
        return scale < 1e-12 or abs(a - b) <= stability * scale

    ok = stable(c1, c1f) and stable(c3, c3f)
    return DecayReport(r.size, c1, c1f, c3, c3f, ratio, ok)


# --------------------------------------------------------------------------
# envelopes


class EnvelopeFitError(RuntimeError):
    pass


@dataclass(frozen=True)
class AsymptoticEnvelope:
    """Lower bound ``u_L >= E0 / W(r,t)`` on ``t - r >= K``.

    ``HalfHalf``: ``W = (t+r)^{1/2} (t-r)^{1/2}``;
    ``HalfThreeHalf``: ``W = (t+r)^{1/2} (t-r)^{3/2}``.
    """

    E0: float
    K: float
    form: str

    def __post_init__(self):
        if self.form not in ("HalfHalf", "HalfThreeHalf"):
            raise ValueError(f"unknown envelope form {self.form!r}")
        if not self.E0 > 0:
            raise ValueError("E0 must be positive")

    def weight(self, r, t):
        r, t = np.asarray(r, dtype=float), np.asarray(t, dtype=float)
        power = 0.5 if self.form == "HalfHalf" else 1.5
        return np.sqrt(t + r) * (t - r) ** power

    def bound(self, r, t):
        return self.E0 / self.weight(r, t)


def fit_envelope(profile: DataProfile, r, t, form: str | None = None,
                 quad: SphericalMeanQuadrature | None = None,
                 check_hypotheses: bool = True) -> AsymptoticEnvelope:
    """Smallest ``K`` in ``{k, 2k, 4k, 8k}`` and the matching largest ``E0``.

    ``E0`` is the minimum of ``W * u_L`` over samples with ``t - r >= K``.
    Raises ``EnvelopeFitError`` on a sign mismatch of the data integrals or
    when no ``K`` gives a positive ``E0``.
    """
    quad = quad or DEFAULT_QUADRATURE
    if form is None:
        form = "HalfThreeHalf" if profile.g_is_minus_f else "HalfHalf"
    if check_hypotheses:
        ints = integrals(profile)
        if form == "HalfHalf" and not ints.int_f_plus_g > 0:
            raise EnvelopeFitError("HalfHalf envelope needs int(f+g) > 0")
        if form == "HalfThreeHalf" and not (profile.g_is_minus_f and ints.int_f < 0):
            raise EnvelopeFitError("HalfThreeHalf envelope needs f+g = 0 and int f < 0")
    r, t = np.broadcast_arrays(np.asarray(r, dtype=float).ravel(),
                               np.asarray(t, dtype=float).ravel())
    u = free_solution_radial(profile, r, t, quad)
    probe = AsymptoticEnvelope(1.0, profile.k, form)
    scaled = probe.weight(r, t) * u
    for mult in (1, 2, 4, 8):
        K = mult * profile.k
        sel = (t - r) >= K
        if not np.any(sel):
            continue
        e0 = float(np.min(scaled[sel]))
        if e0 > 0:
            return AsymptoticEnvelope(e0, K, form)
    raise EnvelopeFitError(f"no (E0, K) validates the {form} envelope on the samples")

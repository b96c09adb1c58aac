"""Duhamel operator, weights and the Picard iteration in the u-form.

    L(F)(x,t) = 1/(2 pi) int_0^t (t - tau)/(1 + tau)^{p-1} dtau
                int_{|xi|<=1} F(x + (t - tau) xi, tau) / sqrt(1 - |xi|^2) dxi

is evaluated in two independent ways:

* ``disc``: the spherical-mean quadrature of :mod:`wave_kernel` applied at
  every time node, with the cone ``|y| <= tau + k`` cut out exactly;
* ``split``: the radial reduction ``L = L1 + L2`` in the variables
  ``(lambda, rho) = (|y|, |x - y|)``.  Both inner rho-integrals reduce to
  ``int_0^{pi/2} dth / sqrt(A cos^2 th + B sin^2 th) = pi / (2 AGM(sqrt A, sqrt B))``,
  so they are evaluated exactly; the logarithmic singularity left in the
  lambda-integral at ``lambda = t - r - tau`` is removed by a graded
  substitution.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exponents import ModelParams, _as_fraction, gamma
from .initial_data import DataProfile
from .wave_kernel import SphericalMeanQuadrature, _disc_terms, free_solution_radial

__all__ = [
    "SpaceTimeField",
    "RadialSource",
    "WeightSpec",
    "GrowthFactors",
    "weight",
    "weighted_norm",
    "growth_D1",
    "growth_D2",
    "default_delta",
    "agm",
    "inner_rho_integral",
    "complete_rho_integral",
    "evaluate_L",
    "apply_L",
    "PicardResult",
    "picard_solve",
    "apriori_ratio",
    "apriori_ratio_mixed",
]


# --------------------------------------------------------------------------
# fields


@dataclass
class SpaceTimeField:
    """Radial samples ``values[n, i] = V(i dr, n dt)`` supported in ``r <= t + k``."""

    dr: float
    dt: float
    k: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.size == 0:
            raise ValueError("field values must be a non-empty 2D array (time, radius)")
        if not (self.dr > 0 and self.dt > 0):
            raise ValueError("grid spacings must be positive")
        if self.k < 1:
            raise ValueError("support radius must be >= 1")

    @property
    def n_t(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n_r(self) -> int:
        return self.values.shape[1] - 1

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(self.n_r + 1)

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.n_t + 1)

    @property
    def T(self) -> float:
        return self.dt * self.n_t

    def cone_mask(self, slack: float = 0.0) -> np.ndarray:
        return self.r[None, :] <= self.t[:, None] + self.k + slack + 1e-12

    def support_violation(self) -> float:
        """Largest ``|V|`` outside the cone ``r <= t + k``."""
        outside = ~self.cone_mask()
        return float(np.max(np.abs(self.values[outside]), initial=0.0))

    def check_support(self):
        if self.support_violation() > 0:
            raise ValueError("field is not supported in the cone r <= t + k")
        if self.n_r * self.dr < self.T + self.k - 1e-12:
            raise ValueError("radial grid does not cover r <= T + k")

    def clipped(self) -> "SpaceTimeField":
        return SpaceTimeField(self.dr, self.dt, self.k, np.where(self.cone_mask(), self.values, 0.0))

    def map(self, fn) -> "SpaceTimeField":
        return SpaceTimeField(self.dr, self.dt, self.k, fn(self.values))

    @classmethod
    def zeros(cls, T: float, k: float, dr: float, dt: float | None = None) -> "SpaceTimeField":
        dt = dr if dt is None else dt
        n_t = int(round(T / dt))
        n_r = int(math.ceil((n_t * dt + k) / dr - 1e-9))
        return cls(dr, dt, k, np.zeros((n_t + 1, n_r + 1)))

    @classmethod
    def from_function(cls, fn, T: float, k: float, dr: float, dt: float | None = None):
        """Sample ``fn(r, t)`` on the grid and zero it outside the cone."""
        out = cls.zeros(T, k, dr, dt)
        rr, tt = np.meshgrid(out.r, out.t)
        vals = np.asarray(fn(rr, tt), dtype=float)
        out.values = np.where(out.cone_mask(), vals, 0.0)
        return out

    # -- sampling --------------------------------------------------------

    def __call__(self, lam, tau):
        """Bilinear interpolant, exactly zero for ``lam > tau + k``."""
        lam = np.asarray(lam, dtype=float)
        tau = np.asarray(tau, dtype=float)
        x = lam / self.dr
        y = np.clip(tau / self.dt, 0.0, self.n_t)
        i = np.clip(np.floor(x).astype(np.int64), 0, self.n_r - 1)
        n = np.clip(np.floor(y).astype(np.int64), 0, max(self.n_t - 1, 0))
        fx = np.clip(x - i, 0.0, 1.0)
        fy = y - n if self.n_t > 0 else np.zeros_like(y)
        v = self.values
        n1 = np.minimum(n + 1, self.n_t)
        val = (1 - fy) * ((1 - fx) * v[n, i] + fx * v[n, i + 1]) \
            + fy * ((1 - fx) * v[n1, i] + fx * v[n1, i + 1])
        return np.where((lam <= tau + self.k) & (x <= self.n_r), val, 0.0)

    # -- IO --------------------------------------------------------------

    def header(self) -> tuple:
        return (self.n_r, self.n_t, self.dr, self.dt, self.k)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# N_r={self.n_r} N_t={self.n_t} dr={self.dr!r} dt={self.dt!r} k={self.k!r}\n")
        np.savetxt(buf, self.values, delimiter=",", fmt="%.17g")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SpaceTimeField":
        first, _, body = text.partition("\n")
        meta = dict(item.split("=") for item in first.lstrip("# ").split())
        vals = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
        n_r, n_t = int(meta["N_r"]), int(meta["N_t"])
        if vals.shape != (n_t + 1, n_r + 1):
            raise ValueError("CSV body does not match its header")
        return cls(float(meta["dr"]), float(meta["dt"]), float(meta["k"]), vals)

    def to_bytes(self) -> bytes:
        head = np.array([self.n_r, self.n_t, self.dr, self.dt, self.k], dtype="<f8")
        return head.tobytes() + np.ascontiguousarray(self.values, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "SpaceTimeField":
        head = np.frombuffer(blob[:40], dtype="<f8")
        n_r, n_t = int(head[0]), int(head[1])
        vals = np.frombuffer(blob[40:], dtype="<f8").reshape(n_t + 1, n_r + 1).copy()
        return cls(float(head[2]), float(head[3]), float(head[4]), vals)


@dataclass
class RadialSource:
    """Analytic source ``fn(lam, tau)``, cut to the cone ``lam <= tau + k``."""

    fn: object
    k: float = 1.0
    cut: bool = True

    def __call__(self, lam, tau):
        lam = np.asarray(lam, dtype=float)
        tau = np.asarray(tau, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = np.asarray(self.fn(lam, tau), dtype=float)
        if not self.cut:
            return np.broadcast_to(vals, np.broadcast(lam, tau).shape)
        return np.where(lam <= tau + self.k, vals, 0.0)

    def support_radius(self, tau):
        return tau + self.k if self.cut else np.full_like(np.asarray(tau, float), np.inf)


def _support_radius(F, tau):
    if isinstance(F, RadialSource):
        return F.support_radius(tau)
    return np.asarray(tau, dtype=float) + F.k


# --------------------------------------------------------------------------
# weights


_frac = _as_fraction


@dataclass(frozen=True)
class WeightSpec:
    index: int
    k: float = 1.0
    p: float = 2.0

    def __post_init__(self):
        if self.index not in (1, 2, 3):
            raise ValueError("weight index must be 1, 2 or 3")
        if not 1 < self.p <= 2:
            raise ValueError("weights are defined for 1 < p <= 2")

    @property
    def p1(self) -> float:
        return min((3 * self.p - 4) / 2, 0.5)

    @property
    def p2(self) -> float:
        return max(0.0, (3 * self.p - 5) / 2)

    @property
    def p3(self) -> int:
        return int(_frac(self.p) == Fraction(5, 3))

    @property
    def p4(self) -> int:
        return int(_frac(self.p) == 2)


def _taus(r, t, k):
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    return (t + r + 2 * k) / k, (t - r + 2 * k) / k


def weight(spec: WeightSpec, r, t):
    tp, tm = _taus(r, t, spec.k)
    if spec.index == 1:
        return np.sqrt(tp * tm)
    if spec.index == 3:
        return np.sqrt(tp) * tm**1.5
    # w2 through its reciprocal, which has no 0 * inf at p = 5/3 or p = 2
    p = spec.p
    with np.errstate(divide="ignore"):
        if spec.p4:
            inv = np.log(tm) / np.sqrt(tp * tm)
        elif spec.p3:
            inv = np.log(2 * tp / tm) / np.sqrt(tp)
        elif p < 5 / 3:
            inv = tp ** ((4 - 3 * p) / 2)
        else:
            inv = tm ** ((5 - 3 * p) / 2) / np.sqrt(tp)
        return 1.0 / inv


def weighted_norm(V: SpaceTimeField, i: int, p: float = 2.0) -> float:
    """Grid proxy for ``sup w_i |V|``."""
    if not isinstance(V, SpaceTimeField):
        raise TypeError("weighted_norm expects a SpaceTimeField")
    rr, tt = np.meshgrid(V.r, V.t)
    return _norm_at(V.values, rr, tt, i, V.k, p)


def _norm_at(values, r, t, i, k, p):
    with np.errstate(invalid="ignore"):
        w = weight(WeightSpec(i, k, p), r, t)
        return float(np.max(np.where(values == 0, 0.0, w * np.abs(values))))


def default_delta(p: float) -> float:
    return min(1.0 / (2.0 * p), 0.1)


def growth_D1(T, p: float, k: float = 1.0):
    Tk = (np.asarray(T, dtype=float) + 3 * k) / k
    if _frac(p) == 2:
        return np.log(Tk) ** 2
    return Tk ** (4 - 2 * p)


def growth_D2(T, p: float, nu: float, k: float = 1.0, delta: float | None = None):
    """Growth factor of the mixed estimate for ``nu in {0, p-1, 1, p}``."""
    delta = default_delta(p) if delta is None else delta
    P, N = _frac(p), _frac(nu)
    if N not in (0, P - 1, 1, P):
        raise ValueError("nu must be one of 0, p-1, 1, p")
    Tk = (np.asarray(T, dtype=float) + 3 * k) / k
    p3 = int(P == Fraction(5, 3))
    if N == P:
        if P == 2:
            return np.log(Tk) ** 3
        return Tk ** (gamma(p, 4.0) / 2)
    if P > Fraction(5, 3):
        return np.ones_like(Tk)
    if N == 1:
        return Tk ** (5 - 3 * p + delta * nu * p3)
    return Tk ** (nu * (5 - 3 * p) / 2 + delta * nu * p3)


@dataclass(frozen=True)
class GrowthFactors:
    T: float
    p: float
    k: float = 1.0
    delta: float | None = None

    @property
    def Tk(self) -> float:
        return (self.T + 3 * self.k) / self.k

    @property
    def D1(self) -> float:
        return float(growth_D1(self.T, self.p, self.k))

    def D2(self, nu: float) -> float:
        return float(growth_D2(self.T, self.p, nu, self.k, self.delta))


# --------------------------------------------------------------------------
# inner integrals


def agm(a, b, iters: int = 40):
    """Arithmetic-geometric mean, vectorised; ``agm(a, 0) = 0``."""
    a0 = a = np.asarray(a, dtype=float).copy()
    b0 = b = np.asarray(b, dtype=float).copy()
    for _ in range(iters):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        if np.all(np.abs(a - b) <= 1e-15 * np.abs(a)):
            break
    return np.where((a0 == 0) | (b0 == 0), 0.0, a)


def inner_rho_integral(lam, r, s, kind: str = "interior", method: str = "agm", n: int = 64):
    """``int rho h(lam, rho; r) / sqrt(s^2 - rho^2) drho``.

    ``kind="interior"``: over ``[|lam-r|, lam+r]`` (needs ``lam + r < s``);
    ``kind="cone"``: over ``[|lam-r|, s]`` (needs ``|lam-r| <= s <= lam + r``).
    ``method="agm"`` is exact; ``method="gauss"`` applies Gauss-Legendre to the
    trigonometric form and serves as a cross-check away from the log point.
    """
    lam, r, s = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (lam, r, s)))
    a = (lam - r) ** 2
    b = (lam + r) ** 2
    s2 = s * s
    if kind == "interior":
        A, B = s2 - a, s2 - b
    elif kind == "cone":
        A, B = b - a, b - s2
    else:
        raise ValueError(f"unknown kind {kind!r}")
    A = np.maximum(A, 0.0)
    B = np.maximum(B, 0.0)
    if method == "agm":
        # an endpoint exactly on the log point gets a large finite value
        tiny = 1e-300
        return 0.5 * math.pi / agm(np.sqrt(np.maximum(A, tiny)), np.sqrt(np.maximum(B, tiny)))
    if method == "gauss":
        x, w = np.polynomial.legendre.leggauss(n)
        th = 0.25 * math.pi * (x + 1.0)
        c2, s2_ = np.cos(th) ** 2, np.sin(th) ** 2
        vals = 1.0 / np.sqrt(A[..., None] * c2 + B[..., None] * s2_)
        return 0.25 * math.pi * np.sum(vals * w, axis=-1)
    raise ValueError(f"unknown method {method!r}")


def complete_rho_integral(lam: float, r: float) -> float:
    """``int_{|lam-r|}^{lam+r} rho h drho`` by adaptive QUADPACK with
    inverse-square-root endpoint weights (independent of the AGM route)."""
    from scipy.integrate import quad
    lo, hi = abs(lam - r), lam + r
    if hi <= lo:
        raise ValueError("degenerate rho range")

    def smooth(rho):
        return rho / math.sqrt((rho + lo) * (hi + rho))

    val, _ = quad(smooth, lo, hi, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-14, epsrel=1e-13)
    return val


# --------------------------------------------------------------------------
# the operator


def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _tau_breaks(r, t, k, extra=()):
    pts = [0.0, t]
    for b in ((t - r - k) / 2, (t + r - k) / 2, *extra):
        if 0.0 < b < t:
            pts.append(b)
    return sorted(set(pts))


def _tau_nodes(r, t, k, n, extra=()):
    xs, ws = _gauss(n)
    br = _tau_breaks(r, t, k, extra)
    taus, wts = [], []
    for a, b in zip(br[:-1], br[1:]):
        if b - a <= 0:
            continue
        taus.append(a + (b - a) * xs)
        wts.append((b - a) * ws)
    if not taus:
        return np.empty(0), np.empty(0)
    return np.concatenate(taus), np.concatenate(wts)


def _L_disc_point(F, p, r, t, n_tau, quad):
    if t <= 0:
        return 0.0
    k = F.k
    tau, wt = _tau_nodes(r, t, k, n_tau)
    s = t - tau
    K = _support_radius(F, tau)
    rr = np.full_like(tau, r)
    main, _ = _disc_terms(F, rr, s, quad, False, K=K, aux=tau)
    vals = (1.0 + tau) ** (1.0 - p) * s * main / (2.0 * math.pi)
    return float(np.sum(vals * wt))


def _graded(lo, hi, m, n, at_upper):
    """Per-row nodes on ``[lo, hi]`` clustered like ``w**m`` at one end."""
    xs, ws = _gauss(n)
    span = (hi - lo)[:, None]
    mm = m[:, None]
    xm = xs[None, :] ** mm
    lam = hi[:, None] - span * xm if at_upper else lo[:, None] + span * xm
    return lam, span * mm * xs[None, :] ** (mm - 1) * ws[None, :]


def _L_split_point(F, p, r, t, n_tau, n_lam, grade=4):
    if t <= 0:
        return 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        return _L_split_sum(F, p, r, t, n_tau, n_lam, grade)


def _L_split_sum(F, p, r, t, n_tau, n_lam, grade):
    tau, wt = _tau_nodes(r, t, F.k, n_tau, extra=(t - r,))
    s = t - tau
    K = np.asarray(_support_radius(F, tau), dtype=float)
    tcol = tau[:, None]
    ones = np.ones_like(tau)
    acc = np.zeros_like(tau)
    # L1: lambda in [|t-r-tau|, t+r-tau]; the log point sits at the lower end
    lo = np.abs(s - r)
    hi = np.minimum(s + r, K)
    live = hi > lo
    if np.any(live):
        m = np.where(s - r > 0, grade, 1) * ones
        lam, wl = _graded(lo, np.where(live, hi, lo), m, n_lam, at_upper=False)
        inner = inner_rho_integral(lam, r, s[:, None], "cone")
        vals = lam * F(lam, np.broadcast_to(tcol, lam.shape)) * inner * wl
        acc += np.where(live, np.sum(np.where(wl > 0, vals, 0.0), axis=1), 0.0)
    # L2: lambda in [0, t-r-tau], full rho range; log point at the upper end
    lstar = s - r
    hi2 = np.minimum(lstar, K)
    live2 = hi2 > 0
    if np.any(live2):
        hi2 = np.where(live2, hi2, 0.0)
        m = np.where(lstar <= K, grade, 1) * ones
        lam, wl = _graded(np.zeros_like(hi2), hi2, m, n_lam, at_upper=True)
        inner = inner_rho_integral(lam, r, s[:, None], "interior")
        vals = lam * F(lam, np.broadcast_to(tcol, lam.shape)) * inner * wl
        acc += np.where(live2, np.sum(np.where(wl > 0, vals, 0.0), axis=1), 0.0)
    return 2.0 / math.pi * float(np.sum(wt * (1.0 + tau) ** (1.0 - p) * acc))


def evaluate_L(F, p: float, r, t, path: str = "disc", n_tau: int = 24,
               quad: SphericalMeanQuadrature | None = None, n_lam: int = 48):
    """``L(F)`` at sample points ``(r, t)`` (broadcast).

    ``F`` is a :class:`SpaceTimeField` (bilinear interpolation) or a
    :class:`RadialSource`.  ``n_tau`` is the Gauss order per smooth piece of
    the tau-integral.
    """
    if isinstance(F, SpaceTimeField):
        F.check_support()
    elif not isinstance(F, RadialSource):
        raise TypeError("F must be a SpaceTimeField or a RadialSource")
    quad = quad or SphericalMeanQuadrature(32, 32)
    r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
    out = np.zeros(r.shape)
    for idx in np.ndindex(r.shape):
        ri, ti = float(r[idx]), float(t[idx])
        if isinstance(F, SpaceTimeField) and ti > F.T + 1e-12:
            raise ValueError("evaluation time beyond the field's horizon")
        if ri > ti + F.k + 1e-12 and not (isinstance(F, RadialSource) and not F.cut):
            continue
        if path == "disc":
            out[idx] = _L_disc_point(F, p, ri, ti, n_tau, quad)
        elif path == "split":
            out[idx] = _L_split_point(F, p, ri, ti, n_tau, n_lam)
        else:
            raise ValueError(f"unknown path {path!r}")
    return out


def apply_L(F: SpaceTimeField, p: float, t_stride: int = 1, path: str = "disc",
            **kw) -> SpaceTimeField:
    """``L(F)`` on the grid of ``F`` (every ``t_stride``-th time level)."""
    F.check_support()
    out = SpaceTimeField(F.dr, F.dt * t_stride, F.k,
                         np.zeros(((F.n_t // t_stride) + 1, F.n_r + 1)))
    mask = out.cone_mask()
    rr, tt = np.meshgrid(out.r, out.t)
    out.values[mask] = evaluate_L(F, p, rr[mask], tt[mask], path=path, **kw)
    return out


# --------------------------------------------------------------------------
# Picard iteration


@dataclass
class PicardResult:
    field: SpaceTimeField
    trace: list = field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    residual: float = math.nan
    linear: SpaceTimeField | None = None


def picard_solve(profile: DataProfile, params: ModelParams, T: float, max_iter: int = 20,
                 tol: float = 1e-10, dr: float | None = None, dt: float | None = None,
                 path: str = "disc", **kw) -> PicardResult:
    """Iterate ``u_{j+1} = eps u_L + L(|u_j|^p)`` on a radial grid up to ``T``.

    Stops when ``||u_{j+1} - u_j||_1 < tol ||u_j||_1``.  Three consecutive
    contraction ratios above one are reported as divergence.
    """
    k, p, eps = params.k, params.p, params.epsilon
    dr = k / 16 if dr is None else dr
    dt = dr if dt is None else dt
    grid = SpaceTimeField.zeros(T, k, dr, dt)
    mask = grid.cone_mask()
    rr, tt = np.meshgrid(grid.r, grid.t)
    lin = np.zeros_like(grid.values)
    lin[mask] = free_solution_radial(profile, rr[mask], tt[mask])
    u0 = grid.map(lambda _: eps * lin)

    def norm1(values):
        return _norm_at(values, rr, tt, 1, k, p)

    def step(u):
        src = u.map(lambda v: np.abs(v) ** p)
        return u0.map(lambda v: v + apply_L(src, p, path=path, **kw).values)

    res = PicardResult(u0, linear=u0)
    u = u0
    prev_diff = None
    streak = 0
    for j in range(1, max_iter + 1):
        nxt = step(u)
        diff = norm1(nxt.values - u.values)
        size = norm1(u.values)
        ratio = diff / prev_diff if prev_diff else math.nan
        res.trace.append({"iteration": j, "diff": diff, "norm": size, "ratio": ratio})
        u = nxt
        if diff == 0.0 or diff < tol * size:
            res.converged = True
            break
        streak = streak + 1 if ratio > 1 else 0
        if streak >= 3:
            res.diverged = True
            break
        prev_diff = diff
    res.field = u
    if res.converged:
        resid = norm1(u.values - step(u).values)
        size = norm1(u.values)
        res.residual = resid / size if size > 0 else resid
    return res


# --------------------------------------------------------------------------
# a-priori ratios


def _cone_samples(T, k, n_t=12, n_r=12):
    """Output points in the cone below ``T``: geometric in t, with r packed
    towards both the axis and the light cone."""
    ts = np.unique(np.concatenate([np.geomspace(0.25 * k, T, n_t), [T]]))
    pts = []
    for t in ts:
        frac = 0.5 - 0.5 * np.cos(np.linspace(0.0, math.pi, n_r))
        pts.append(np.column_stack([frac * (t + k), np.full(n_r, t)]))
    pts = np.vstack(pts)
    return pts[:, 0], pts[:, 1]


def apriori_ratio(V, p: float, T: float, path: str = "split", samples=None,
                  n_tau: int = 24, n_lam: int = 48) -> float:
    """``||L(|V|^p)||_1 / (k^2 ||V||_1^p D1(T))`` with sup-norms over samples.

    ``V`` is a :class:`RadialSource` (or field); ``samples`` is an optional
    ``(r, t)`` pair of arrays inside ``t < T``.
    """
    k = V.k
    r, t = samples if samples is not None else _cone_samples(T, k)
    r, t = np.asarray(r, dtype=float), np.asarray(t, dtype=float)
    Vp = RadialSource(lambda lam, tau: np.abs(V(lam, tau)) ** p, k)
    LV = evaluate_L(Vp, p, r, t, path=path, n_tau=n_tau, n_lam=n_lam)
    num = _norm_at(LV, r, t, 1, k, p)
    nv = _norm_at(V(r, t), r, t, 1, k, p)
    den = k * k * nv**p * float(growth_D1(T, p, k))
    if den == 0:
        raise ValueError("zero denominator: V vanishes on the samples")
    return num / den


def apriori_ratio_mixed(V0, V, p: float, nu: float, T: float, path: str = "split",
                        samples=None, n_tau: int = 24, n_lam: int = 48,
                        delta: float | None = None) -> float:
    """``||L(|V0|^{p-nu} |V|^nu)||_2 / (k^2 ||V0||_3^{p-nu} ||V||_2^nu D2nu(T))``."""
    k = V.k
    r, t = samples if samples is not None else _cone_samples(T, k)
    r, t = np.asarray(r, dtype=float), np.asarray(t, dtype=float)
    src = RadialSource(lambda lam, tau: np.abs(V0(lam, tau)) ** (p - nu)
                       * np.abs(V(lam, tau)) ** nu, k)
    LV = evaluate_L(src, p, r, t, path=path, n_tau=n_tau, n_lam=n_lam)
    num = _norm_at(LV, r, t, 2, k, p)
    den = k * k * _norm_at(V0(r, t), r, t, 3, k, p) ** (p - nu) \
        * _norm_at(V(r, t), r, t, 2, k, p) ** nu * float(growth_D2(T, p, nu, k, delta))
    if den == 0:
        raise ValueError("zero denominator")
    return num / den

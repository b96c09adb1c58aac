"""Radial finite-difference solver for the damped semilinear wave equation.

Solves ``v_tt - (v_rr + v_r/r) + mu/(1+t) v_t = |v|^p`` on a uniform radial
grid with a leapfrog scheme; the damping term is centred in time and solved
for pointwise, which keeps the update explicit.  The origin uses the radial
limit ``Lap v(0) = 4 (v_1 - v_0) / dr^2``.

Numerical lifespans are threshold crossings of ``max |v|``.
"""

from __future__ import annotations

import collections
import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .exponents import ModelParams
from .initial_data import DataProfile

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "SolverState",
    "LifespanStatus",
    "LifespanRecord",
    "RunResult",
    "radial_laplacian",
    "initial_state",
    "step",
    "integrate",
    "run_until_blowup",
    "transform_to_u",
    "transform_to_v",
    "RECORD_COLUMNS",
    "records_to_csv",
    "records_from_csv",
]


@dataclass(frozen=True)
class SolverConfig:
    params: ModelParams
    dr: float = 1.0 / 16.0
    cfl: float = 0.5
    blowup_threshold: float = 1e8
    t_max: float = 100.0
    refinement_levels: int = 2
    nonlinear: bool = True
    window_refine: bool = True
    # cap on grid-cell updates per single run; None means unlimited
    work_budget: float | None = None

    def __post_init__(self):
        if not 0 < self.cfl <= 0.5:
            raise ValueError(f"cfl must lie in (0, 0.5], got {self.cfl}")
        if self.dr <= 0:
            raise ValueError("dr must be positive")
        if self.refinement_levels < 1:
            raise ValueError("refinement_levels must be >= 1")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")

    @property
    def dt(self) -> float:
        return self.cfl * self.dr

    @property
    def r_max(self) -> float:
        return self.params.k + self.t_max + 4.0 * self.dr

    def refined(self, level: int) -> "SolverConfig":
        return replace(self, dr=self.dr / 2**level)


@dataclass
class SolverState:
    """Two time levels ``v(t - dt)`` and ``v(t)`` on the grid ``r_i = i dr``."""

    t: float
    n: int
    dt: float
    dr: float
    v_prev: np.ndarray
    v_cur: np.ndarray

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(self.v_cur.size)

    def copy(self) -> "SolverState":
        return SolverState(self.t, self.n, self.dt, self.dr,
                           self.v_prev.copy(), self.v_cur.copy())


class LifespanStatus(enum.Enum):
    BLEW_UP = "BlewUp"
    SURVIVED = "SurvivedHorizon"
    BUDGET = "BudgetExceeded"
    FAILED = "Failed"


@dataclass
class LifespanRecord:
    epsilon: float
    T_num: float
    status: LifespanStatus
    dr: float
    converged: bool
    threshold: float
    p: float = float("nan")
    mu: float = float("nan")
    case: str = ""
    level_times: tuple = ()

    def __post_init__(self):
        self.status = LifespanStatus(self.status)


def radial_laplacian(v: np.ndarray, dr: float) -> np.ndarray:
    """``v_rr + v_r / r`` with the origin value ``4 (v_1 - v_0) / dr^2``.

    The last grid point is treated as a homogeneous Dirichlet neighbour.
    """
    out = np.empty_like(v)
    vp = np.empty_like(v)
    vp[:-1] = v[1:]
    vp[-1] = 0.0
    vm = np.empty_like(v)
    vm[1:] = v[:-1]
    i = np.arange(1, v.size)
    out[1:] = (vp[1:] - 2.0 * v[1:] + vm[1:]) / dr**2 \
        + (vp[1:] - vm[1:]) / (2.0 * i * dr**2)
    out[0] = 4.0 * (v[1] - v[0]) / dr**2
    return out


def _forcing(v, p, nonlinear):
    if not nonlinear:
        return 0.0
    return np.abs(v) ** p


def initial_state(profile: DataProfile, config: SolverConfig, epsilon: float,
                  source=None, dr: float | None = None) -> SolverState:
    """Data at ``t = 0`` and the Taylor first step ``v(dt)``.

    ``v_tt(0)`` comes from the equation itself with the discrete Laplacian.
    ``source(r, t)`` is an optional extra right-hand side.
    """
    dr = config.dr if dr is None else dr
    dt = config.cfl * dr
    n_r = int(math.ceil((config.params.k + config.t_max) / dr)) + 5
    r = dr * np.arange(n_r)
    v0 = epsilon * profile.f(r)
    v1t = epsilon * profile.g(r)
    mu, p = config.params.mu, config.params.p
    vtt = radial_laplacian(v0, dr) - mu * v1t + _forcing(v0, p, config.nonlinear)
    if source is not None:
        vtt = vtt + source(r, 0.0)
    v_next = v0 + dt * v1t + 0.5 * dt * dt * vtt
    _clip_support(v_next, dt, dr, config.params.k)
    return SolverState(dt, 1, dt, dr, v0, v_next)


def _clip_support(v, t, dr, k):
    # exact zero outside the physical cone r > t + k (plus two cells)
    i_max = int((t + k) / dr) + 3
    if i_max < v.size:
        v[i_max:] = 0.0


def step(state: SolverState, config: SolverConfig, source=None) -> SolverState:
    """One leapfrog step with the damping term centred in time.

    Raises ``FloatingPointError`` when the update produces NaN or Inf.
    """
    dt, dr = state.dt, state.dr
    a = config.params.mu / (1.0 + state.t)
    rhs = radial_laplacian(state.v_cur, dr) + _forcing(state.v_cur, config.params.p,
                                                       config.nonlinear)
    if source is not None:
        rhs = rhs + source(state.r, state.t)
    v_next = (2.0 * state.v_cur - (1.0 - 0.5 * a * dt) * state.v_prev + dt * dt * rhs) \
        / (1.0 + 0.5 * a * dt)
    if not np.all(np.isfinite(v_next)):
        raise FloatingPointError(f"non-finite solution at t={state.t + dt:.6g}")
    _clip_support(v_next, state.t + dt, dr, config.params.k)
    return SolverState(state.t + dt, state.n + 1, dt, dr, state.v_cur, v_next)


@njit(cache=True, inline="always")
def _power(a, p):
    if p == 2.0:
        return a * a
    if p == 1.5:
        return a * math.sqrt(a)
    return a**p


@njit(cache=True)
def _leapfrog(cur, prev, t, dt, dr, mu, p, nonlinear, k):
    """Write ``v(t+dt)`` into ``prev``; returns its max modulus."""
    n = cur.size
    inv_dr2 = 1.0 / (dr * dr)
    damp = 0.5 * mu / (1.0 + t) * dt
    i_max = int((t + dt + k) / dr) + 3
    if i_max > n - 1:
        i_max = n - 1
    peak = 0.0
    left = cur[0]
    for i in range(i_max):
        vc = cur[i]
        right = cur[i + 1]
        if i == 0:
            lap = 4.0 * (right - vc) * inv_dr2
        else:
            lap = (right - 2.0 * vc + left) * inv_dr2 \
                + (right - left) * inv_dr2 / (2.0 * i)
        if nonlinear:
            lap += _power(abs(vc), p)
        # prev[i] is only read here, so it can take the new value
        vn = (2.0 * vc - (1.0 - damp) * prev[i] + dt * dt * lap) / (1.0 + damp)
        prev[i] = vn
        left = vc
        a = abs(vn)
        if not a <= peak:
            peak = a
    # entries past i_max were zero two steps ago and the cone only grows
    return peak


@njit(cache=True)
def _advance(v_prev, v_cur, t0, dt, dr, mu, p, nonlinear, k, nsteps, threshold):
    """Advance up to ``nsteps``; returns (steps, peak before, peak after, blew).

    The two buffers alternate roles.  After an odd number of steps the newest
    level sits in ``v_prev`` and the caller must swap references.
    """
    peak_old = 0.0
    for i in range(v_cur.size):
        a = abs(v_cur[i])
        if a > peak_old:
            peak_old = a
    for s in range(nsteps):
        t = t0 + s * dt
        if s % 2 == 0:
            peak = _leapfrog(v_cur, v_prev, t, dt, dr, mu, p, nonlinear, k)
        else:
            peak = _leapfrog(v_prev, v_cur, t, dt, dr, mu, p, nonlinear, k)
        if not (peak < threshold):
            return s + 1, peak_old, peak, True
        peak_old = peak
    return nsteps, peak_old, peak_old, False


@dataclass
class RunResult:
    status: LifespanStatus
    T_num: float
    steps: int
    state: SolverState
    work: float = 0.0
    history: list = field(default_factory=list)


def _crossing_time(t_before, dt, peak_before, peak_after, threshold):
    if not (math.isfinite(peak_after) and peak_before > 0 and peak_after > peak_before):
        return t_before + dt
    frac = (math.log(threshold) - math.log(peak_before)) \
        / (math.log(peak_after) - math.log(peak_before))
    return t_before + dt * min(max(frac, 0.0), 1.0)


def integrate(profile: DataProfile, config: SolverConfig, epsilon: float,
              dr: float | None = None, state: SolverState | None = None,
              t_stop: float | None = None, checkpoints: collections.deque | None = None,
              history_every: float | None = None) -> RunResult:
    """March until blow-up, ``t_stop`` (default ``t_max``) or the work budget.

    ``checkpoints`` (a bounded deque) receives state copies spaced about 1%
    of the current time apart.  ``history_every`` samples ``(t, max|v|)``.
    """
    if state is None:
        state = initial_state(profile, config, epsilon, dr=dr)
    t_stop = config.t_max if t_stop is None else t_stop
    mu, p, k = config.params.mu, config.params.p, config.params.k
    thr = config.blowup_threshold
    v_prev, v_cur = state.v_prev, state.v_cur
    t, n, dt = state.t, state.n, state.dt
    n_cells = v_cur.size
    work = 0.0
    history = []
    next_sample = t
    last_ckpt = -math.inf
    while t < t_stop - 0.5 * dt:
        chunk = max(1, int(0.01 * max(t, 1.0) / dt))
        if history_every is not None:
            chunk = min(chunk, max(1, int(history_every / dt)))
        chunk = min(chunk, int(math.ceil((t_stop - t) / dt - 0.5)))
        if checkpoints is not None and t >= 1.01 * last_ckpt:
            checkpoints.append(SolverState(t, n, dt, state.dr, v_prev.copy(), v_cur.copy()))
            last_ckpt = t
        taken, peak_before, peak_after, blew = _advance(
            v_prev, v_cur, t, dt, state.dr, mu, p, config.nonlinear, k, chunk, thr)
        if taken % 2 == 1:
            v_prev, v_cur = v_cur, v_prev
        t_before_last = t + (taken - 1) * dt
        t = t + taken * dt
        n += taken
        work += taken * min(n_cells, (t + k) / state.dr)
        if history_every is not None and t >= next_sample:
            history.append((t, float(np.max(np.abs(v_cur)))))
            next_sample = t + history_every
        if blew:
            T = _crossing_time(t_before_last, dt, peak_before, peak_after, thr)
            st = SolverState(t, n, dt, state.dr, v_prev, v_cur)
            return RunResult(LifespanStatus.BLEW_UP, T, n, st, work, history)
        if config.work_budget is not None and work > config.work_budget:
            st = SolverState(t, n, dt, state.dr, v_prev, v_cur)
            return RunResult(LifespanStatus.BUDGET, t, n, st, work, history)
    st = SolverState(t, n, dt, state.dr, v_prev, v_cur)
    return RunResult(LifespanStatus.SURVIVED, t, n, st, work, history)


def _restart_finer(ckpt: SolverState, config: SolverConfig, factor: int = 4) -> SolverState:
    """Re-seed a checkpoint with time step ``dt / factor``.

    ``v(t - h)`` is rebuilt from a second-order Taylor expansion using the
    equation for ``v_tt`` and a centred velocity.
    """
    dt, h = ckpt.dt, ckpt.dt / factor
    mu, p = config.params.mu, config.params.p
    vtt = radial_laplacian(ckpt.v_cur, ckpt.dr) + _forcing(ckpt.v_cur, p, config.nonlinear)
    # v_t at t from backward difference corrected by the acceleration term;
    # the damping enters v_tt through the same velocity
    vt_bd = (ckpt.v_cur - ckpt.v_prev) / dt
    a = mu / (1.0 + ckpt.t)
    vt = (vt_bd + 0.5 * dt * vtt) / (1.0 + 0.5 * dt * a)
    vtt = vtt - a * vt
    v_back = ckpt.v_cur - h * vt + 0.5 * h * h * vtt
    return SolverState(ckpt.t, ckpt.n, h, ckpt.dr, v_back, ckpt.v_cur.copy())


def _single_level(profile, config, epsilon, dr):
    ckpts = collections.deque(maxlen=12)
    res = integrate(profile, config, epsilon, dr=dr, checkpoints=ckpts)
    if res.status is not LifespanStatus.BLEW_UP or not config.window_refine:
        return res
    target = 0.95 * res.T_num
    usable = [c for c in ckpts if c.t <= target]
    if not usable:
        return res
    seed = _restart_finer(usable[-1], config)
    fine = integrate(profile, config, epsilon, state=seed, t_stop=res.T_num * 1.5 + 1.0)
    if fine.status is LifespanStatus.BLEW_UP:
        fine.work += res.work
        return fine
    log.warning("window refinement did not reproduce blow-up (eps=%g, dr=%g)", epsilon, dr)
    return res


def run_until_blowup(profile: DataProfile, config: SolverConfig, epsilon: float,
                     case: str = "") -> LifespanRecord:
    """Numerical lifespan at ``config.refinement_levels`` resolutions.

    Level ``j`` uses ``dr / 2**j``.  ``converged`` means the two finest levels
    agree to within 2% relative.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    times = []
    status = LifespanStatus.BLEW_UP
    for level in range(config.refinement_levels):
        dr = config.dr / 2**level
        res = _single_level(profile, config, epsilon, dr)
        times.append(res.T_num)
        if res.status is not LifespanStatus.BLEW_UP:
            status = res.status
            break
    T = times[-1]
    converged = (status is LifespanStatus.BLEW_UP and len(times) >= 2
                 and abs(times[-1] - times[-2]) < 0.02 * abs(times[-1]))
    return LifespanRecord(epsilon, T, status, config.dr / 2**(len(times) - 1), converged,
                          config.blowup_threshold, config.params.p, config.params.mu,
                          case, tuple(times))


def transform_to_u(values: np.ndarray, t: np.ndarray, mu: float) -> np.ndarray:
    """``u = (1+t)^{mu/2} v``; ``values`` has time along axis 0."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    w = (1.0 + np.asarray(t, dtype=float)) ** (0.5 * mu)
    return np.asarray(values) * w.reshape((-1,) + (1,) * (np.ndim(values) - 1))


def transform_to_v(values: np.ndarray, t: np.ndarray, mu: float) -> np.ndarray:
    if mu <= 0:
        raise ValueError("mu must be positive")
    w = (1.0 + np.asarray(t, dtype=float)) ** (0.5 * mu)
    return np.asarray(values) / w.reshape((-1,) + (1,) * (np.ndim(values) - 1))


RECORD_COLUMNS = ("epsilon", "p", "mu", "case", "T_num", "status", "dr", "converged",
                  "threshold", "level_times")


def records_to_csv(records, header: bool = True) -> str:
    """CSV text with floats in round-trip ``repr`` form."""
    import csv
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(RECORD_COLUMNS)
    for rec in records:
        w.writerow([repr(float(rec.epsilon)), repr(float(rec.p)), repr(float(rec.mu)), rec.case,
                    repr(float(rec.T_num)), rec.status.value, repr(float(rec.dr)),
                    int(bool(rec.converged)), repr(float(rec.threshold)),
                    ";".join(repr(float(x)) for x in rec.level_times)])
    return buf.getvalue()


def records_from_csv(text: str) -> list:
    import csv
    import io
    rows = csv.DictReader(io.StringIO(text))
    out = []
    for row in rows:
        levels = tuple(float(x) for x in row.get("level_times", "").split(";") if x)
        out.append(LifespanRecord(float(row["epsilon"]), float(row["T_num"]),
                                  LifespanStatus(row["status"]), float(row["dr"]),
                                  bool(int(row["converged"])), float(row.get("threshold", "nan")),
                                  float(row["p"]), float(row["mu"]), row["case"], levels))
    return out

"""Epsilon sweeps, lifespan regressions and model selection.

A sweep runs the finite-difference solver once per point of a geometric
ladder ``eps_i = eps0 * ratio**i`` and regresses ``log T`` against either
``log eps`` (power law) or ``eps**-theta`` (exponential laws).
"""

from __future__ import annotations

import configparser
import enum
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .exponents import DataClass, LifespanForm, ModelParams, predicted_lifespan
from .initial_data import DataProfile, make_case_A, make_case_B
from .pde_solver import (LifespanRecord, LifespanStatus, SolverConfig, records_from_csv,
                         records_to_csv, run_until_blowup)

log = logging.getLogger(__name__)

__all__ = [
    "CASES",
    "make_profile",
    "SweepConfig",
    "load_config",
    "run_sweep",
    "FitModel",
    "FitResult",
    "InsufficientDataError",
    "fit_power_law",
    "fit_exp_law",
    "ModelSelection",
    "select_model",
    "plot_data_csv",
    "write_outputs",
]

CASES = ("A", "B-PosF", "B-NegIntF")


def make_profile(case: str, k: float = 1.0) -> DataProfile:
    if case == "A":
        return make_case_A(k)
    if case == "B-PosF":
        return make_case_B(k, "PosF")
    if case == "B-NegIntF":
        return make_case_B(k, "NegIntF")
    raise ValueError(f"unknown data case {case!r}; choose from {CASES}")


def _data_class(case: str) -> DataClass:
    return DataClass.NONZERO_INTEGRAL if case == "A" else DataClass.ZERO_INTEGRAL


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SweepConfig:
    p: float = 1.5
    mu: float = 2.0
    k: float = 1.0
    case: str = "A"
    eps0: float = 1.0
    ratio: float = 0.7
    points: int = 8
    dr: float = 1.0 / 16.0
    cfl: float = 0.5
    threshold: float = 1e8
    t_max: float = 1000.0
    refinement_levels: int = 2
    work_budget: float | None = None
    workers: int = 1
    output_dir: str = "."
    name: str = "sweep"

    def __post_init__(self):
        if self.points < 5:
            raise ValueError("an epsilon ladder needs at least 5 points")
        if not 0 < self.ratio < 1:
            raise ValueError("ladder ratio must lie in (0, 1)")
        if not self.eps0 > 0:
            raise ValueError("eps0 must be positive")
        if self.case not in CASES:
            raise ValueError(f"unknown data case {self.case!r}")
        ModelParams(2, self.mu, self.p, self.k, self.eps0)

    @property
    def ladder(self) -> list:
        return [self.eps0 * self.ratio**i for i in range(self.points)]

    def solver_config(self) -> SolverConfig:
        return SolverConfig(ModelParams(2, self.mu, self.p, self.k, self.eps0), dr=self.dr,
                            cfl=self.cfl, blowup_threshold=self.threshold, t_max=self.t_max,
                            refinement_levels=self.refinement_levels,
                            work_budget=self.work_budget)


_SCHEMA = {
    "model": {"p": float, "mu": float, "k": float},
    "data": {"case": str},
    "ladder": {"eps0": float, "ratio": float, "points": int},
    "solver": {"dr": float, "cfl": float, "threshold": float, "t_max": float,
               "refinement_levels": int, "work_budget": float},
    "run": {"workers": int, "output_dir": str, "name": str},
}


def load_config(text: str, base_dir: str | None = None) -> SweepConfig:
    """Parse the INI-style ``key = value`` sweep file (see README for the schema)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.read_string(text)
    kw = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in cp[section].items():
            if key not in _SCHEMA[section]:
                raise ValueError(f"unknown key {key!r} in [{section}]")
            if key == "work_budget" and raw.strip().lower() in ("", "none"):
                kw[key] = None
                continue
            kw[key] = _SCHEMA[section][key](raw.strip())
    if base_dir is not None and not os.path.isabs(kw.get("output_dir", ".")):
        kw["output_dir"] = os.path.join(base_dir, kw.get("output_dir", "."))
    return SweepConfig(**kw)


# --------------------------------------------------------------------------
# running


def _run_point(args):
    config, eps = args
    profile = make_profile(config.case, config.k)
    solver = config.solver_config()
    try:
        return run_until_blowup(profile, solver, eps, case=config.case)
    except Exception as exc:  # recorded, the sweep goes on
        log.warning("solver failed at eps=%g: %s", eps, exc)
        return LifespanRecord(eps, math.nan, LifespanStatus.FAILED, config.dr, False,
                              config.threshold, config.p, config.mu, config.case)


def run_sweep(config: SweepConfig) -> list:
    """One :class:`LifespanRecord` per ladder point, in ladder order."""
    jobs = [(config, eps) for eps in config.ladder]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_run_point, jobs))
    return [_run_point(j) for j in jobs]


# --------------------------------------------------------------------------
# fits


class FitModel(enum.Enum):
    POWER_LAW = "PowerLaw"
    EXP_HALF = "ExpHalf"
    EXP_TWO_THIRDS = "ExpTwoThirds"


_THETA = {FitModel.EXP_HALF: 0.5, FitModel.EXP_TWO_THIRDS: 2.0 / 3.0}


class InsufficientDataError(ValueError):
    pass


@dataclass
class FitResult:
    model: FitModel
    slope: float
    intercept: float
    r_squared: float
    predicted: float = math.nan
    relative_error: float = math.nan
    n_points: int = 0

    def curve(self, eps):
        eps = np.asarray(eps, dtype=float)
        if self.model is FitModel.POWER_LAW:
            return np.exp(self.intercept + self.slope * np.log(eps))
        return np.exp(self.intercept + self.slope * eps ** (-_THETA[self.model]))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.value
        return d


def _blown(records, minimum=4):
    pts = sorted((float(r.epsilon), float(r.T_num)) for r in records
                 if LifespanStatus(r.status) is LifespanStatus.BLEW_UP and math.isfinite(r.T_num))
    if len(pts) < minimum:
        raise InsufficientDataError(
            f"only {len(pts)} blow-up records; the ladder looks like global existence")
    return np.array(pts).T


def _linear_fit(x, y):
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def _predicted_power(records) -> float:
    r0 = records[0]
    try:
        pred = predicted_lifespan(ModelParams(2, r0.mu, r0.p), _data_class(r0.case))
    except ValueError:
        return math.nan
    return pred.exponent if pred.form is LifespanForm.POWER_LAW else math.nan


def fit_power_law(records, predicted: float | None = None) -> FitResult:
    """Least squares of ``log T`` on ``log eps``."""
    eps, T = _blown(records)
    slope, icpt, r2 = _linear_fit(np.log(eps), np.log(T))
    pred = _predicted_power(records) if predicted is None else predicted
    rel = abs(slope - pred) / abs(pred) if math.isfinite(pred) and pred != 0 else math.nan
    return FitResult(FitModel.POWER_LAW, slope, icpt, r2, pred, rel, eps.size)


def fit_exp_law(records, theta: float = 0.5) -> FitResult:
    """Least squares of ``log T`` on ``eps**-theta``; the slope is the constant ``c``."""
    if math.isclose(theta, 0.5):
        model = FitModel.EXP_HALF
    elif math.isclose(theta, 2.0 / 3.0):
        model = FitModel.EXP_TWO_THIRDS
    else:
        raise ValueError("theta must be 1/2 or 2/3")
    eps, T = _blown(records)
    slope, icpt, r2 = _linear_fit(eps ** (-theta), np.log(T))
    return FitResult(model, slope, icpt, r2, theta, math.nan, eps.size)


@dataclass
class ModelSelection:
    best: FitResult
    fits: list
    margin: float
    inconclusive: bool
    band: float = 0.005

    @property
    def verdict(self) -> str:
        return "inconclusive" if self.inconclusive else self.best.model.value

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "margin": self.margin, "band": self.band,
                "best": self.best.to_dict(), "fits": [f.to_dict() for f in self.fits]}


def select_model(records, band: float = 0.005) -> ModelSelection:
    """Fit all three laws and pick the highest ``r^2``; a lead below ``band``
    is reported as inconclusive."""
    if sum(1 for r in records if LifespanStatus(r.status) is LifespanStatus.BLEW_UP) < 5:
        raise InsufficientDataError("model selection needs at least 5 blow-up records")
    fits = [fit_power_law(records), fit_exp_law(records, 0.5), fit_exp_law(records, 2.0 / 3.0)]
    ranked = sorted(fits, key=lambda f: f.r_squared, reverse=True)
    margin = ranked[0].r_squared - ranked[1].r_squared
    return ModelSelection(ranked[0], fits, margin, margin < band, band)


# --------------------------------------------------------------------------
# outputs


def plot_data_csv(records, fits) -> str:
    """Columns ``x`` (eps), ``y`` (T_num), then one model curve per fit."""
    import csv
    import io
    rows = sorted((float(r.epsilon), float(r.T_num)) for r in records)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"] + [f.model.value for f in fits])
    for eps, T in rows:
        w.writerow([repr(eps), repr(T)] + [repr(float(f.curve(eps))) for f in fits])
    return buf.getvalue()


def _fits_document(config: SweepConfig | None, records) -> dict:
    doc = {}
    if config is not None:
        doc["config"] = asdict(config)
        doc["config"].pop("output_dir")
    try:
        sel = select_model(records)
        doc["selection"] = sel.to_dict()
    except InsufficientDataError as exc:
        doc["selection"] = {"verdict": "insufficient", "reason": str(exc)}
    blown = sum(1 for r in records if LifespanStatus(r.status) is LifespanStatus.BLEW_UP)
    doc["n_records"] = len(records)
    doc["n_blew_up"] = blown
    doc["n_converged"] = sum(1 for r in records if r.converged)
    return doc


def write_outputs(records, out_dir: str, name: str = "sweep",
                  config: SweepConfig | None = None, figure: bool = True) -> dict:
    """Write records CSV, fits JSON, plot-data CSV (and a PNG figure)."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {k: os.path.join(out_dir, f"{name}_{k}") for k in
             ("records.csv", "fits.json", "plot.csv")}
    with open(paths["records.csv"], "w") as fh:
        fh.write(records_to_csv(records))
    doc = _fits_document(config, records)
    with open(paths["fits.json"], "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    fits = []
    if "fits" in doc["selection"]:
        fits = select_model(records).fits
    with open(paths["plot.csv"], "w") as fh:
        fh.write(plot_data_csv(records, fits))
    if figure and fits:
        from .plotting import lifespan_figure
        paths["figure.png"] = os.path.join(out_dir, f"{name}_figure.png")
        lifespan_figure(records, fits, paths["figure.png"])
    return paths


def read_records(path: str) -> list:
    with open(path) as fh:
        return records_from_csv(fh.read())

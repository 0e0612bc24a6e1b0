"""Rate reports: fitting decay exponents and writing them out."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FitError
from .radial import _atomic_write

__all__ = ["RateReport", "fit_power_law", "fit_exponential", "make_report", "dyadic_times",
           "SATURATION_FLOOR"]

SATURATION_FLOOR = 1e-300


def dyadic_times(lo_exp: int = 4, hi_exp: int = 10) -> np.ndarray:
    """``2**lo_exp, ..., 2**hi_exp``."""
    return 2.0 ** np.arange(lo_exp, hi_exp + 1)


def _clean(times, norms):
    t = np.asarray(times, dtype=float)
    y = np.asarray(norms, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise FitError("times and norms must be 1-D arrays of equal length")
    if t.size < 2:
        raise FitError(f"need at least 2 samples to fit a slope, got {t.size}")
    if np.any(np.diff(t) <= 0):
        raise FitError("times must be strictly increasing")
    warnings = []
    ok = np.isfinite(y) & (y > SATURATION_FLOOR)
    if not np.all(ok):
        warnings.append(f"saturation: {int((~ok).sum())} norm(s) below {SATURATION_FLOOR:g} or non-finite were dropped")
    if ok.sum() < 2:
        raise FitError("fewer than 2 usable norms after dropping saturated samples")
    return t, y, ok, warnings


def _linfit(x, y):
    a = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid ** 2)))


def fit_power_law(times, norms):
    """Least-squares slope of ``log norm`` against ``log t``.

    Returns ``(slope, intercept, rms_residual, warnings)``.
    """
    t, y, ok, warnings = _clean(times, norms)
    if np.any(t[ok] <= 0):
        raise FitError("power-law fits need positive times")
    lt, ly = np.log(t[ok]), np.log(y[ok])
    slope, icpt, rms = _linfit(lt, ly)
    if lt.size >= 3:
        local = np.diff(ly) / np.diff(lt)
        spread = float(local.max() - local.min())
        if spread > 0.3:
            warnings.append(f"non-power-law behaviour: local slopes range over {spread:.3f} "
                            f"(from {local.min():.3f} to {local.max():.3f})")
    return slope, icpt, rms, warnings


def fit_exponential(times, norms):
    """Least-squares slope of ``log norm`` against ``t``."""
    t, y, ok, warnings = _clean(times, norms)
    slope, icpt, rms = _linfit(t[ok], np.log(y[ok]))
    if rms > 0.5:
        warnings.append(f"non-exponential behaviour: rms log residual {rms:.3f}")
    return slope, icpt, rms, warnings


@dataclass
class RateReport:
    """Measured against predicted decay exponent for one experiment.

    ``sided`` is ``"upper"`` when the prediction is an upper bound (pass iff
    ``measured <= predicted + tolerance``) and ``"two-sided"`` when it is
    expected to be attained. Both verdicts are always recorded. For
    ``form="exp"`` the slope is in ``log norm`` per unit time and the check
    is ``measured < predicted``. For ``form="bounded"`` the check is
    ``max(norms)/norms[0] < tolerance``.
    """

    experiment: str
    times: np.ndarray
    norms: np.ndarray
    measured_slope: float
    predicted_slope: float
    slope_tolerance: float
    sided: str = "upper"
    form: str = "power"
    metadata: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    fit_rms: float = 0.0

    def __post_init__(self):
        if self.sided not in ("upper", "two-sided"):
            raise ValueError(f"sided must be 'upper' or 'two-sided', got {self.sided!r}")
        if self.form not in ("power", "exp", "bounded"):
            raise ValueError(f"unknown report form {self.form!r}")
        self.times = np.asarray(self.times, dtype=float)
        self.norms = np.asarray(self.norms, dtype=float)

    @property
    def deviation(self) -> float:
        return self.measured_slope - self.predicted_slope

    @property
    def upper_pass(self) -> bool:
        if self.form == "exp":
            return bool(self.measured_slope < self.predicted_slope)
        if self.form == "bounded":
            return bool(self.ratio < self.slope_tolerance)
        return bool(self.deviation <= self.slope_tolerance)

    @property
    def two_sided_pass(self) -> bool:
        if self.form != "power":
            return self.upper_pass
        return bool(abs(self.deviation) <= self.slope_tolerance)

    @property
    def passed(self) -> bool:
        return self.two_sided_pass if self.sided == "two-sided" else self.upper_pass

    @property
    def ratio(self) -> float:
        """``max(norms) / norms[0]``; used by boundedness checks."""
        return float(np.max(self.norms) / self.norms[0])

    def summary(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        if self.form == "bounded":
            return f"{tag} {self.experiment}: sup/initial = {self.ratio:.4g} (limit {self.slope_tolerance:g})"
        if self.form == "exp":
            return (f"{tag} {self.experiment}: exponential slope {self.measured_slope:.4f} "
                    f"(need < {self.predicted_slope:g})")
        return (f"{tag} {self.experiment}: measured {self.measured_slope:.3f}, predicted "
                f"{self.predicted_slope:.3f}, tol {self.slope_tolerance:g} ({self.sided})")

    def to_dict(self, config_echo=None) -> dict:
        out = {
            "experiment": self.experiment,
            "config_echo": config_echo if config_echo is not None else {},
            "predicted": _num(self.predicted_slope),
            "measured": _num(self.measured_slope),
            "tolerance": _num(self.slope_tolerance),
            "pass": self.passed,
            "warnings": list(self.warnings),
            "sided": self.sided,
            "form": self.form,
            "upper_pass": self.upper_pass,
            "two_sided_pass": self.two_sided_pass,
            "fit_rms": _num(self.fit_rms),
            "times": [_num(x) for x in self.times],
            "norms": [_num(x) for x in self.norms],
            "metadata": _jsonable(self.metadata),
        }
        if self.form == "bounded":
            out["ratio"] = _num(self.ratio)
        return out

    def to_json(self, config_echo=None) -> str:
        return json.dumps(self.to_dict(config_echo), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "norm", "predicted_slope", "measured_slope"])
        for t, y in zip(self.times, self.norms):
            w.writerow([repr(float(t)), repr(float(y)), repr(float(self.predicted_slope)),
                        repr(float(self.measured_slope))])
        return buf.getvalue()

    def write(self, json_path=None, csv_path=None, config_echo=None) -> None:
        if json_path is not None:
            _atomic_write(json_path, self.to_json(config_echo))
        if csv_path is not None:
            _atomic_write(csv_path, self.to_csv())


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return _num(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def make_report(experiment: str, times, norms, predicted: float, tolerance: float = 0.15,
                sided: str = "upper", form: str = "power", metadata=None) -> RateReport:
    """Fit ``norms`` against ``times`` and wrap the result in a :class:`RateReport`."""
    if form == "exp":
        slope, _, rms, warns = fit_exponential(times, norms)
    else:
        slope, _, rms, warns = fit_power_law(times, norms)
    if form == "power" and sided == "upper" and slope < predicted - tolerance:
        warns.append(f"estimate not saturated: measured slope {slope:.3f} lies below the bound {predicted:.3f}")
    return RateReport(experiment, times, norms, slope, predicted, tolerance, sided, form,
                      dict(metadata or {}), warns, rms)

"""Decay-rate laboratory for the dissipative case ``delta > 0``.

Predicted exponents are kept as exact fractions so that algebraic identities
between the tables can be checked exactly. Measured exponents come from
least-squares fits of ``log ||.||`` against ``log t`` (or ``t`` for the
exponential checks) over dyadic time ladders.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, FitError, UsageError
from .kernels import (DataTriple, KernelEvalContext, KernelId, KernelPart, eval_kernel_hat,
                      eval_profile_J, profile_coefficient)
from .lab import GridPolicy, map_ordered, physical_norms, wave_extent
from .radial import CutoffSpec
from .report import RateReport, dyadic_times, make_report
from .roots import MgtParams, solve_characteristic, three_real_interval

__all__ = [
    "ExponentQuery",
    "LemmaQuery",
    "Oscillation",
    "NormKind",
    "Zone",
    "Multiplier",
    "predicted_exponent",
    "predicted_exponent_exact",
    "exponent_branch",
    "l1_exponent",
    "linf_exponent",
    "lr_exponent",
    "lr_exponent_summed",
    "lemma_exponent",
    "lab_cutoff",
    "gaussian_data",
    "band_bump",
    "lemma_l1_check",
    "kernel_prop_check",
    "run_decay_experiment",
    "high_freq_decay_check",
    "multiplier_pointwise_check",
    "TOLERANCE",
    "PAIRED_TOLERANCE",
]

TOLERANCE = 0.15
PAIRED_TOLERANCE = 0.2


def _fr(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"expected a finite number, got {x}")
    return Fraction(repr(x))


def _inv(x) -> Fraction:
    """``1/x`` as a fraction, with ``1/inf = 0``."""
    if isinstance(x, float) and math.isinf(x):
        return Fraction(0)
    return 1 / _fr(x)


# ----------------------------------------------------------------- exponent tables

@dataclass(frozen=True)
class ExponentQuery:
    """Theorem inputs: dimension, Lebesgue pair, derivative order, and profile subtraction."""

    n: int
    p: float
    q: float
    s: float
    refined: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"hypothesis n >= 2 violated (n={self.n})")
        p, q, s = float(self.p), float(self.q), float(self.s)
        if not math.isfinite(q):
            raise DomainError("hypothesis q < infinity violated")
        if not p >= 1:
            raise DomainError(f"hypothesis 1 <= p violated (p={self.p})")
        if not p <= q:
            raise DomainError(f"hypothesis p <= q violated (p={self.p}, q={self.q})")
        if q == 1:
            raise DomainError("hypothesis q != 1 violated")
        if not s >= 0:
            raise DomainError(f"hypothesis s >= 0 violated (s={self.s})")

    @property
    def gap(self) -> Fraction:
        return _inv(self.p) - _inv(self.q)


def exponent_branch(query: ExponentQuery) -> str:
    s = _fr(query.s)
    if query.refined:
        if s == 0:
            return "s=0"
        return "s in (0,1]" if s <= 1 else "s>1"
    if s == 1:
        return "s=1"
    return "s in [0,1)u(1,2]" if s <= 2 else "s>2"


def predicted_exponent_exact(query: ExponentQuery) -> Fraction:
    """The theorem's time exponent as an exact fraction."""
    n = query.n
    F = Fraction(n // 2)
    g = query.gap
    s = _fr(query.s)
    half = Fraction(1, 2)
    if query.refined:
        if s == 0:
            return -(half + Fraction(n, 2) + F / 2) * g + half + F / 2
        if s <= 1:
            return -(1 + Fraction(n, 2) + F / 2) * g + 1 + F / 2 - s / 2
        return -Fraction(3 * n, 4) * g + Fraction(n, 4) - s / 2
    if s == 1:
        return -(half + Fraction(n, 2) + F / 2) * g + half + F / 2
    if s <= 2:
        return -(1 + Fraction(n, 2) + F / 2) * g + Fraction(3, 2) + F / 2 - s / 2
    return -Fraction(3 * n, 4) * g + half + Fraction(n, 4) - s / 2


def predicted_exponent(query: ExponentQuery) -> float:
    """Time exponent of the ``(L^q cap L^p) -> L^q`` estimate (see :func:`predicted_exponent_exact`)."""
    return float(predicted_exponent_exact(query))


def _check_ns(n, s, min_n=1):
    if int(n) != n or n < min_n:
        raise DomainError(f"dimension must be an integer >= {min_n}, got {n}")
    s = _fr(s)
    if s < 0:
        raise DomainError(f"s must be >= 0, got {s}")
    return int(n), s


def l1_exponent(ell: int, s, n: int, subtracted: bool = False) -> Fraction:
    """Exponent of the small-frequency ``L^1`` kernel estimate for ``K_ell`` (or ``K_ell - profile``)."""
    n, s = _check_ns(n, s)
    F = Fraction(n // 2)
    h = Fraction(1, 2)
    if subtracted:
        if ell == 0:
            raise UsageError("no profile is subtracted from K_0")
        if ell == 1:
            return (1 + F) / 2 if s == 0 else Fraction(n, 4) - h - s / 2
        if ell == 2:
            if s == 0:
                return (1 + F) / 2
            return (2 + F) / 2 - s / 2 if s <= 1 else Fraction(n, 4) - s / 2
    if ell == 0:
        if s == 0:
            return (1 + F) / 2
        return (2 + F) / 2 - s / 2 if s <= 1 else Fraction(n, 4) - s / 2
    if ell == 1:
        if s == 1 or s > 2:
            return Fraction(n, 4) + h - s / 2
        return (3 + F) / 2 - s / 2
    if ell == 2:
        if s == 1:
            return (1 + F) / 2
        return (3 + F) / 2 - s / 2 if s <= 2 else Fraction(n, 4) + h - s / 2
    raise DomainError(f"ell must be 0, 1 or 2, got {ell}")


def linf_exponent(ell: int, s, n: int, subtracted: bool = False) -> Fraction:
    """Exponent of the small-frequency ``L^infty`` kernel estimate (needs ``n >= 2``)."""
    n, s = _check_ns(n, s, min_n=2)
    if ell not in (0, 1, 2):
        raise DomainError(f"ell must be 0, 1 or 2, got {ell}")
    if subtracted and ell == 0:
        raise UsageError("no profile is subtracted from K_0")
    if ell == 0 or subtracted:
        return -Fraction(n, 2) - s / 2
    return -Fraction(n, 2) + Fraction(1, 2) - s / 2


def lr_exponent_summed(s, n: int, r, refined: bool = False) -> Fraction:
    """Exponent of the ``L^r`` estimate for the sum over kernels, as printed."""
    n, s = _check_ns(n, s, min_n=2)
    ir = _inv(r)
    if ir < 0 or ir > 1:
        raise DomainError(f"r must lie in [1, inf], got {r}")
    F = Fraction(n // 2)
    h = Fraction(1, 2)
    N = Fraction(n, 2)
    if refined:
        if s == 0:
            return (h + N + F / 2) * ir - N
        if s <= 1:
            return (1 + N + F / 2) * ir - N - s / 2
        return Fraction(3 * n, 4) * ir - N - s / 2
    if s == 1:
        return (h + N + F / 2) * ir - N
    if s <= 2:
        return (1 + N + F / 2) * ir - N + h - s / 2
    return Fraction(3 * n, 4) * ir - N + h - s / 2


def lr_exponent(ell: int, s, n: int, r, subtracted: bool = False) -> Fraction:
    """Per-kernel ``L^r`` exponent by log-convex interpolation of the ``L^1`` and ``L^infty`` ones."""
    ir = _inv(r)
    if ir < 0 or ir > 1:
        raise DomainError(f"r must lie in [1, inf], got {r}")
    e1 = l1_exponent(ell, s, n, subtracted)
    einf = linf_exponent(ell, s, n, subtracted)
    return ir * e1 + (1 - ir) * einf


class Oscillation(enum.Enum):
    SINC = "sinc"
    SINCOS = "sincos"
    EXP = "exp"


@dataclass(frozen=True)
class LemmaQuery:
    """Parameters of the oscillatory ``L^1`` lemmas.

    ``g0`` picks ``sin`` or ``cos`` for the :attr:`Oscillation.SINCOS` family.
    For :attr:`Oscillation.EXP` the multiplier is
    ``chi1 exp(-c1 t + c2 rho^2 t) rho^(2 beta)``.
    """

    n: int
    beta: float
    c1: float
    c2: float
    oscillation: Oscillation
    g0: str = "cos"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be an integer >= 1, got {self.n}")
        if not self.beta >= 0:
            raise DomainError(f"beta must be >= 0, got {self.beta}")
        if not self.c1 > 0:
            raise DomainError(f"c1 must be > 0, got {self.c1}")
        if not isinstance(self.oscillation, Oscillation):
            object.__setattr__(self, "oscillation", Oscillation(self.oscillation))
        if self.oscillation is not Oscillation.EXP and self.c2 == 0:
            raise DomainError("c2 must be non-zero for the oscillating kernels")
        if self.g0 not in ("sin", "cos"):
            raise DomainError(f"g0 must be 'sin' or 'cos', got {self.g0!r}")


def lemma_exponent(query: LemmaQuery) -> Fraction | None:
    """Stated growth exponent for the sinc and sin/cos families (``None`` for EXP)."""
    F = Fraction(query.n // 2)
    b = _fr(query.beta)
    if query.oscillation is Oscillation.SINC:
        return (2 + F) / 2 + Fraction(1, 2) - b
    if query.oscillation is Oscillation.SINCOS:
        if b == 0 or b > Fraction(1, 2):
            return Fraction(query.n, 4) - b
        return (2 + F) / 2 - b
    return None


# ----------------------------------------------------------------- data and cutoffs

def lab_cutoff(params: MgtParams, t_min: float = 16.0, target: float = 8.0):
    """Cutoff for rate experiments plus a list of warnings.

    The default ``eps0`` is tiny, so at desk-scale times ``exp(-c rho^2 t)``
    has not yet localised inside ``chi1`` and fitted slopes would reflect the
    cutoff rather than the kernel. The lab widens ``eps0`` until
    ``(delta/2) eps0^2 t_min >= target``. The widening stops short of the
    three-real-root band, and ``N0`` is pushed out so that ``2 eps0 < N0``.
    """
    if params.delta <= 0:
        raise DomainError("the dissipative lab needs delta > 0")
    base = CutoffSpec.default_for(params)
    warnings = []
    eps0 = max(base.eps0, math.sqrt(target / (0.5 * params.delta * t_min)))
    band = three_real_interval(params)
    if band is not None and 2 * eps0 >= band[0]:
        capped = 0.45 * band[0]
        if capped > base.eps0:
            warnings.append(f"eps0 capped at {capped:.4g} below the three-real-root band; "
                            f"early-time slopes may be cutoff-dominated")
            eps0 = capped
        else:
            eps0 = base.eps0
    n0 = max(base.N0, 4 * eps0)
    spec = CutoffSpec(eps0, n0)
    spec.validate(params)
    return spec, warnings


def gaussian_data(width: float = 1.0, weights=(1.0, 1.0, 1.0)):
    """Frequency-side Gaussians ``w_ell exp(-rho^2 / (2 width^2))`` as callables."""
    def make(w):
        return lambda rho: w * np.exp(-0.5 * (np.asarray(rho, float) / width) ** 2)
    return tuple(make(w) for w in weights)


def band_bump(lo: float, hi: float, weights=(1.0, 1.0, 1.0)):
    """Smooth bumps supported in ``[lo, hi]`` (``exp(-1/(1-x^2))`` profile) as callables."""
    mid, rad = (lo + hi) / 2, (hi - lo) / 2

    def base(rho):
        x = (np.asarray(rho, float) - mid) / rad
        out = np.zeros_like(x)
        inside = np.abs(x) < 1
        out[inside] = np.exp(1 - 1 / (1 - x[inside] ** 2))
        return out

    def make(w):
        return lambda rho: w * base(rho)
    return tuple(make(w) for w in weights)


def _data_callables(data):
    """Three callables from a :class:`DataTriple` (spline, zero outside its grid) or callables."""
    if isinstance(data, DataTriple):
        out = []
        for f in data:
            x, y = f.nodes, f.values
            spline = CubicSpline(x, y)

            def fn(rho, spline=spline, lo=x[0], hi=x[-1]):
                rho = np.asarray(rho, float)
                v = spline(np.clip(rho, lo, hi))
                return np.where((rho >= lo) & (rho <= hi), v, 0.0)
            out.append(fn)
        return tuple(out)
    data = tuple(data)
    if len(data) != 3 or not all(callable(f) for f in data):
        raise UsageError("data must be a DataTriple or three callables")
    return data


def _pair_speed(params: MgtParams, lo: float, hi: float) -> float:
    """Upper bound on the group speed d(muI)/d(rho) over ``[lo, hi]``."""
    rho = np.linspace(lo, hi, 2049)
    mi = np.asarray(solve_characteristic(params, rho).muI)
    g = np.gradient(mi, rho)
    return float(max(1.0, 1.1 * np.max(np.abs(g))))


# ----------------------------------------------------------------- experiments

def _series(experiment, multiplier_at, n, qs, band, extent_at, times, breakpoints, policy, workers):
    def one(t):
        return physical_norms(multiplier_at(t), n, qs, band, extent_at(t), breakpoints, policy)
    return map_ordered(one, times, workers)


def lemma_l1_check(query: LemmaQuery, times=None, eps0: float | None = None,
                   policy: GridPolicy = GridPolicy(), sided: str = "upper",
                   tolerance: float = TOLERANCE, workers: int = 1) -> RateReport:
    """Measure the ``L^1`` growth of the lemma multipliers.

    For the sinc and sin/cos families this fits the power-law slope and
    compares it with :func:`lemma_exponent`. For the exponential family it
    reports ``max_t ||I0|| exp(c1 t/2)`` relative to its value at the first
    time (pass iff below 10). The factor ``exp(-c1 t)`` is applied
    analytically, so nothing underflows.
    """
    osc = query.oscillation
    if times is None:
        times = dyadic_times(0, 10) if osc is Oscillation.EXP else dyadic_times()
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0):
        raise UsageError("lemma checks need positive times")
    n, c1, c2, beta = query.n, query.c1, query.c2, query.beta
    if eps0 is None:
        eps0 = 0.1 if osc is Oscillation.EXP else max(0.1, math.sqrt(8.0 / (c1 * times[0])))
    if osc is Oscillation.EXP and c2 > 0 and 4 * c2 * eps0 ** 2 >= c1 / 2:
        raise DomainError("exponential lemma needs 4 c2 eps0^2 < c1/2 so the growth stays inside the decay")
    cut = CutoffSpec(eps0, 4 * eps0 + 1)
    band = (0.0, 2 * eps0)

    def multiplier_at(t):
        def m(rho):
            base = cut.chi1(rho) * rho ** (2 * beta)
            if osc is Oscillation.SINC:
                return base * np.exp(-c1 * rho ** 2 * t) * eval_profile_J(c2 * t, rho, 0.0) / c2
            if osc is Oscillation.SINCOS:
                g = np.sin if query.g0 == "sin" else np.cos
                return base * np.exp(-c1 * rho ** 2 * t) * g(c2 * rho * t)
            return base * np.exp(c2 * rho ** 2 * t)
        return m

    if osc is Oscillation.EXP:
        def extent_at(t):
            spread = 4 * abs(c2) * 2 * eps0 * t if c2 > 0 else 14 * math.sqrt(2 * abs(c2) * t)
            return spread + 40.0
    else:
        def extent_at(t):
            return wave_extent(t, abs(c2), c1)
    res = _series("lemma", multiplier_at, n, [1], band, extent_at, times, [eps0], policy, workers)
    norms = np.array([r.norms[1] for r in res])
    meta = {"query": {"n": n, "beta": beta, "c1": c1, "c2": c2, "oscillation": osc.value, "g0": query.g0},
            "eps0": eps0, "grid_policy": policy.as_dict(),
            "freq_nodes": [r.freq_nodes for r in res], "space_nodes": [r.space_nodes for r in res]}
    if osc is Oscillation.EXP:
        scaled = norms * np.exp(-c1 * times / 2)
        return make_report(f"lemma-exp n={n} beta={beta}", times, scaled, 0.0, 10.0, "upper", "bounded", meta)
    pred = float(lemma_exponent(query))
    name = f"lemma-{osc.value}{'' if osc is Oscillation.SINC else '-' + query.g0} n={n} beta={beta}"
    return make_report(name, times, norms, pred, tolerance, sided, "power", meta)


class NormKind(enum.Enum):
    L1 = "L1"
    LINF = "Linf"
    LR = "Lr"


def kernel_prop_check(ell: int, s: float, norm, subtract_profile: bool, n: int, times=None,
                      params: MgtParams = MgtParams(1.0, 1.0), r: float | None = None,
                      cutoff: CutoffSpec | None = None, policy: GridPolicy = GridPolicy(),
                      sided: str = "upper", tolerance: float = TOLERANCE, workers: int = 1) -> RateReport:
    """Measure ``||F^-1(chi1 rho^s (K_ell - [profile]))||`` in ``L^1``, ``L^infty`` or ``L^r``."""
    norm = NormKind(norm)
    if ell not in (0, 1, 2):
        raise DomainError(f"ell must be 0, 1 or 2, got {ell}")
    if subtract_profile and ell == 0:
        raise UsageError("no profile is subtracted from K_0")
    if norm is not NormKind.L1 and n < 2:
        raise DomainError("L^infty and L^r kernel estimates need n >= 2")
    if params.delta <= 0:
        raise DomainError("the dissipative lab needs delta > 0")
    times = dyadic_times() if times is None else np.asarray(times, dtype=float)
    warnings = []
    if cutoff is None:
        cutoff, warnings = lab_cutoff(params, float(times[0]))
    if norm is NormKind.L1:
        q, pred = 1.0, l1_exponent(ell, s, n, subtract_profile)
    elif norm is NormKind.LINF:
        q, pred = math.inf, linf_exponent(ell, s, n, subtract_profile)
    else:
        if r is None:
            raise UsageError("L^r check needs r")
        q, pred = float(r), lr_exponent(ell, s, n, r, subtract_profile)
    band = (0.0, 2 * cutoff.eps0)
    ctx = {}
    coef = profile_coefficient(ell, params.tau) if subtract_profile else 0.0

    def multiplier_at(t):
        def m(rho):
            key = rho.tobytes()
            c = ctx.get(key)
            if c is None:
                c = ctx.setdefault(key, KernelEvalContext.build(params, rho))
            v = eval_kernel_hat(KernelId(ell), t, rho, params, context=c)
            if subtract_profile:
                v = v - coef * eval_profile_J(t, rho, params.delta)
            return cutoff.chi1(rho) * rho ** s * v
        return m

    speed = _pair_speed(params, *band)
    res = _series("prop", multiplier_at, n, [q], band,
                  lambda t: wave_extent(t, speed, params.delta / 2), times, [cutoff.eps0], policy, workers)
    norms = np.array([x.norms[q] for x in res])
    meta = {"ell": ell, "s": s, "norm": norm.value, "r": r, "n": n, "subtract_profile": subtract_profile,
            "params": {"tau": params.tau, "delta": params.delta},
            "cutoff": {"eps0": cutoff.eps0, "N0": cutoff.N0}, "grid_policy": policy.as_dict()}
    name = f"kernel-{norm.value} ell={ell} s={s} n={n}{' subtracted' if subtract_profile else ''}"
    rep = make_report(name, times, norms, float(pred), tolerance, sided, "power", meta)
    rep.warnings = warnings + rep.warnings
    return rep


class Zone(enum.Enum):
    SMALL_ONLY = "small"
    FULL = "full"


def run_decay_experiment(params: MgtParams, data, query: ExponentQuery, times=None, zone=Zone.SMALL_ONLY,
                         cutoff: CutoffSpec | None = None, policy: GridPolicy = GridPolicy(),
                         tolerance: float = TOLERANCE, workers: int = 1,
                         data_band: float | None = None) -> RateReport:
    """``||  |D|^s phi(t) ||_{L^q}`` (or of ``phi - Psi`` when refined) against the theorem.

    ``data`` is a :class:`DataTriple` or three callables giving the Fourier
    transforms of ``(phi0, phi1, phi2)``. Gaussians from :func:`gaussian_data` are
    a sensible default. The verdict is one-sided, since the theorem is an
    upper bound.
    """
    if params.delta <= 0:
        raise DomainError("the dissipative lab needs delta > 0")
    zone = Zone(zone)
    times = dyadic_times() if times is None else np.asarray(times, dtype=float)
    if times.size < 2:
        raise FitError(f"need at least 2 times to fit a slope, got {times.size}")
    if np.any(times <= 0):
        raise UsageError("decay experiments need positive times")
    f0, f1, f2 = _data_callables(data)
    warnings = []
    if zone is Zone.SMALL_ONLY:
        if cutoff is None:
            cutoff, warnings = lab_cutoff(params, float(times[0]))
        band = (0.0, 2 * cutoff.eps0)
        breaks = [cutoff.eps0]
    else:
        hi = data_band if data_band is not None else _data_extent(f0, f1, f2)
        band, breaks = (0.0, hi), []
    s = float(query.s)
    pred = predicted_exponent(query)

    def multiplier_at(t):
        def m(rho):
            ctx = KernelEvalContext.build(params, rho)
            v = sum(eval_kernel_hat(KernelId(ell), t, rho, params, context=ctx) * f(rho)
                    for ell, f in enumerate((f0, f1, f2)))
            if query.refined:
                v = v - eval_profile_J(t, rho, params.delta) * (f1(rho) + params.tau * f2(rho))
            if zone is Zone.SMALL_ONLY:
                v = v * cutoff.chi1(rho)
            return v * rho ** s
        return m

    speed = _pair_speed(params, *band)
    res = _series("decay", multiplier_at, query.n, [query.q], band,
                  lambda t: wave_extent(t, speed, params.delta / 2), times, breaks, policy, workers)
    norms = np.array([x.norms[query.q] for x in res])
    meta = {"query": {"n": query.n, "p": query.p, "q": query.q, "s": query.s, "refined": query.refined},
            "branch": exponent_branch(query), "zone": zone.value,
            "params": {"tau": params.tau, "delta": params.delta}, "grid_policy": policy.as_dict()}
    if cutoff is not None:
        meta["cutoff"] = {"eps0": cutoff.eps0, "N0": cutoff.N0}
    name = f"decay n={query.n} p={query.p} q={query.q} s={query.s}{' refined' if query.refined else ''}"
    rep = make_report(name, times, norms, pred, tolerance, "upper", "power", meta)
    rep.warnings = warnings + rep.warnings
    return rep


def _data_extent(*fs, probe_hi: float = 200.0) -> float:
    rho = np.linspace(0.0, probe_hi, 20001)
    mag = sum(np.abs(f(rho)) for f in fs)
    live = np.nonzero(mag > 1e-16 * mag.max())[0]
    return float(rho[min(live[-1] + 1, rho.size - 1)])


def high_freq_decay_check(params: MgtParams, q, s: float = 0.0, data=None, times=None, which: int = 3,
                          n: int = 3, cutoff: CutoffSpec | None = None, policy: GridPolicy = GridPolicy(),
                          threshold: float = -0.01, workers: int = 1) -> RateReport:
    """Exponential decay of the band-localised solution (``which`` = 2 bounded, 3 large zone).

    ``q`` may be a single exponent or a list; one transform per time serves
    every ``q`` and the report carries the largest (least negative) slope.
    """
    if params.delta <= 0:
        raise DomainError("the dissipative lab needs delta > 0")
    if which not in (2, 3):
        raise DomainError("which must be 2 (bounded zone) or 3 (large zone)")
    cutoff = cutoff or CutoffSpec.default_for(params)
    qs = [float(x) for x in np.atleast_1d(q)]
    if which == 3:
        lo, hi = cutoff.N0, 4 * cutoff.N0
    else:
        lo, hi = 2 * cutoff.eps0, cutoff.N0
    f0, f1, f2 = _data_callables(data if data is not None else band_bump(lo, hi))
    times = np.linspace(0.0, 20.0, 11) if times is None else np.asarray(times, dtype=float)

    def multiplier_at(t):
        def m(rho):
            ctx = KernelEvalContext.build(params, rho)
            v = sum(eval_kernel_hat(KernelId(ell), t, rho, params, context=ctx) * f(rho)
                    for ell, f in enumerate((f0, f1, f2)))
            return cutoff.chi(which, rho) * rho ** s * v
        return m

    speed = _pair_speed(params, lo, hi)
    res = _series("hf", multiplier_at, n, qs, (lo, hi),
                  lambda t: wave_extent(t, speed, 0.0, pad=20.0), times,
                  [cutoff.N0, 2 * cutoff.N0, cutoff.eps0, 2 * cutoff.eps0], policy, workers)
    reports = []
    for qq in qs:
        norms = np.array([x.norms[qq] for x in res])
        meta = {"q": qq, "s": s, "zone": which, "params": {"tau": params.tau, "delta": params.delta},
                "cutoff": {"eps0": cutoff.eps0, "N0": cutoff.N0}, "band": [lo, hi]}
        reports.append(make_report(f"exp-decay zone={which} q={qq}", times, norms, threshold,
                                   0.0, "upper", "exp", meta))
    worst = max(reports, key=lambda r: r.measured_slope)
    worst.metadata["per_q"] = {str(r.metadata["q"]): r.measured_slope for r in reports}
    worst.metadata["all_pass"] = all(r.passed for r in reports)
    return worst


# ----------------------------------------------------------------- pointwise multipliers

class Multiplier(enum.Enum):
    K2_EXP = (2, KernelPart.EXP, -2)
    K2_COS = (2, KernelPart.COS, -2)
    K2_SIN = (2, KernelPart.SIN, -3)
    K1_EXP = (1, KernelPart.EXP, -2)
    K1_COS = (1, KernelPart.COS, -2)
    K1_SIN = (1, KernelPart.SIN, -1)
    K0_EXP = (0, KernelPart.EXP, 0)
    K0_COS = (0, KernelPart.COS, -2)
    K0_SIN = (0, KernelPart.SIN, -1)
    PROFILE = (None, None, 0)


def multiplier_pointwise_check(which: Multiplier, sigma: float, rho_grid, t_grid, params: MgtParams,
                               bound: float = 1e6):
    """Grid supremum of ``|rho^sigma m(t, rho)| / (e^{-c t} rho^{sigma + k})``.

    ``k`` is the frequency power in the stated bound and ``c`` is half the
    smallest decay rate ``min(-lambda1, -muR)`` over the grid. For the
    profile the comparison function is ``e^{-c rho^2 t} rho^sigma`` with
    ``c = delta/4``. Returns ``(bounded, worst_ratio)``.
    """
    which = Multiplier(which)
    rho = np.asarray(rho_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("rho grid must be positive")
    R, T = np.meshgrid(rho, t, indexing="ij")
    ell, part, k = which.value
    if which is Multiplier.PROFILE:
        c = params.delta / 4
        # |rho^s sin(rho t) e^{-delta rho^2 t/2}| e^{c rho^2 t} / rho^s, exponents combined
        ratio = np.abs(np.sin(R * T)) * np.exp((c - 0.5 * params.delta) * R ** 2 * T)
    else:
        roots = solve_characteristic(params, rho)
        gap = float(np.min(np.minimum(-np.asarray(roots.lambda1), -np.asarray(roots.muR))))
        c = gap / 2
        ctx = KernelEvalContext.build(params, rho)
        vals = np.stack([eval_kernel_hat(KernelId(ell, part), tt, rho, params, context=ctx) for tt in t], axis=1)
        ratio = np.abs(R ** sigma * vals) * np.exp(c * T) / R ** (sigma + k)
    worst = float(np.max(ratio))
    return bool(np.isfinite(worst) and worst < bound), worst

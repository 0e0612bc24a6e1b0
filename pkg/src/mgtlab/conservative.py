"""The conservative case ``delta = 0``.

With the good unknown ``u = tau phi_t + phi`` the equation collapses to the
free wave equation ``u_tt - Lap u = 0``, and ``phi`` is recovered from ``u``
by solving ``tau phi_t + phi = u``:

    phi(t) = (1/tau) int_0^t exp(-(t-eta)/tau) u(eta) d eta + exp(-t/tau) phi0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .dissipative import TOLERANCE, _data_callables, _data_extent, _fr, gaussian_data
from .errors import DomainError, ResolutionError, UsageError
from .lab import GridPolicy, map_ordered, physical_norms, wave_extent
from .radial import RadialFunction, RadialGrid
from .report import RateReport, dyadic_times, make_report

__all__ = [
    "ExponentPair",
    "Region",
    "WaveState",
    "SampledTrajectory",
    "IBoundResult",
    "vertices",
    "good_unknown",
    "good_unknown_data",
    "wave_evolve",
    "duhamel_recover",
    "admissible_region",
    "conservative_predicted_exponent",
    "conservative_predicted_exponent_exact",
    "I_integral",
    "check_I_bound",
    "run_conservative_experiment",
]


@dataclass(frozen=True)
class ExponentPair:
    """The point ``(1/p, 1/q)`` in the unit square, for dimension ``n``."""

    inv_p: Fraction
    inv_q: Fraction
    n: int

    def __post_init__(self):
        a, b = _fr(self.inv_p), _fr(self.inv_q)
        if not (0 <= a <= 1 and 0 <= b <= 1):
            raise DomainError(f"(1/p, 1/q) = ({a}, {b}) must lie in [0,1]^2")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be an integer >= 1, got {self.n}")
        object.__setattr__(self, "inv_p", a)
        object.__setattr__(self, "inv_q", b)
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def from_pq(cls, p, q, n: int) -> "ExponentPair":
        inv = lambda x: Fraction(0) if math.isinf(float(x)) else 1 / _fr(x)  # noqa: E731
        return cls(inv(p), inv(q), n)

    @property
    def p(self) -> float:
        return math.inf if self.inv_p == 0 else float(1 / self.inv_p)

    @property
    def q(self) -> float:
        return math.inf if self.inv_q == 0 else float(1 / self.inv_q)

    @property
    def gap(self) -> Fraction:
        return self.inv_p - self.inv_q


class Region(enum.Enum):
    TRIANGLE = "triangle"
    TRAPEZOID = "trapezoid"


def vertices(n: int, region=Region.TRIANGLE) -> dict:
    """Named vertices in boundary order (``P1 P2 P3`` or ``P2 P5 P4 P3``)."""
    region = Region(region)
    h = Fraction(1, 2)
    if n >= 3:
        p2 = (h - Fraction(1, n - 1),) * 2
        p3 = (h + Fraction(1, n - 1),) * 2
    elif n in (1, 2):
        p2, p3 = (Fraction(0), Fraction(0)), (Fraction(1), Fraction(1))
    else:
        raise DomainError(f"n must be >= 1, got {n}")
    if region is Region.TRIANGLE:
        p1 = (h + Fraction(1, n + 1), h - Fraction(1, n + 1))
        return {"P1": p1, "P2": p2, "P3": p3}
    if n < 2:
        raise DomainError("the trapezoid needs n >= 2")
    p4 = (h + Fraction(1, n), h)
    p5 = (h, h - Fraction(1, n))
    return {"P2": p2, "P5": p5, "P4": p4, "P3": p3}


def _inside_convex(pt, poly) -> bool:
    x, y = pt
    signs = set()
    k = len(poly)
    for i in range(k):
        (ax, ay), (bx, by) = poly[i], poly[(i + 1) % k]
        cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
        if cross != 0:
            signs.add(cross > 0)
    return len(signs) <= 1


def admissible_region(point: ExponentPair, region=Region.TRIANGLE) -> bool:
    """Closed-region membership, decided in exact rational arithmetic."""
    poly = list(vertices(point.n, region).values())
    return _inside_convex((point.inv_p, point.inv_q), poly)


def conservative_predicted_exponent_exact(point: ExponentPair) -> Fraction:
    if not admissible_region(point, Region.TRIANGLE):
        raise DomainError(f"(1/p, 1/q) = ({point.inv_p}, {point.inv_q}) lies outside the admissible "
                          f"triangle P1 P2 P3 for n={point.n}")
    return 1 - point.n * point.gap


def conservative_predicted_exponent(point: ExponentPair) -> float:
    """``1 - n (1/p - 1/q)`` for an admissible point."""
    return float(conservative_predicted_exponent_exact(point))


# ----------------------------------------------------------------- wave pipeline

def _same_grid(a: RadialFunction, b: RadialFunction):
    if a.grid is not b.grid and not np.array_equal(a.nodes, b.nodes):
        raise UsageError("radial functions live on different grids")


def good_unknown(phi_t_hat: RadialFunction, phi_hat: RadialFunction, tau: float) -> RadialFunction:
    """``tau phi_t + phi`` node by node."""
    _same_grid(phi_t_hat, phi_hat)
    if not tau > 0:
        raise DomainError("tau must be positive")
    return phi_hat.with_values(tau * phi_t_hat.values + phi_hat.values)


def good_unknown_data(data, tau: float):
    """Initial values ``(u(0), u_t(0)) = (tau phi1 + phi0, tau phi2 + phi1)``."""
    phi0, phi1, phi2 = data
    return good_unknown(phi1, phi0, tau), good_unknown(phi2, phi1, tau)


@dataclass(eq=False)
class WaveState:
    u_hat: RadialFunction
    ut_hat: RadialFunction
    t: float = 0.0

    def __post_init__(self):
        _same_grid(self.u_hat, self.ut_hat)
        if self.t < 0:
            raise DomainError("t must be non-negative")

    def mode_energy(self) -> np.ndarray:
        rho = self.u_hat.nodes
        return rho ** 2 * self.u_hat.values ** 2 + self.ut_hat.values ** 2


def _wave_arrays(rho, u0, u1, t):
    c = np.cos(rho * t)
    sn = np.sin(rho * t)
    sinc = t * np.sinc(rho * t / math.pi)
    return c * u0 + sinc * u1, -rho * sn * u0 + c * u1


def wave_evolve(state0: WaveState, t: float) -> WaveState:
    """Advance the free wave by ``t``: ``u = cos(rho t) u0 + sin(rho t)/rho u1``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    rho = state0.u_hat.nodes
    u, ut = _wave_arrays(rho, state0.u_hat.values, state0.ut_hat.values, t)
    return WaveState(state0.u_hat.with_values(u), state0.ut_hat.with_values(ut), state0.t + t)


@dataclass(eq=False)
class SampledTrajectory:
    """``u(eta)`` sampled at increasing times; row ``k`` holds the values at ``times[k]``."""

    times: np.ndarray
    values: np.ndarray
    grid: RadialGrid

    def __post_init__(self):
        self.times = np.asarray(self.times, float)
        self.values = np.asarray(self.values, float)
        if self.values.shape != (self.times.size, self.grid.nodes.size):
            raise UsageError("trajectory values must have shape (len(times), len(nodes))")
        if np.any(np.diff(self.times) <= 0):
            raise UsageError("trajectory times must be strictly increasing")


def duhamel_recover(u_traj, phi0_hat: RadialFunction, tau: float, t: float, window: float = 40.0,
                    order: int = 16) -> RadialFunction:
    """``phi(t)`` from the good unknown by Gauss-Legendre quadrature in ``eta``.

    ``u_traj`` is a callable ``eta -> values on phi0_hat's nodes`` or a
    :class:`SampledTrajectory`, which is spline-interpolated in time. Only
    ``[t - window*tau, t]`` is integrated; the weight has dropped below
    ``exp(-window)`` before that. Panels are no wider than
    ``min(tau/4, 1/max(rho))``.

    Raises
    ------
    ResolutionError
        If sampled data are too sparse in time for the fastest mode.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    if t < 0:
        raise DomainError("t must be non-negative")
    rho = phi0_hat.nodes
    decay0 = math.exp(-t / tau)
    if t == 0:
        return phi0_hat.with_values(phi0_hat.values.copy())
    if isinstance(u_traj, SampledTrajectory):
        if not np.array_equal(u_traj.grid.nodes, rho):
            raise UsageError("trajectory and phi0 live on different grids")
        kmax = float(rho.max()) if rho.size else 0.0
        need = (2 * math.pi / kmax) / 10 if kmax > 0 else math.inf
        have = float(np.max(np.diff(u_traj.times))) if u_traj.times.size > 1 else math.inf
        if have > need or u_traj.times[0] > max(0.0, t - window * tau) or u_traj.times[-1] < t:
            raise ResolutionError(
                f"trajectory spacing {have:.3g} must be <= {need:.3g} and cover [{max(0.0, t - window * tau):g}, {t:g}]",
                required=need)
        spline = CubicSpline(u_traj.times, u_traj.values, axis=0)
        u_at = spline
    elif callable(u_traj):
        u_at = u_traj
    else:
        raise UsageError("u_traj must be callable or a SampledTrajectory")
    a = max(0.0, t - window * tau)
    width = tau / 4
    if rho.size and rho.max() > 0:
        width = min(width, 1.0 / float(rho.max()))
    k = max(1, int(math.ceil((t - a) / width)))
    edges = np.linspace(a, t, k + 1)
    x, w = np.polynomial.legendre.leggauss(order)
    acc = np.zeros_like(rho)
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = (hi - lo) / 2
        etas = (lo + hi) / 2 + half * x
        weights = half * w * np.exp(-(t - etas) / tau)
        for eta, wt in zip(etas, weights):
            acc += wt * np.asarray(u_at(eta), float)
    return phi0_hat.with_values(acc / tau + decay0 * phi0_hat.values)


# ----------------------------------------------------------------- I(t) bound

def I_integral(t: float, a: float, tau: float) -> float:
    """``int_0^t exp(-(t-eta)/tau) eta^a d eta`` (needs ``a > -1``)."""
    if not a > -1:
        raise DomainError(f"exponent {a} <= -1: the integral diverges at eta = 0")
    if t <= 0:
        return 0.0
    m = max(0.0, t - 40.0 * tau)
    total = 0.0
    if m > 0:
        # eta^a handled by the algebraic weight; the exponential is tiny here
        val, _ = integrate.quad(lambda e: math.exp(-(t - e) / tau), 0.0, m, weight="alg", wvar=(a, 0.0))
        total += val
        val, _ = integrate.quad(lambda e: math.exp(-(t - e) / tau) * e ** a, m, t, limit=200,
                                epsabs=0.0, epsrel=1e-12)
        total += val
    else:
        val, _ = integrate.quad(lambda e: math.exp(-(t - e) / tau), 0.0, t, weight="alg", wvar=(a, 0.0),
                                epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return total


@dataclass
class IBoundResult:
    bounded: bool
    worst_ratio: float
    refined_worst_ratio: float
    exponent: float
    t_grid: np.ndarray
    ratios: np.ndarray


def check_I_bound(tau: float, point, t_grid=None) -> IBoundResult:
    """Check ``sup_t I(t) / t^a`` is finite and stable when the grid is doubled.

    ``point`` is an :class:`ExponentPair` (exponent ``1 - n(1/p-1/q)``) or the
    exponent itself.
    """
    a = float(1 - point.n * point.gap) if isinstance(point, ExponentPair) else float(point)
    if not a > -1:
        raise DomainError(f"exponent {a} <= -1: the integral diverges at eta = 0")
    if not tau > 0:
        raise DomainError("tau must be positive")
    t_grid = np.geomspace(1.0, 1e3, 31) if t_grid is None else np.asarray(t_grid, float)
    if np.any(t_grid <= 0):
        raise DomainError("t grid must be positive")
    ratios = np.array([I_integral(t, a, tau) / t ** a for t in t_grid])
    mids = np.sqrt(t_grid[:-1] * t_grid[1:])
    fine = np.concatenate([ratios, [I_integral(t, a, tau) / t ** a for t in mids]])
    worst, refined = float(ratios.max()), float(fine.max())
    stable = abs(refined - worst) <= 0.01 * abs(worst)
    return IBoundResult(bool(np.isfinite(worst) and stable), worst, refined, a, t_grid, ratios)


# ----------------------------------------------------------------- experiment

def run_conservative_experiment(tau: float, data, point: ExponentPair, s: float = 0.0, times=None,
                                policy: GridPolicy = GridPolicy(), tolerance: float = TOLERANCE,
                                region=Region.TRIANGLE, workers: int = 1) -> RateReport:
    """``|| |D|^s phi(t) ||_{L^q}`` for ``delta = 0`` through the good unknown, with a one-sided verdict.

    ``data`` is a :class:`DataTriple` or three callables of ``rho``; ``None``
    selects narrow frequency-side Gaussians.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    if s < 0:
        raise DomainError("s must be >= 0")
    region = Region(region)
    if not admissible_region(point, region):
        raise DomainError(f"(1/p, 1/q) = ({point.inv_p}, {point.inv_q}) lies outside the admissible "
                          f"{region.value} for n={point.n}")
    pred = conservative_predicted_exponent(point)
    times = dyadic_times() if times is None else np.asarray(times, float)
    if np.any(times <= 0):
        raise UsageError("t = 0 is outside the estimate (stated for t > 0)")
    f0, f1, f2 = _data_callables(data if data is not None else gaussian_data(0.5))
    q = point.q
    if math.isinf(q):
        raise DomainError("q = infinity is outside the conservative experiment")
    n = point.n

    def multiplier_at(t):
        def m(rho):
            a0, a1, a2 = f0(rho), f1(rho), f2(rho)
            u0, u1 = tau * a1 + a0, tau * a2 + a1
            phi0 = RadialFunction(RadialGrid.from_nodes(n, rho), a0)
            phi = duhamel_recover(lambda eta: _wave_arrays(rho, u0, u1, eta)[0], phi0, tau, t)
            return rho ** s * phi.values
        return m

    hi = _data_extent(f0, f1, f2)
    res = map_ordered(lambda t: physical_norms(multiplier_at(t), n, [q], (0.0, hi),
                                               wave_extent(t, 1.0, 0.0, pad=30.0), (), policy),
                      times, workers)
    norms = np.array([r.norms[q] for r in res])
    labels = {k: [str(v[0]), str(v[1])] for k, v in vertices(n, region).items()}
    meta = {"point": [str(point.inv_p), str(point.inv_q)], "n": n, "p": point.p, "q": q, "s": s,
            "tau": tau, "region": region.value, "vertices": labels, "grid_policy": policy.as_dict()}
    return make_report(f"conservative n={n} (1/p,1/q)=({point.inv_p},{point.inv_q}) s={s}", times, norms,
                       pred, tolerance, "upper", "power", meta)


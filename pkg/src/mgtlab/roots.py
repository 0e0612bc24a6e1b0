"""Characteristic roots of the Fourier-side MGT equation.

The symbol of ``tau*phi_ttt + phi_tt - Lap phi - (delta+tau) Lap phi_t`` at
frequency ``rho = |xi|`` is the cubic

    tau*lam**3 + lam**2 + (delta+tau)*rho**2*lam + rho**2 = 0.

Its discriminant is ``x * (-4 + B*x - 4*tau*(delta+tau)**3 * x**2)`` with
``x = rho**2`` and ``B = 18*tau*(delta+tau) + (delta+tau)**2 - 27*tau**2``, so
the set of frequencies carrying three real roots is a single closed interval
(possibly empty) that can be written down exactly. Everything else in the
package leans on that fact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError

__all__ = [
    "MgtParams",
    "RootTriple",
    "Zone",
    "ExpansionOrder",
    "OrderCheck",
    "discriminant",
    "three_real_interval",
    "solve_characteristic",
    "small_freq_expansion",
    "large_freq_expansion",
    "expansion_order_check",
    "cubic_residuals",
    "spectral_gap",
]


@dataclass(frozen=True)
class MgtParams:
    """Physical parameters: thermal relaxation ``tau`` and sound diffusivity ``delta``."""

    tau: float
    delta: float

    def __post_init__(self):
        tau, delta = float(self.tau), float(self.delta)
        if not math.isfinite(tau) or not math.isfinite(delta):
            raise DomainError(f"tau and delta must be finite, got tau={self.tau}, delta={self.delta}")
        if tau <= 0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        if delta < 0:
            raise DomainError(f"delta must be non-negative, got {self.delta}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "delta", delta)

    @property
    def dissipative(self) -> bool:
        return self.delta > 0

    def coefficients(self, rho):
        """Cubic coefficients ``(a3, a2, a1, a0)`` at frequency ``rho``."""
        x = np.asarray(rho, dtype=float) ** 2
        return self.tau, 1.0, (self.delta + self.tau) * x, x


class Zone(enum.Enum):
    SMALL = "small"
    LARGE = "large"


@dataclass(frozen=True)
class ExpansionOrder:
    zone: Zone
    terms: int = 2

    def __post_init__(self):
        if not isinstance(self.zone, Zone):
            object.__setattr__(self, "zone", Zone(self.zone))
        if int(self.terms) < 1:
            raise DomainError(f"terms must be >= 1, got {self.terms}")
        object.__setattr__(self, "terms", int(self.terms))


@dataclass(frozen=True)
class RootTriple:
    """The three roots ``lambda1`` and ``muR +- i*muI``.

    When the pair is real (three-real-root band only) ``muI`` is 0 and the
    pair is ``muR +- split``. Fields are floats for scalar input and arrays
    for array input.
    """

    lambda1: np.ndarray
    muR: np.ndarray
    muI: np.ndarray
    discriminant: np.ndarray
    split: np.ndarray = 0.0
    degenerate: np.ndarray = False

    @property
    def omega2(self):
        """Signed square of the pair's imaginary part (negative for a real pair)."""
        return np.asarray(self.muI) ** 2 - np.asarray(self.split) ** 2

    @property
    def Lambda0(self):
        lam, mr = np.asarray(self.lambda1), np.asarray(self.muR)
        return 2 * mr * lam - self.omega2 - mr ** 2 - lam ** 2

    @property
    def roots(self) -> np.ndarray:
        """Complex array of shape ``(3, ...)``: lambda1, then the pair."""
        lam = np.asarray(self.lambda1, dtype=complex)
        off = np.asarray(self.muI) * 1j + np.asarray(self.split)
        mr = np.asarray(self.muR, dtype=complex)
        return np.stack([lam, mr + off, mr - off])

    def vieta_residuals(self, params: MgtParams, rho):
        """``(|sum + 1/tau|, |product + rho^2/tau|)``."""
        lam, mr = np.asarray(self.lambda1), np.asarray(self.muR)
        rho = np.asarray(rho, dtype=float)
        s = np.abs(lam + 2 * mr + 1 / params.tau)
        p = np.abs(lam * (mr ** 2 + self.omega2) + rho ** 2 / params.tau)
        return s, p


def discriminant(params: MgtParams, rho):
    """Discriminant of the cubic; negative means one real root and a complex pair."""
    tau, delta = params.tau, params.delta
    x = np.asarray(rho, dtype=float) ** 2
    k = delta + tau
    b = 18 * tau * k + k * k - 27 * tau * tau
    return x * (-4 + b * x - 4 * tau * k ** 3 * x * x)


def three_real_interval(params: MgtParams):
    """Closed frequency interval ``(rho_lo, rho_hi)`` with three real roots, or ``None``.

    ``rho = 0`` (roots ``-1/tau, 0, 0``) is excluded; it is a boundary point of
    the discriminant, not part of a band.
    """
    tau, delta = params.tau, params.delta
    k = delta + tau
    b = 18 * tau * k + k * k - 27 * tau * tau
    a = 4 * tau * k ** 3
    disc = b * b - 16 * a
    if b <= 0 or disc < 0:
        return None
    sq = math.sqrt(disc)
    # product of the roots of a*x^2 - b*x + 4 is 4/a; take the stable one first
    x_hi = (b + sq) / (2 * a)
    x_lo = 4 / (a * x_hi)
    return math.sqrt(x_lo), math.sqrt(x_hi)


def _check_rho(rho):
    arr = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("rho must be finite")
    if np.any(arr < 0):
        raise DomainError("rho must be non-negative")
    return arr


def _newton_real(params, rho, lam, steps=2):
    """Newton polish that only keeps steps which shrink the residual (safe at double roots)."""
    a3, a2, a1, a0 = params.coefficients(rho)

    def f(z):
        return ((a3 * z + a2) * z + a1) * z + a0

    for _ in range(steps):
        fz = f(lam)
        df = (3 * a3 * lam + 2 * a2) * lam + a1
        ok = df != 0
        cand = np.where(ok, lam - fz / np.where(ok, df, 1.0), lam)
        lam = np.where(np.abs(f(cand)) < np.abs(fz), cand, lam)
    return lam


def _trig_roots(A, B, C):
    """Three real roots of ``l^3 + A l^2 + B l + C`` (sorted ascending)."""
    p = B - A * A / 3
    q = 2 * A ** 3 / 27 - A * B / 3 + C
    p = np.minimum(p, 0.0)
    m = 2 * np.sqrt(-p / 3)
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = np.where(m > 0, 3 * q / (p * m), 0.0)
    theta = np.arccos(np.clip(arg, -1.0, 1.0)) / 3
    ks = np.arange(3).reshape((3,) + (1,) * np.ndim(A * B))
    y = m * np.cos(theta - 2 * np.pi * ks / 3)
    return np.sort(y - A / 3, axis=0)


def solve_characteristic(params: MgtParams, rho) -> RootTriple:
    """All three roots of the characteristic cubic at ``rho`` (scalar or array).

    Outside the three-real band the unique real root is ``lambda1``. Inside it
    ``lambda1`` is the root continuous with ``-1/tau`` across the band entry,
    which is decided once from the ordering of the simple and double root at
    the left band edge.
    """
    rho = _check_rho(rho)
    scalar = rho.ndim == 0
    rho = np.atleast_1d(rho)
    tau, delta = params.tau, params.delta
    disc = discriminant(params, rho)

    if delta == 0:
        # (tau*l + 1)(l^2 + rho^2) exactly
        lam = np.full_like(rho, -1 / tau)
        triple = RootTriple(lam, np.zeros_like(rho), rho.copy(), disc,
                            np.zeros_like(rho), rho == 0)
        return _squeeze(triple) if scalar else triple

    A = 1 / tau
    x = rho * rho
    B = (delta + tau) * x / tau
    C = x / tau

    band = three_real_interval(params)
    in_band = rho == 0
    if band is not None:
        in_band = in_band | ((rho >= band[0]) & (rho <= band[1]))

    lam = np.empty_like(rho)
    mr = np.empty_like(rho)
    mi = np.zeros_like(rho)
    split = np.zeros_like(rho)

    one = ~in_band
    if np.any(one):
        Ao, Bo, Co = A, B[one], C[one]
        p = Bo - Ao * Ao / 3
        q = 2 * Ao ** 3 / 27 - Ao * Bo / 3 + Co
        D = np.maximum((q / 2) ** 2 + (p / 3) ** 3, 0.0)
        w = -q / 2 - np.where(q >= 0, 1.0, -1.0) * np.sqrt(D)
        u = np.cbrt(w)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(u != 0, u - p / (3 * np.where(u != 0, u, 1.0)), 0.0)
        l1 = _newton_real(params, rho[one], y - Ao / 3)
        # quadratic factor tau*z^2 + b*z + c2 from deflation; c2 = -rho^2/l1 is exact
        # and b is formed from whichever coefficient identity is better conditioned
        c2 = -x[one] / l1
        b_top = 1 + tau * l1
        b_low = (c2 - (delta + tau) * x[one]) / l1
        with np.errstate(divide="ignore", invalid="ignore"):
            cond_top = (1 + np.abs(tau * l1)) / np.abs(b_top)
            cond_low = (np.abs(c2) + (delta + tau) * x[one]) / np.abs(c2 - (delta + tau) * x[one])
        b = np.where(cond_low < cond_top, b_low, b_top)
        mr_one = -b / (2 * tau)
        w2 = c2 / tau - mr_one ** 2
        lam[one] = l1
        mr[one] = mr_one
        mi[one] = np.sqrt(np.maximum(w2, 0.0))
        split[one] = np.sqrt(np.maximum(-w2, 0.0))

    if np.any(in_band):
        r = _trig_roots(A, B[in_band], C[in_band])
        r = np.stack([_newton_real(params, rho[in_band], r[k]) for k in range(3)])
        r = np.sort(r, axis=0)
        rank = _lambda1_rank(params, band)
        pick = np.where(rho[in_band] == 0, 0, rank)
        idx = np.arange(r.shape[1])
        others = np.array([[1, 2], [0, 2], [0, 1]])[pick]
        l1 = r[pick, idx]
        ra = r[others[:, 0], idx]
        rb = r[others[:, 1], idx]
        lam[in_band] = l1
        mr[in_band] = (ra + rb) / 2
        split[in_band] = (rb - ra) / 2

    scale = np.maximum(1.0, np.abs(lam)) + np.maximum(1.0, rho)
    gap = np.minimum(np.abs(mi) + np.abs(split), np.abs(lam - mr))
    degenerate = gap < 1e-7 * scale
    triple = RootTriple(lam, mr, mi, disc, split, degenerate)
    return _squeeze(triple) if scalar else triple


def _lambda1_rank(params, band):
    """0 if lambda1 is the smallest root inside the band, 2 if the largest."""
    if band is None:
        return 0
    A = 1 / params.tau
    x = band[0] ** 2
    r = _trig_roots(A, (params.delta + params.tau) * x / params.tau, x / params.tau).ravel()
    # the double root is the closest pair; the simple root is lambda1 at entry
    if abs(r[1] - r[0]) < abs(r[2] - r[1]):
        return 2
    return 0


def _squeeze(t: RootTriple) -> RootTriple:
    return RootTriple(float(t.lambda1[0]), float(t.muR[0]), float(t.muI[0]),
                      float(t.discriminant[0]), float(t.split[0]), bool(t.degenerate[0]))


def cubic_residuals(params: MgtParams, rho, triple: RootTriple):
    """Scaled residuals ``|f(root)| / (max|coef| * max(1,|root|)^3)`` for the three roots."""
    rho = np.asarray(rho, dtype=float)
    a3, a2, a1, a0 = params.coefficients(rho)
    z = triple.roots
    f = ((a3 * z + a2) * z + a1) * z + a0
    cmax = np.maximum.reduce([np.full_like(rho, a3), np.full_like(rho, a2), np.abs(a1), np.abs(a0)])
    return np.abs(f) / (cmax * np.maximum(1.0, np.abs(z)) ** 3)


def small_freq_expansion(params: MgtParams, rho, order: ExpansionOrder) -> RootTriple:
    """Truncated small-frequency series for the roots."""
    if order.zone is not Zone.SMALL:
        raise UsageError("small_freq_expansion needs a SMALL zone order")
    tau, delta = params.tau, params.delta
    rho = _check_rho(rho)
    r2 = rho * rho
    lam = -1 / tau + 0 * rho
    mr = -(delta / 2) * r2
    mi = rho.copy()
    if order.terms >= 2:
        lam = lam + delta * r2
        mr = mr - (tau * delta * (delta - tau) / 2) * r2 * r2
        mi = mi + delta * (4 * tau - delta) / 8 * rho ** 3
    out = RootTriple(lam, mr, mi, discriminant(params, rho))
    return _maybe_scalar(out, rho)


def large_freq_expansion(params: MgtParams, rho, order: ExpansionOrder) -> RootTriple:
    """Truncated large-frequency series for the roots (needs ``rho > 0``)."""
    if order.zone is not Zone.LARGE:
        raise UsageError("large_freq_expansion needs a LARGE zone order")
    rho = _check_rho(rho)
    if np.any(rho == 0):
        raise DomainError("large-frequency expansion is undefined at rho = 0")
    tau, delta = params.tau, params.delta
    k = delta + tau
    speed = math.sqrt(k / tau)
    lam = -1 / k + 0 * rho
    mr = -delta / (2 * tau * k) + 0 * rho
    mi = speed * rho
    if order.terms >= 2:
        inv2 = rho ** -2.0
        lam = lam - delta / k ** 4 * inv2
        mr = mr + delta / (2 * k ** 4) * inv2
        mi = mi - delta * (delta + 4 * tau) / (8 * tau * k ** 3) * speed / rho
    out = RootTriple(lam, mr, mi, discriminant(params, rho))
    return _maybe_scalar(out, rho)


def _maybe_scalar(t: RootTriple, rho):
    if np.ndim(rho) == 0:
        return RootTriple(float(t.lambda1), float(t.muR), float(t.muI), float(t.discriminant))
    return t


@dataclass
class OrderCheck:
    """Observed convergence order of a truncated expansion."""

    zone: Zone
    component: str
    rhos: np.ndarray
    residuals: np.ndarray
    slope: float | None
    saturated: bool
    used: np.ndarray


_COMPONENTS = ("lambda1", "muR", "muI")


def expansion_order_check(params: MgtParams, zone, component: str, terms: int = 2,
                          rho_start=None, rho_stop=None) -> OrderCheck:
    """Fit the log-log slope of ``|exact - expansion|`` over a dyadic frequency ladder.

    The small zone walks ``rho_start * 2**-k`` down to ``rho_stop`` (defaults
    0.1 and 1e-3); the large zone walks ``rho_start * 2**k`` up to
    ``rho_stop`` (defaults 10 and 1e3). Points whose residual sits at the
    rounding floor are dropped; if fewer than three survive the check is
    reported as saturated with ``slope=None``.
    """
    zone = Zone(zone)
    if component not in _COMPONENTS:
        raise UsageError(f"component must be one of {_COMPONENTS}, got {component!r}")
    if zone is Zone.SMALL:
        start, stop = rho_start or 0.1, rho_stop or 1e-3
        k = int(math.floor(math.log2(start / stop) + 1e-9))
        rhos = start * 2.0 ** -np.arange(k + 1)
        approx = small_freq_expansion(params, rhos, ExpansionOrder(zone, terms))
    else:
        start, stop = rho_start or 10.0, rho_stop or 1e3
        k = int(math.floor(math.log2(stop / start) + 1e-9))
        rhos = start * 2.0 ** np.arange(k + 1)
        approx = large_freq_expansion(params, rhos, ExpansionOrder(zone, terms))
    exact = solve_characteristic(params, rhos)
    ev = np.asarray(getattr(exact, component))
    av = np.asarray(getattr(approx, component))
    res = np.abs(ev - av)
    # rounding floor of the exact root, measured against the cubic's natural scales
    floor = 64 * np.finfo(float).eps * np.maximum.reduce(
        [np.abs(ev), np.abs(exact.lambda1), np.full_like(rhos, 1 / params.tau)])
    used = res > floor
    if used.sum() < 3:
        return OrderCheck(zone, component, rhos, res, None, True, used)
    slope = float(np.polyfit(np.log(rhos[used]), np.log(res[used]), 1)[0])
    return OrderCheck(zone, component, rhos, res, slope, False, used)


def spectral_gap(params: MgtParams, rhos) -> float:
    """``min`` over the sample of ``min(-Re lambda_j)``; positive iff all modes decay."""
    t = solve_characteristic(params, np.asarray(rhos, dtype=float))
    gap = np.minimum(-np.asarray(t.lambda1), -(np.asarray(t.muR) + np.asarray(t.split)))
    return float(np.min(gap))

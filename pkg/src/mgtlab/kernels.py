"""Fourier-space solution kernels of the MGT equation.

Each kernel has the shape

    K(t) = a * exp(lambda1 t) + exp(muR t) * (c * C(t) + s * S(t)),

with ``C = cos(muI t)`` and ``S = sin(muI t) / muI``. Writing the sine term
through ``S`` instead of ``sin/muI`` keeps every coefficient free of the
division by ``muI``. It also lets the same code run unchanged when the pair
turns real (``C = cosh``, ``S = sinh(split t)/split``) or coalesces
(``C = 1``, ``S = t``). Only a collision of ``lambda1`` with the pair, where
``Lambda0`` vanishes, is a true breakdown.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateConfigurationError, DomainError, IntegrationFailure, UsageError
from .radial import RadialFunction
from .roots import MgtParams, RootTriple, solve_characteristic

__all__ = [
    "KernelPart",
    "KernelId",
    "KernelEvalContext",
    "DataTriple",
    "OracleTrajectory",
    "eval_kernel_hat",
    "eval_profile_J",
    "eval_solution_hat",
    "profile_coefficient",
    "ode_oracle",
    "oracle_deviation",
    "LAMBDA0_THRESHOLD",
]

LAMBDA0_THRESHOLD = 1e-12


class KernelPart(enum.Enum):
    EXP = "exp"
    COS = "cos"
    SIN = "sin"
    TOTAL = "total"


@dataclass(frozen=True)
class KernelId:
    """Kernel ``K_ell`` (multiplies the ``ell``-th datum) and which of its parts."""

    ell: int
    part: KernelPart = KernelPart.TOTAL

    def __post_init__(self):
        if self.ell not in (0, 1, 2):
            raise DomainError(f"ell must be 0, 1 or 2, got {self.ell}")
        if not isinstance(self.part, KernelPart):
            object.__setattr__(self, "part", KernelPart(self.part))


@dataclass(frozen=True, eq=False)
class KernelEvalContext:
    """Roots and ``Lambda0`` at a set of frequencies, checked for degeneracy."""

    params: MgtParams
    rho: np.ndarray
    roots: RootTriple
    Lambda0: np.ndarray

    @classmethod
    def build(cls, params: MgtParams, rho) -> "KernelEvalContext":
        rho = np.asarray(rho, dtype=float)
        roots = solve_characteristic(params, rho)
        lam0 = np.asarray(roots.Lambda0)
        lam = np.asarray(roots.lambda1)
        scale = (1 + lam ** 2 + np.abs(roots.omega2)) ** 2
        bad = np.abs(lam0) < LAMBDA0_THRESHOLD * scale
        if np.any(bad):
            where = float(np.atleast_1d(rho)[np.atleast_1d(bad)][0])
            raise DegenerateConfigurationError(
                f"lambda1 collides with the conjugate pair at rho={where:.17g} (Lambda0 ~ 0)", rho=where)
        return cls(params, rho, roots, lam0)

    def coefficients(self, ell: int):
        """``(a, c, s)`` of ``K_ell`` in the exp/cos/sinc basis."""
        lam = np.asarray(self.roots.lambda1)
        mr = np.asarray(self.roots.muR)
        w2 = self.roots.omega2
        L = self.Lambda0
        if ell == 0:
            return -(w2 + mr ** 2) / L, (2 * mr * lam - lam ** 2) / L, lam * (mr * lam + w2 - mr ** 2) / L
        if ell == 1:
            return 2 * mr / L, -2 * mr / L, (mr ** 2 - w2 - lam ** 2) / L
        if ell == 2:
            return -1 / L, 1 / L, -(mr - lam) / L
        raise DomainError(f"ell must be 0, 1 or 2, got {ell}")


def _pair_basis(mr, w2, t):
    """``(exp(mr t) C(t), exp(mr t) S(t))`` for a pair with signed square frequency ``w2``."""
    mr, w2, t = np.broadcast_arrays(np.asarray(mr, float), np.asarray(w2, float), np.asarray(t, float))
    ec = np.empty(mr.shape)
    es = np.empty(mr.shape)
    osc = w2 > 0
    hyp = w2 < 0
    flat = ~(osc | hyp)
    if np.any(osc):
        w = np.sqrt(w2[osc])
        e = np.exp(mr[osc] * t[osc])
        ec[osc] = e * np.cos(w * t[osc])
        es[osc] = e * np.sin(w * t[osc]) / w
    if np.any(hyp):
        k = np.sqrt(-w2[hyp])
        up = np.exp((mr[hyp] + k) * t[hyp])
        dn = np.exp((mr[hyp] - k) * t[hyp])
        ec[hyp] = (up + dn) / 2
        # sinh(k t)/k without cancellation for small k t
        es[hyp] = np.exp(mr[hyp] * t[hyp]) * t[hyp] * _sinhc(k * t[hyp])
    if np.any(flat):
        e = np.exp(mr[flat] * t[flat])
        ec[flat] = e
        es[flat] = e * t[flat]
    return ec, es


def _sinhc(x):
    x = np.asarray(x, float)
    out = np.ones_like(x)
    nz = x != 0
    out[nz] = np.sinh(x[nz]) / x[nz]
    return out


def eval_kernel_hat(kid, t, rho, params: MgtParams, deriv: int = 0, context: KernelEvalContext | None = None):
    """``d^deriv/dt^deriv`` of ``K_ell(t, rho)`` (or one of its parts).

    ``t`` and ``rho`` broadcast against each other. Time derivatives are
    exact: differentiating maps ``a -> a*lambda1`` and
    ``(c, s) -> (muR c + s, muR s - muI^2 c)``.

    Raises
    ------
    DegenerateConfigurationError
        If ``|Lambda0|`` falls below ``1e-12 (1 + lambda1^2 + muI^2)^2``.
    """
    if isinstance(kid, int):
        kid = KernelId(kid)
    if deriv < 0:
        raise DomainError("derivative order must be non-negative")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise DomainError("t must be finite and non-negative")
    ctx = context if context is not None else KernelEvalContext.build(params, rho)
    a, c, s = ctx.coefficients(kid.ell)
    lam = np.asarray(ctx.roots.lambda1)
    mr = np.asarray(ctx.roots.muR)
    w2 = ctx.roots.omega2
    if kid.part is KernelPart.COS:
        a, s = 0 * a, 0 * s
    elif kid.part is KernelPart.SIN:
        a, c = 0 * a, 0 * c
    elif kid.part is KernelPart.EXP:
        c, s = 0 * c, 0 * s
    for _ in range(deriv):
        a = a * lam
        c, s = mr * c + s, mr * s - w2 * c
    ec, es = _pair_basis(mr, w2, t)
    out = a * np.exp(lam * t) + c * ec + s * es
    return float(out) if np.ndim(out) == 0 else out


def profile_coefficient(ell: int, tau: float) -> float:
    """Weight ``2 - ell + (ell - 1) tau`` of the diffusion-wave profile inside ``K_ell``."""
    if ell not in (1, 2):
        raise UsageError(f"the profile is only subtracted from K_1 and K_2, not K_{ell}")
    return 2 - ell + (ell - 1) * tau


def eval_profile_J(t, rho, delta: float, deriv: int = 0):
    """Diffusion-wave kernel ``sin(rho t)/rho * exp(-delta rho^2 t / 2)`` (value ``t`` at ``rho = 0``).

    ``deriv`` gives exact time derivatives, handled as a pair with
    ``muR = -delta rho^2/2`` and ``muI = rho``.
    """
    rho = np.asarray(rho, dtype=float)
    t = np.asarray(t, dtype=float)
    mr = -0.5 * delta * rho ** 2
    c, s = np.zeros_like(mr), np.ones_like(mr)
    w2 = rho ** 2
    for _ in range(deriv):
        c, s = mr * c + s, mr * s - w2 * c
    ec, es = _pair_basis(mr, w2, t)
    out = c * ec + s * es
    return float(out) if np.ndim(out) == 0 else out


@dataclass(eq=False)
class DataTriple:
    """Fourier transforms of ``(phi0, phi1, phi2)`` on one frequency grid."""

    phi0: RadialFunction
    phi1: RadialFunction
    phi2: RadialFunction

    def __post_init__(self):
        g = self.phi0.grid
        if self.phi1.grid is not g and not np.array_equal(self.phi1.nodes, g.nodes):
            raise UsageError("data triple must share one grid")
        if self.phi2.grid is not g and not np.array_equal(self.phi2.nodes, g.nodes):
            raise UsageError("data triple must share one grid")

    @property
    def grid(self):
        return self.phi0.grid

    def __iter__(self):
        return iter((self.phi0, self.phi1, self.phi2))


def eval_solution_hat(data: DataTriple, t: float, params: MgtParams, deriv: int = 0,
                      context: KernelEvalContext | None = None) -> RadialFunction:
    """``sum_ell K_ell(t, rho) phi_ell_hat(rho)`` on the data grid."""
    rho = data.grid.nodes
    ctx = context if context is not None else KernelEvalContext.build(params, rho)
    total = np.zeros_like(rho)
    for ell, f in enumerate(data):
        if np.any(f.values != 0):
            total += eval_kernel_hat(KernelId(ell), t, rho, params, deriv=deriv, context=ctx) * f.values
    return RadialFunction(data.grid, total)


@dataclass
class OracleTrajectory:
    t: np.ndarray
    phi: np.ndarray
    phi_t: np.ndarray
    phi_tt: np.ndarray


def ode_oracle(initial, t_end: float, params: MgtParams, rho: float, t_eval=None,
               rtol: float = 1e-12, atol: float = 1e-14) -> OracleTrajectory:
    """Integrate ``tau y''' + y'' + (delta+tau) rho^2 y' + rho^2 y = 0`` numerically.

    Independent of the closed form: an adaptive 8th-order Runge-Kutta
    integration of the first-order system for ``(y, y', y'')``.
    """
    y0 = np.asarray(initial, dtype=float)
    if y0.shape != (3,) or not np.all(np.isfinite(y0)):
        raise DomainError("initial values must be three finite numbers")
    if not (t_end >= 0 and math.isfinite(t_end)):
        raise DomainError("t_end must be finite and non-negative")
    tau, delta = params.tau, params.delta
    r2 = float(rho) ** 2
    mat = np.array([[0.0, 1.0, 0.0],
                    [0.0, 0.0, 1.0],
                    [-r2 / tau, -(delta + tau) * r2 / tau, -1.0 / tau]])
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, 201)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_end == 0:
        rep = np.repeat(y0[:, None], t_eval.size, axis=1)
        return OracleTrajectory(t_eval, *rep)
    sol = solve_ivp(lambda _t, y: mat @ y, (0.0, t_end), y0, method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationFailure(f"oracle integration failed at rho={rho}: {sol.message}")
    return OracleTrajectory(sol.t, sol.y[0], sol.y[1], sol.y[2])


def oracle_deviation(ell: int, rho: float, params: MgtParams, t_max: float = 10.0, points: int = 201):
    """Compare ``K_ell`` with the ODE oracle started from the ``ell``-th unit datum.

    Returns ``(deviation, ic_error)``: the largest gap in ``K``, ``K_t`` or
    ``K_tt`` over ``[0, t_max]`` relative to the largest oracle sup, and the largest error in the initial
    conditions ``d^j K_ell(0) = [j == ell]``.
    """
    t = np.linspace(0.0, t_max, points)
    init = np.zeros(3)
    init[ell] = 1.0
    orc = ode_oracle(init, t_max, params, rho, t_eval=t)
    ctx = KernelEvalContext.build(params, np.atleast_1d(float(rho)))
    refs = (orc.phi, orc.phi_t, orc.phi_tt)
    # one scale for all three derivatives; some of them vanish identically
    scale = max(float(np.max(np.abs(r))) for r in refs)
    dev = 0.0
    for j, ref in enumerate(refs):
        got = eval_kernel_hat(KernelId(ell), t[:, None], ctx.rho, params, deriv=j, context=ctx)[:, 0]
        dev = max(dev, float(np.max(np.abs(got - ref))) / scale)
    ic = max(abs(float(eval_kernel_hat(KernelId(ell), np.zeros(1), ctx.rho, params, deriv=j, context=ctx)[0])
                 - init[j]) for j in range(3))
    return dev, ic

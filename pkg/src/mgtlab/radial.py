"""Radial Fourier analysis on R^n.

A radial function ``f(x) = f0(|x|)`` has a radial Fourier transform given by
a one-dimensional Bessel integral. With the unitary convention

    fhat(rho) = int_0^inf f0(r) r^(n-1) Jt_{n/2-1}(r*rho) dr,
    Jt_mu(s) = s^(-mu) J_mu(s),

the same formula inverts itself and Plancherel holds with no extra factor.
Integrals are done with composite Gauss-Legendre panels whose weights
already carry the radial Jacobian ``rho^(n-1)``.
"""

from __future__ import annotations

import enum
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError, ResolutionError, UsageError

__all__ = [
    "RadialGrid",
    "RadialFunction",
    "CutoffSpec",
    "Direction",
    "modified_bessel",
    "radial_fourier",
    "lq_norm",
    "cutoff_apply",
    "homogeneous_derivative",
    "sphere_area",
    "smoothstep",
    "POINTS_PER_PERIOD",
]

POINTS_PER_PERIOD = 10


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2 for n=1)."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Radius samples with quadrature weights for ``int_0^extent g(r) r^(n-1) dr``.

    ``panels`` holds the panel edges when the grid came from
    :meth:`gauss_legendre`; a grid built from bare nodes has no weights and
    can be used as a transform target but not for norms.
    """

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray | None
    extent: float
    panels: np.ndarray | None = None
    order: int | None = None

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise DomainError(f"dimension must be >= 1, got {self.dimension}")
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0:
            raise DomainError("nodes must be a non-empty 1-D array")
        if np.any(np.diff(nodes) <= 0) or nodes[0] < 0:
            raise DomainError("nodes must be non-negative and strictly increasing")
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "nodes", nodes)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != nodes.shape:
                raise DomainError("weights and nodes differ in length")
            if np.any(w <= 0):
                raise DomainError("weights must be positive")
            object.__setattr__(self, "weights", w)

    @classmethod
    def gauss_legendre(cls, dimension: int, extent: float, panel_width: float,
                       breakpoints=(), order: int = 16, start: float = 0.0) -> "RadialGrid":
        """Composite Gauss-Legendre grid on ``[start, extent]``.

        Panels never straddle a breakpoint and are no wider than ``panel_width``.
        """
        if not extent > start:
            raise DomainError("extent must exceed start")
        if panel_width <= 0:
            raise DomainError("panel_width must be positive")
        cuts = sorted({start, float(extent)} | {float(b) for b in breakpoints if start < b < extent})
        edges = [cuts[0]]
        for a, b in zip(cuts[:-1], cuts[1:]):
            k = max(1, int(math.ceil((b - a) / panel_width - 1e-12)))
            edges.extend(np.linspace(a, b, k + 1)[1:])
        edges = np.asarray(edges)
        x, w = np.polynomial.legendre.leggauss(order)
        half = np.diff(edges)[:, None] / 2
        mid = (edges[:-1] + edges[1:])[:, None] / 2
        nodes = (mid + half * x).ravel()
        weights = (half * w).ravel() * nodes ** (dimension - 1)
        return cls(dimension, nodes, weights, float(extent), edges, order)

    @classmethod
    def from_nodes(cls, dimension: int, nodes) -> "RadialGrid":
        nodes = np.asarray(nodes, dtype=float)
        return cls(dimension, nodes, None, float(nodes[-1]))

    def density(self) -> float:
        """Smallest number of nodes per unit length over the panels."""
        if self.panels is not None and self.order is not None:
            return float(self.order / np.max(np.diff(self.panels)))
        if self.nodes.size < 2:
            return 0.0
        return float(1 / np.max(np.diff(self.nodes)))

    def integrate(self, values) -> float:
        """``|S^(n-1)| * sum(w * values)``, i.e. the integral over R^n of a radial function."""
        if self.weights is None:
            raise UsageError("grid has no quadrature weights")
        return sphere_area(self.dimension) * float(np.dot(self.weights, values))


@dataclass(eq=False)
class RadialFunction:
    grid: RadialGrid
    values: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values)
        if np.iscomplexobj(v):
            raise DomainError("radial function values must be real")
        v = v.astype(float)
        if v.shape != self.grid.nodes.shape:
            raise DomainError("values and grid nodes differ in length")
        if not np.all(np.isfinite(v)):
            raise DomainError("radial function values must be finite")
        self.values = v

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values) -> "RadialFunction":
        return RadialFunction(self.grid, values)

    def to_csv(self, path) -> None:
        """Write ``node,value`` rows plus a JSON sidecar ``<path>.json``."""
        header = {"dimension": self.dimension, "extent": self.grid.extent}
        if self.grid.weights is not None:
            header["weights"] = self.grid.weights.tolist()
        rows = "node,value\n" + "".join(f"{float(r)!r},{float(v)!r}\n" for r, v in zip(self.nodes, self.values))
        _atomic_write(path, rows)
        _atomic_write(str(path) + ".json", json.dumps(header, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path) -> "RadialFunction":
        with open(str(path) + ".json") as fh:
            header = json.load(fh)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        grid = RadialGrid(header["dimension"], data[:, 0], header.get("weights"), header["extent"])
        return cls(grid, data[:, 1])


def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def modified_bessel(mu: float, s):
    """``s**(-mu) * J_mu(s)`` with the analytic value ``1/(2**mu Gamma(mu+1))`` at 0."""
    mu = float(mu)
    if mu < -0.5:
        raise DomainError(f"order must be >= -1/2, got {mu}")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("argument must be non-negative")
    if mu == -0.5:
        return math.sqrt(2 / math.pi) * np.cos(s)
    if mu == 0.5:
        return math.sqrt(2 / math.pi) * np.sinc(s / math.pi)
    if mu == 0.0:
        return special.j0(s)
    small = s < 1.0
    out = np.empty_like(s)
    big = ~small
    if np.any(big):
        sb = s[big]
        out[big] = (special.j1(sb) / sb) if mu == 1.0 else special.jv(mu, sb) / sb ** mu
    if np.any(small):
        # ascending series; 14 terms leave < 1e-20 relative for s < 1
        z = -(s[small] / 2) ** 2
        term = np.full_like(z, 1 / (2 ** mu * math.gamma(mu + 1)))
        acc = term.copy()
        for k in range(1, 14):
            term = term * z / (k * (k + mu))
            acc += term
        out[small] = acc
    return out


class Direction(enum.Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


def radial_fourier(f: RadialFunction, target, direction=Direction.FORWARD,
                   check_resolution: bool = True, chunk: int = 1 << 21) -> RadialFunction:
    """Radial Fourier transform of ``f`` evaluated at the nodes of ``target``.

    ``target`` is a :class:`RadialGrid` (keeps its weights, so norms can be
    taken) or an array of nodes. The unitary convention makes forward and
    inverse the same integral; ``direction`` is recorded in ``info`` only.

    Raises
    ------
    ResolutionError
        If the source grid has fewer than ``POINTS_PER_PERIOD`` nodes per
        period of the fastest oscillation ``r * max(target)``.
    """
    direction = Direction(direction)
    grid = f.grid
    if grid.weights is None:
        raise UsageError("source grid needs quadrature weights")
    n = grid.dimension
    if not isinstance(target, RadialGrid):
        target = RadialGrid.from_nodes(n, target)
    if target.dimension != n:
        raise UsageError("source and target grids have different dimensions")
    kmax = float(target.nodes[-1])
    required = POINTS_PER_PERIOD * kmax / (2 * math.pi)
    have = grid.density()
    if check_resolution and kmax > 0 and have < required:
        raise ResolutionError(
            f"source grid has {have:.3g} nodes per unit length, needs {required:.3g} "
            f"to resolve frequencies up to {kmax:.3g}", required=required)
    mu = n / 2 - 1
    wf = grid.weights * f.values
    r = grid.nodes
    out = np.empty(target.nodes.size)
    step = max(1, chunk // max(1, r.size))
    for j in range(0, target.nodes.size, step):
        rho = target.nodes[j:j + step]
        out[j:j + step] = modified_bessel(mu, np.multiply.outer(rho, r)) @ wf
    edge = abs(f.values[-1]) * grid.nodes[-1] ** (n - 1)
    peak = float(np.max(np.abs(f.values) * grid.nodes ** (n - 1))) or 1.0
    return RadialFunction(target, out, {"direction": direction.value, "edge_integrand": edge,
                                        "edge_ratio": edge / peak})


def lq_norm(f: RadialFunction, q) -> float:
    """``||f||_{L^q(R^n)}`` for ``q in [1, inf]``; ``q = inf`` is the max over nodes."""
    q = float(q)
    if not q >= 1:
        raise DomainError(f"q must be >= 1, got {q}")
    a = np.abs(f.values)
    if math.isinf(q):
        return float(a.max()) if a.size else 0.0
    m = a.max()
    if m == 0:
        return 0.0
    # scale out the peak so large q cannot overflow
    return float(m * f.grid.integrate((a / m) ** q) ** (1 / q))


def smoothstep(x):
    """Quintic ``6x^5 - 15x^4 + 10x^3`` clamped to [0, 1]; C^2 at both ends."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x ** 3 * (x * (6 * x - 15) + 10)


@dataclass(frozen=True)
class CutoffSpec:
    """Partition of unity ``chi1 + chi2 + chi3 = 1`` on the frequency half-line.

    ``chi1`` is 1 on ``[0, eps0]`` and 0 beyond ``2*eps0``; ``chi3`` is 0 on
    ``[0, N0]`` and 1 beyond ``2*N0``.
    """

    eps0: float
    N0: float
    mollifier: str = "smoothstep_quintic"

    def __post_init__(self):
        if not (self.eps0 > 0 and 2 * self.eps0 < self.N0 and math.isfinite(self.N0)):
            raise DomainError(f"need 0 < 2*eps0 < N0, got eps0={self.eps0}, N0={self.N0}")
        if self.mollifier != "smoothstep_quintic":
            raise DomainError(f"unknown mollifier {self.mollifier!r}")

    def chi1(self, rho):
        return 1.0 - smoothstep((np.asarray(rho, dtype=float) - self.eps0) / self.eps0)

    def chi3(self, rho):
        return smoothstep((np.asarray(rho, dtype=float) - self.N0) / self.N0)

    def chi2(self, rho):
        return 1.0 - self.chi1(rho) - self.chi3(rho)

    def chi(self, which: int, rho):
        if which not in (1, 2, 3):
            raise DomainError(f"cutoff index must be 1, 2 or 3, got {which}")
        return (self.chi1, self.chi2, self.chi3)[which - 1](rho)

    @classmethod
    def default_for(cls, params, validate: bool = True) -> "CutoffSpec":
        """``eps0 = 0.1 min(1, 1/(delta+tau))``, ``N0 = 10 max(1, delta+tau)``."""
        k = params.delta + params.tau
        spec = cls(0.1 * min(1.0, 1.0 / k), 10.0 * max(1.0, k))
        if validate:
            spec.validate(params)
        return spec

    def validate(self, params) -> None:
        """Check the small and large zones avoid the three-real-root band."""
        from .roots import three_real_interval

        band = three_real_interval(params)
        if band is None or params.delta == 0:
            return
        lo, hi = band
        if lo <= 2 * self.eps0:
            raise DomainError(
                f"small zone [0, {2 * self.eps0:g}] meets the three-real-root band [{lo:.6g}, {hi:.6g}]")
        if hi >= self.N0:
            raise DomainError(
                f"large zone [{self.N0:g}, inf) meets the three-real-root band [{lo:.6g}, {hi:.6g}]")


def cutoff_apply(f: RadialFunction, spec: CutoffSpec, which: int) -> RadialFunction:
    return f.with_values(f.values * spec.chi(which, f.nodes))


def homogeneous_derivative(f: RadialFunction, s: float) -> RadialFunction:
    """Multiply by ``rho**s`` (symbol of ``|D|^s``); ``0**0`` is taken as 1."""
    s = float(s)
    if s < 0:
        raise DomainError(f"negative order |D|^s (s={s}) is out of scope")
    if s == 0:
        return f.with_values(f.values.copy())
    return f.with_values(f.values * f.nodes ** s)

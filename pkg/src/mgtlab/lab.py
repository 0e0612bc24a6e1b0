"""Shared machinery for the decay experiments of both labs.

Every rate measurement has the same shape: build a radial Fourier multiplier
at time ``t``, pull it back to physical space with the radial transform, and
take ``L^q`` norms there. This module sizes the grids for that pipeline.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .radial import POINTS_PER_PERIOD, RadialFunction, RadialGrid, lq_norm, radial_fourier

__all__ = ["GridPolicy", "NormResult", "physical_norms", "trim_band", "map_ordered", "wave_extent"]


@dataclass(frozen=True)
class GridPolicy:
    """Resolution knobs for :func:`physical_norms`.

    ``freq_margin`` multiplies the minimum frequency-node density demanded
    by the transform's resolution check; ``space_oversample`` does the same
    for the physical grid, which must resolve the band edge ``rho_hi``.
    """

    order: int = 16
    freq_margin: float = 1.25
    space_oversample: float = 2.0
    rel_floor: float = 1e-14
    probe: int = 4096

    def as_dict(self) -> dict:
        out = asdict(self)
        out["points_per_period"] = POINTS_PER_PERIOD
        out["fourier_normalisation"] = "unitary, c = 1"
        return out


@dataclass
class NormResult:
    norms: dict
    band: tuple
    extent: float
    freq_nodes: int
    space_nodes: int


def trim_band(multiplier, n: int, lo: float, hi: float, rel_floor: float, probe: int):
    """Shrink ``[lo, hi]`` to where ``|m(rho)| rho^(n-1)`` exceeds ``rel_floor`` of its peak.

    Returns ``None`` when the multiplier vanishes on the whole band.
    """
    rho = np.linspace(lo, hi, probe)
    mag = np.abs(multiplier(rho)) * rho ** (n - 1)
    peak = mag.max()
    if not peak > 0:
        return None
    live = np.nonzero(mag > rel_floor * peak)[0]
    step = rho[1] - rho[0]
    return max(lo, rho[live[0]] - step), min(hi, rho[live[-1]] + step)


def wave_extent(t: float, speed: float, diffusion: float = 0.0, pad: float = 10.0) -> float:
    """Physical radius holding a front moving at ``speed`` and spreading diffusively."""
    return speed * t + 14.0 * math.sqrt(2.0 * max(diffusion, 0.0) * t) + pad


def physical_norms(multiplier, n: int, qs, band, extent: float, breakpoints=(),
                   policy: GridPolicy = GridPolicy()) -> NormResult:
    """``L^q(R^n)`` norms of the inverse radial transform of a multiplier.

    Parameters
    ----------
    multiplier : callable
        Maps an array of frequencies to real multiplier values.
    band : (float, float)
        Frequency interval carrying the multiplier.
    extent : float
        Physical truncation radius.
    breakpoints : sequence of float
        Frequencies where the multiplier is only finitely smooth (cutoff joins).
    """
    qs = list(qs)
    lo, hi = float(band[0]), float(band[1])
    live = trim_band(multiplier, n, lo, hi, policy.rel_floor, policy.probe)
    if live is None:
        return NormResult({q: 0.0 for q in qs}, (lo, lo), extent, 0, 0)
    lo, hi = live
    need_k = policy.freq_margin * POINTS_PER_PERIOD * extent / (2 * math.pi)
    kgrid = RadialGrid.gauss_legendre(n, hi, policy.order / need_k, breakpoints=breakpoints,
                                      order=policy.order, start=lo)
    need_r = policy.space_oversample * POINTS_PER_PERIOD * hi / (2 * math.pi)
    rgrid = RadialGrid.gauss_legendre(n, extent, policy.order / max(need_r, 1.0), order=policy.order)
    f = RadialFunction(kgrid, multiplier(kgrid.nodes))
    g = radial_fourier(f, rgrid, "inverse")
    return NormResult({q: lq_norm(g, q) for q in qs}, (lo, hi), extent,
                      kgrid.nodes.size, rgrid.nodes.size)


def map_ordered(func, items, workers: int = 1):
    """``list(map(func, items))``, optionally on a thread pool; order is preserved."""
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))

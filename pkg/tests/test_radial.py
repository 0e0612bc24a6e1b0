import json
import math
import os

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from mgtlab.errors import DomainError, ResolutionError, UsageError
from mgtlab.radial import (CutoffSpec, RadialFunction, RadialGrid, cutoff_apply, homogeneous_derivative, lq_norm,
                           modified_bessel, radial_fourier, smoothstep, sphere_area)
from mgtlab.roots import MgtParams


def gl(n, extent, width=0.25, **kw):
    return RadialGrid.gauss_legendre(n, extent, width, **kw)


def test_bessel_examples():
    assert abs(modified_bessel(0.5, math.pi)) < 1e-16
    assert modified_bessel(0.5, 0.0) == pytest.approx(math.sqrt(2 / math.pi))
    assert abs(modified_bessel(0.0, 2.404825557695773)) < 1e-15
    assert modified_bessel(1.0, 0.0) == pytest.approx(0.5)


@given(st.sampled_from([-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5]), st.just(0.0) | st.floats(1e-6, 60.0))
def test_bessel_against_mpmath(mu, s):
    with mpmath.workdps(30):
        ref = mpmath.besselj(mu, s) / s ** mu if s > 0 else 1 / (2 ** mu * mpmath.gamma(mu + 1))
    got = float(modified_bessel(mu, np.array([s]))[0])
    assert got == pytest.approx(float(ref), abs=1e-14)


def test_bessel_domain():
    with pytest.raises(DomainError):
        modified_bessel(-1.0, 1.0)
    with pytest.raises(DomainError):
        modified_bessel(0.5, -1.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_weights_integrate_monomials(n):
    g = gl(n, 3.0, 0.5)
    for k in range(8):
        exact = 3.0 ** (n + k) / (n + k)
        assert np.dot(g.weights, g.nodes ** k) == pytest.approx(exact, rel=1e-10)


def test_grid_invariants():
    with pytest.raises(DomainError):
        RadialGrid(3, [0.0, 1.0, 0.5], None, 1.0)
    with pytest.raises(DomainError):
        RadialGrid(3, [0.1, 0.2], [1.0, -1.0], 1.0)
    with pytest.raises(DomainError):
        RadialGrid(0, [0.1], None, 1.0)
    g = gl(3, 2.0, 0.3, breakpoints=[1.0])
    assert 1.0 in g.panels
    with pytest.raises(UsageError):
        RadialGrid.from_nodes(3, [0.0, 1.0]).integrate([1.0, 1.0])


def test_function_invariants():
    g = RadialGrid.from_nodes(2, [0.0, 1.0])
    with pytest.raises(DomainError):
        RadialFunction(g, [1.0, np.nan])
    with pytest.raises(DomainError):
        RadialFunction(g, [1.0])
    with pytest.raises(DomainError):
        RadialFunction(g, np.array([1j, 0]))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_gaussian_pair(n):
    src = gl(n, 12.0)
    f = RadialFunction(src, np.exp(-src.nodes ** 2 / 2))
    target = np.linspace(0, 6, 25)
    g = radial_fourier(f, target)
    assert np.max(np.abs(g.values - np.exp(-target ** 2 / 2))) < 1e-6


def test_yukawa_pair():
    # symbolic transform of e^{-r}/r in n = 3: sqrt(2/pi)/rho int_0^inf e^{-r} sin(r rho) dr
    r, k = sp.symbols("r k", positive=True)
    closed = sp.simplify(sp.sqrt(2 / sp.pi) / k * sp.integrate(sp.exp(-r) * sp.sin(r * k), (r, 0, sp.oo)))
    ref = sp.lambdify(k, closed, "numpy")
    src = gl(3, 50.0)
    f = RadialFunction(src, np.exp(-src.nodes) / src.nodes)
    target = np.linspace(0.05, 5, 34)
    g = radial_fourier(f, target)
    assert np.max(np.abs(g.values - ref(target))) < 1e-6
    at_one = radial_fourier(f, [1.0]).values[0]
    assert at_one == pytest.approx(float(closed.subs(k, 1)), abs=1e-6)
    assert float(closed.subs(k, 1)) == pytest.approx(math.sqrt(2 / math.pi) / 2)


def _smooth(rho):
    return rho ** 2 * np.exp(-rho ** 2 / 2) * (1 + np.cos(rho))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_round_trip(n):
    freq = gl(n, 12.0)
    space = gl(n, 14.0)
    f = RadialFunction(freq, _smooth(freq.nodes))
    back = radial_fourier(radial_fourier(f, space, "inverse"), freq, "forward")
    assert np.max(np.abs(back.values - f.values)) < 1e-6


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_plancherel(n):
    freq = gl(n, 12.0)
    space = gl(n, 14.0)
    f = RadialFunction(freq, _smooth(freq.nodes))
    g = radial_fourier(f, space, "inverse")
    assert lq_norm(g, 2) == pytest.approx(lq_norm(f, 2), rel=1e-6)


def test_resolution_error():
    coarse = gl(3, 10.0, 2.0, order=4)
    f = RadialFunction(coarse, np.exp(-coarse.nodes ** 2))
    with pytest.raises(ResolutionError) as err:
        radial_fourier(f, np.linspace(0, 50, 5))
    assert err.value.required == pytest.approx(10 * 50 / (2 * math.pi))
    radial_fourier(f, np.linspace(0, 50, 5), check_resolution=False)


def test_edge_ratio_reported():
    src = gl(3, 3.0)
    g = radial_fourier(RadialFunction(src, np.ones_like(src.nodes)), [0.0, 1.0])
    assert g.info["edge_ratio"] == pytest.approx(1.0, rel=1e-3)


def test_lq_norm_examples():
    g1 = gl(1, 60.0, 0.5)
    assert lq_norm(RadialFunction(g1, np.exp(-g1.nodes)), 1) == pytest.approx(2.0, rel=1e-10)
    g3 = gl(3, 10.0)
    assert lq_norm(RadialFunction(g3, np.exp(-g3.nodes ** 2)), 2) == pytest.approx((math.pi / 2) ** 0.75, rel=1e-10)
    assert lq_norm(RadialFunction(g3, np.zeros_like(g3.nodes)), 3) == 0.0
    h = RadialFunction(g3, -np.exp(-g3.nodes))
    assert lq_norm(h, math.inf) == np.max(np.abs(h.values))
    with pytest.raises(DomainError):
        lq_norm(RadialFunction(g3, g3.nodes), 0.5)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@given(st.floats(1.0, 8.0), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3), st.floats(0.0, 1.0))
def test_lq_norm_homogeneous_and_monotone(q, c, shrink):
    g = gl(2, 5.0, 0.5)
    f = RadialFunction(g, np.exp(-g.nodes) * np.cos(g.nodes))
    assert lq_norm(f.with_values(c * f.values), q) == pytest.approx(abs(c) * lq_norm(f, q), rel=1e-12)
    assert lq_norm(f.with_values(shrink * f.values), q) <= lq_norm(f, q) * (1 + 1e-12)


@given(st.floats(0.0, 500.0), st.floats(0.01, 1.0), st.floats(2.5, 50.0))
def test_partition_of_unity(rho, eps0, ratio):
    spec = CutoffSpec(eps0, ratio * eps0)
    vals = [spec.chi(k, rho) for k in (1, 2, 3)]
    assert sum(vals) == pytest.approx(1.0, abs=1e-15)
    assert all(-1e-15 <= v <= 1 + 1e-15 for v in vals)


def test_cutoff_plateaus():
    spec = CutoffSpec(0.1, 10.0)
    assert (spec.chi1(0.05), spec.chi2(0.05), spec.chi3(0.05)) == (1.0, 0.0, 0.0)
    assert spec.chi2(0.3) == 1.0
    assert spec.chi1(0.2) == 0.0 and spec.chi3(10.0) == 0.0 and spec.chi3(20.0) == 1.0
    with pytest.raises(DomainError):
        CutoffSpec(1.0, 2.0)
    with pytest.raises(DomainError):
        spec.chi(4, 1.0)


def test_smoothstep_is_c2():
    h = 1e-4
    x = np.array([0.0, 1.0])
    d1 = (smoothstep(x + h) - smoothstep(x - h)) / (2 * h)
    d2 = (smoothstep(x + h) - 2 * smoothstep(x) + smoothstep(x - h)) / h ** 2
    assert np.all(np.abs(d1) < 1e-6) and np.all(np.abs(d2) < 1e-3)


def test_default_cutoff_validation():
    spec = CutoffSpec.default_for(MgtParams(1, 1))
    assert (spec.eps0, spec.N0) == (0.05, 20.0)
    CutoffSpec.default_for(MgtParams(0.1, 5.0))
    with pytest.raises(DomainError):
        CutoffSpec(0.3, 10.0).validate(MgtParams(0.1, 5.0))


def test_cutoff_apply_and_derivative():
    g = RadialGrid.from_nodes(3, np.linspace(0, 1, 11))
    f = RadialFunction(g, np.ones(11))
    assert np.array_equal(homogeneous_derivative(f, 0).values, f.values)
    assert np.array_equal(homogeneous_derivative(f, 1).values, g.nodes)
    with pytest.raises(DomainError):
        homogeneous_derivative(f, -0.5)
    spec = CutoffSpec(0.2, 1.0)
    assert np.allclose(cutoff_apply(f, spec, 1).values, spec.chi1(g.nodes))


def test_csv_round_trip(tmp_path):
    g = gl(2, 3.0, 1.0, order=4)
    f = RadialFunction(g, np.sin(g.nodes))
    path = tmp_path / "f.csv"
    f.to_csv(path)
    assert open(path).readline().strip() == "node,value"
    header = json.load(open(str(path) + ".json"))
    assert header["dimension"] == 2 and header["extent"] == 3.0
    back = RadialFunction.from_csv(path)
    assert np.array_equal(back.values, f.values) and np.array_equal(back.nodes, f.nodes)
    assert lq_norm(back, 2) == lq_norm(f, 2)
    assert sorted(os.listdir(tmp_path)) == ["f.csv", "f.csv.json"]

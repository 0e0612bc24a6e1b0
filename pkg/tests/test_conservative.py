import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mgtlab.conservative import (ExponentPair, Region, SampledTrajectory, WaveState, I_integral, admissible_region,
                                 check_I_bound, conservative_predicted_exponent, conservative_predicted_exponent_exact,
                                 duhamel_recover, good_unknown, good_unknown_data, run_conservative_experiment,
                                 vertices, wave_evolve)
from mgtlab.errors import DomainError, ResolutionError, UsageError
from mgtlab.kernels import DataTriple, eval_solution_hat, ode_oracle
from mgtlab.radial import RadialFunction, RadialGrid
from mgtlab.roots import MgtParams

F = Fraction


def test_vertices_n3():
    v = vertices(3)
    assert v == {"P1": (F(3, 4), F(1, 4)), "P2": (0, 0), "P3": (1, 1)}
    t = vertices(3, Region.TRAPEZOID)
    assert list(t) == ["P2", "P5", "P4", "P3"]
    assert t["P4"] == (F(5, 6), F(1, 2)) and t["P5"] == (F(1, 2), F(1, 6))
    v4 = vertices(4)
    assert v4["P2"] == (F(1, 6), F(1, 6)) and v4["P1"] == (F(7, 10), F(3, 10))


def test_membership():
    n = 3
    for a, b in vertices(n).values():
        assert admissible_region(ExponentPair(a, b, n))
    assert admissible_region(ExponentPair(F(1, 2), F(1, 2), n))
    for a, b in [(1, 0), (F(1, 2), F(3, 4)), (F(9, 10), F(1, 4))]:
        assert not admissible_region(ExponentPair(a, b, n))
        with pytest.raises(DomainError, match="triangle"):
            conservative_predicted_exponent(ExponentPair(a, b, n))


@pytest.mark.parametrize("n", [3, 4, 5, 7])
def test_trapezoid_corners_nonnegative(n):
    t = vertices(n, Region.TRAPEZOID)
    for key in ("P4", "P5"):
        pt = ExponentPair(*t[key], n)
        assert conservative_predicted_exponent_exact(pt) >= 0
        assert conservative_predicted_exponent_exact(pt) == 0


@given(st.integers(3, 9), st.fractions(0, 1, max_denominator=24), st.fractions(0, 1, max_denominator=24))
def test_trapezoid_inside_triangle(n, a, b):
    pt = ExponentPair(a, b, n)
    if admissible_region(pt, Region.TRAPEZOID):
        assert admissible_region(pt, Region.TRIANGLE)
        assert conservative_predicted_exponent_exact(pt) >= 0


def test_exponent_formula():
    assert conservative_predicted_exponent(ExponentPair(F(3, 4), F(1, 4), 3)) == -0.5
    assert conservative_predicted_exponent(ExponentPair.from_pq(2, 2, 3)) == 1.0
    pt = ExponentPair.from_pq(1, float("inf"), 1)
    assert (pt.inv_p, pt.inv_q, pt.q) == (1, 0, math.inf)
    with pytest.raises(DomainError):
        ExponentPair(F(3, 2), 0, 3)


def _grid(n=3):
    return RadialGrid.from_nodes(n, np.linspace(0.0, 6.0, 61))


@given(st.floats(0.0, 200.0), st.floats(0.0, 50.0))
def test_mode_energy_conserved(t1, t2):
    g = _grid()
    rho = g.nodes
    s0 = WaveState(RadialFunction(g, np.exp(-rho ** 2)), RadialFunction(g, np.cos(rho)))
    s1 = wave_evolve(s0, t1)
    assert np.allclose(s1.mode_energy(), s0.mode_energy(), rtol=1e-10, atol=1e-14)
    two = wave_evolve(s1, t2)
    one = wave_evolve(s0, t1 + t2)
    assert np.allclose(two.u_hat.values, one.u_hat.values, atol=1e-9)
    assert two.t == pytest.approx(t1 + t2)


def test_wave_identity_and_zero_mode():
    g = _grid()
    s0 = WaveState(RadialFunction(g, np.ones(61)), RadialFunction(g, np.ones(61)))
    same = wave_evolve(s0, 0.0)
    assert np.array_equal(same.u_hat.values, s0.u_hat.values)
    later = wave_evolve(s0, 3.0)
    assert later.u_hat.values[0] == pytest.approx(4.0)
    with pytest.raises(DomainError):
        wave_evolve(s0, -1.0)


def test_good_unknown_errors():
    a = RadialFunction(_grid(), np.ones(61))
    b = RadialFunction(RadialGrid.from_nodes(3, np.linspace(0, 5, 61)), np.ones(61))
    with pytest.raises(UsageError):
        good_unknown(a, b, 1.0)
    assert np.allclose(good_unknown(a, a, 2.0).values, 3.0)


def _data(g):
    rho = g.nodes
    vals = (np.exp(-rho ** 2), rho * np.exp(-rho ** 2), np.cos(rho) * np.exp(-rho))
    return DataTriple(*(RadialFunction(g, v) for v in vals))


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
def test_duhamel_matches_conservative_kernels(tau):
    g = _grid()
    data = _data(g)
    u0, u1 = good_unknown_data(data, tau)
    s0 = WaveState(u0, u1)
    p = MgtParams(tau, 0.0)
    for t in np.linspace(0, 10, 6):
        phi = duhamel_recover(lambda eta: wave_evolve(s0, eta).u_hat.values, data.phi0, tau, t)
        ref = eval_solution_hat(data, t, p).values
        assert np.max(np.abs(phi.values - ref)) < 1e-6 * max(1.0, np.max(np.abs(ref)))


def test_duhamel_matches_ode_oracle():
    g = RadialGrid.from_nodes(3, np.array([0.0, 0.3, 2.0, 5.0]))
    data = _data(g)
    tau = 1.0
    u0, u1 = good_unknown_data(data, tau)
    s0 = WaveState(u0, u1)
    t = np.linspace(0, 10, 11)
    for i, rho in enumerate(g.nodes):
        orc = ode_oracle([f.values[i] for f in data], 10.0, MgtParams(tau, 0.0), rho, t_eval=t)
        for k, tk in enumerate(t):
            phi = duhamel_recover(lambda eta: wave_evolve(s0, eta).u_hat.values, data.phi0, tau, tk)
            assert phi.values[i] == pytest.approx(orc.phi[k], abs=1e-8)


def test_duhamel_from_samples():
    g = RadialGrid.from_nodes(3, np.linspace(0.0, 2.0, 9))
    data = _data(g)
    u0, u1 = good_unknown_data(data, 1.0)
    s0 = WaveState(u0, u1)
    times = np.linspace(0, 8, 801)
    vals = np.array([wave_evolve(s0, tt).u_hat.values for tt in times])
    traj = SampledTrajectory(times, vals, g)
    phi = duhamel_recover(traj, data.phi0, 1.0, 8.0)
    ref = eval_solution_hat(data, 8.0, MgtParams(1.0, 0.0)).values
    assert np.max(np.abs(phi.values - ref)) < 1e-6
    sparse = SampledTrajectory(times[::100], vals[::100], g)
    with pytest.raises(ResolutionError):
        duhamel_recover(sparse, data.phi0, 1.0, 8.0)


def test_I_integral_closed_forms():
    assert I_integral(5.0, 0.0, 2.0) == pytest.approx(2 * (1 - math.exp(-2.5)), rel=1e-12)
    assert I_integral(100.0, 1.0, 1.0) == pytest.approx(100 - (1 - math.exp(-100)), rel=1e-12)
    for t in (0.5, 3.0, 70.0):
        with mpmath.workdps(30):
            ref = mpmath.quad(lambda e: mpmath.exp(-(t - e)) * e ** -0.5, [0, max(0, t - 40), t])
        assert I_integral(t, -0.5, 1.0) == pytest.approx(float(ref), rel=1e-9)
    with pytest.raises(DomainError):
        I_integral(1.0, -1.0, 1.0)


@pytest.mark.parametrize("a", [1.0, 0.0, -0.5])
def test_I_bound(a):
    res = check_I_bound(1.0, a)
    assert res.bounded and np.isfinite(res.worst_ratio)


def test_I_bound_from_pair():
    res = check_I_bound(1.0, ExponentPair(F(3, 4), F(1, 4), 3))
    assert res.exponent == -0.5 and res.bounded
    with pytest.raises(DomainError):
        check_I_bound(1.0, -1.5)


def test_experiment_rejections():
    pt = ExponentPair(F(3, 4), F(1, 4), 3)
    with pytest.raises(UsageError):
        run_conservative_experiment(1.0, None, pt, times=[0.0, 16.0])
    with pytest.raises(DomainError, match="triangle"):
        run_conservative_experiment(1.0, None, ExponentPair(1, 0, 3))


def test_experiment_short_run():
    rep = run_conservative_experiment(1.0, None, ExponentPair(F(3, 4), F(1, 4), 3), times=[16, 32])
    assert rep.predicted_slope == -0.5 and rep.passed
    assert rep.metadata["vertices"]["P1"] == ["3/4", "1/4"]

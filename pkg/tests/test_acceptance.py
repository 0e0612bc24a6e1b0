"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed even
when output capture is on.
"""

import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from mgtlab.conservative import (ExponentPair, Region, WaveState, admissible_region, check_I_bound,
                                 conservative_predicted_exponent_exact, duhamel_recover, good_unknown_data,
                                 run_conservative_experiment, vertices, wave_evolve)
from mgtlab.dissipative import (ExponentQuery, LemmaQuery, NormKind, Oscillation, high_freq_decay_check,
                                kernel_prop_check, l1_exponent, lemma_exponent, lemma_l1_check, linf_exponent,
                                lr_exponent_summed, predicted_exponent_exact)
from mgtlab.errors import DomainError
from mgtlab.kernels import DataTriple, ode_oracle, oracle_deviation
from mgtlab.radial import CutoffSpec, RadialFunction, RadialGrid, lq_norm, radial_fourier
from mgtlab.roots import MgtParams, Zone, cubic_residuals, expansion_order_check, solve_characteristic

F = Fraction
SLOPE_TOL = 0.15


@pytest.fixture
def say(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
    return emit


def test_criterion_01_root_correctness(say):
    rng = np.random.default_rng(20240101)
    worst = 0.0
    for _ in range(200):
        p = MgtParams(rng.uniform(0.1, 5), rng.uniform(0, 5))
        rho = np.array([rng.uniform(0, 100)])
        worst = max(worst, float(np.max(cubic_residuals(p, rho, solve_characteristic(p, rho)))))
    exact = 0.0
    for _ in range(200):
        tau, rho = rng.uniform(0.1, 5), rng.uniform(0, 100)
        r = solve_characteristic(MgtParams(tau, 0.0), rho)
        exact = max(exact, abs(r.lambda1 + 1 / tau), abs(r.muR), abs(r.muI - rho))
    ok = worst < 1e-10 and exact <= 1e-12
    say(1, ok, f"max scaled residual {worst:.2e} (< 1e-10); delta=0 deviation {exact:.1e} (<= 1e-12)")
    assert ok


def test_criterion_02_expansion_orders(say):
    p = MgtParams(1.0, 1.0)
    small = expansion_order_check(p, Zone.SMALL, "lambda1", rho_start=1e-1, rho_stop=1e-3)
    large = expansion_order_check(p, Zone.LARGE, "muI", rho_start=10.0, rho_stop=1e3)
    ok = (small.saturated or small.slope >= 3.5) and large.slope <= -2.5
    s_txt = "saturated" if small.saturated else f"{small.slope:.2f}"
    say(2, ok, f"small lambda1 slope {s_txt} (>= 3.5); large muI slope {large.slope:.2f} (<= -2.5)")
    assert ok


def test_criterion_03_kernel_oracle(say):
    worst_dev, worst_ic = 0.0, 0.0
    for delta in (0.0, 1.0):
        p = MgtParams(1.0, delta)
        spec = CutoffSpec.default_for(p)
        for rho in (0.05, 0.5 * spec.eps0, 2 * spec.N0):
            for ell in (0, 1, 2):
                dev, ic = oracle_deviation(ell, rho, p, t_max=10.0)
                worst_dev, worst_ic = max(worst_dev, dev), max(worst_ic, ic)
    ok = worst_dev < 1e-6 and worst_ic < 1e-8
    say(3, ok, f"max relative deviation {worst_dev:.2e} (< 1e-6); initial conditions {worst_ic:.1e} (< 1e-8)")
    assert ok


def test_criterion_04_lemma_rates(say):
    lines, ok = [], True
    for n in (2, 3):
        for beta in (0, 1):
            for osc, g0 in ((Oscillation.SINC, "cos"), (Oscillation.SINCOS, "cos"), (Oscillation.SINCOS, "sin")):
                q = LemmaQuery(n, beta, 0.5, 1.0, osc, g0)
                stated = float((2 + n // 2) / 2 + 0.5 - beta) if osc is Oscillation.SINC else n / 4 - beta
                assert stated == float(lemma_exponent(q))
                rep = lemma_l1_check(q, sided="two-sided", tolerance=SLOPE_TOL)
                ok &= rep.passed
                tag = osc.value if osc is Oscillation.SINC else f"{osc.value}-{g0}"
                lines.append(f"{tag} n={n} beta={beta}: {rep.measured_slope:+.3f} vs {stated:+.3f}"
                             f" {'ok' if rep.passed else 'off'}")
    exp = lemma_l1_check(LemmaQuery(3, 0, 0.5, 0.0, Oscillation.EXP))
    ok &= exp.passed
    lines.append(f"exp: sup/initial {exp.ratio:.3g} (< 10)")
    say(4, ok, "two-sided +-0.15; " + "; ".join(lines))
    assert ok


def test_criterion_05_proposition_rates(say):
    lines, ok = [], True
    l1_slopes = {}
    for ell in (0, 1, 2):
        for s in (0, 1, 3):
            rep = kernel_prop_check(ell, s, NormKind.L1, False, 3, sided="upper", tolerance=SLOPE_TOL)
            l1_slopes[ell, s] = rep.measured_slope
            ok &= rep.passed
            lines.append(f"L1 ell={ell} s={s}: {rep.measured_slope:+.3f} <= {float(l1_exponent(ell, s, 3)):+.3f}+0.15"
                         f" {'ok' if rep.passed else 'off'}")
    for ell in (1, 2):
        sub = kernel_prop_check(ell, 0, NormKind.L1, True, 3)
        gap = l1_slopes[ell, 0] - sub.measured_slope
        ok &= gap >= 0.5
        lines.append(f"subtracted ell={ell}: gap {gap:.3f} (>= 0.5) {'ok' if gap >= 0.5 else 'off'}")
    for ell, off in ((0, 0.0), (1, 0.5), (2, 0.5)):
        target = -1.5 + off
        assert target == float(linf_exponent(ell, 0, 3))
        rep = kernel_prop_check(ell, 0, NormKind.LINF, False, 3, sided="two-sided", tolerance=SLOPE_TOL)
        ok &= rep.passed
        lines.append(f"Linf ell={ell}: {rep.measured_slope:+.3f} vs {target:+.3f} {'ok' if rep.passed else 'off'}")
    say(5, ok, "; ".join(lines))
    assert ok


def test_criterion_06_high_frequency_decay(say):
    p = MgtParams(1.0, 1.0)
    lines, ok = [], True
    for which in (2, 3):
        rep = high_freq_decay_check(p, [1.5, 2.0, 4.0], which=which, n=3, times=np.linspace(0, 20, 11))
        per_q = rep.metadata["per_q"]
        good = bool(rep.metadata["all_pass"])
        ok &= good
        slopes = ", ".join(f"q={q}: {v:+.3f}" for q, v in per_q.items())
        lines.append(f"chi{which} [{slopes}]")
    say(6, ok, "exponential slopes < -0.01: " + "; ".join(lines))
    assert ok


def test_criterion_07_theorem_table(say):
    got = {s: predicted_exponent_exact(ExponentQuery(3, 1, 2, s)) for s in (0, 1, 2, 3)}
    hand = {0: F(1, 2), 1: F(-1, 4), 2: F(-1, 2), 3: F(-9, 8) + F(1, 2) + F(3, 4) - F(3, 2)}
    values_ok = got == hand
    rnd = random.Random(7)
    identity_ok = True
    for _ in range(1000):
        n = rnd.randint(2, 20)
        s = F(rnd.randint(0, 48), rnd.choice([1, 2, 3, 4, 8]))
        refined = rnd.random() < 0.5
        if refined:
            l1 = max([l1_exponent(0, s, n)] + [l1_exponent(e, s, n, True) for e in (1, 2)])
            li = max([linf_exponent(0, s, n)] + [linf_exponent(e, s, n, True) for e in (1, 2)])
        else:
            l1 = max(l1_exponent(e, s, n) for e in range(3))
            li = max(linf_exponent(e, s, n) for e in range(3))
        identity_ok &= lr_exponent_summed(s, n, 1, refined) == l1
        identity_ok &= lr_exponent_summed(s, n, math.inf, refined) == li
    ok = values_ok and identity_ok
    vals = ", ".join(f"s={s}: {v}" for s, v in got.items())
    say(7, ok, f"{vals} (s=3 by the branch formula; the listed -0.5 disagrees with it); "
               f"L1/Linf endpoint identity over 1000 samples: {'exact' if identity_ok else 'broken'}")
    assert ok


def test_criterion_08_conservative_pipeline(say):
    g = RadialGrid.from_nodes(3, np.linspace(0.0, 6.0, 121))
    rho = g.nodes
    data = DataTriple(RadialFunction(g, np.exp(-rho ** 2)), RadialFunction(g, rho * np.exp(-rho ** 2)),
                      RadialFunction(g, np.cos(rho) * np.exp(-rho)))
    tau = 1.0
    u0, u1 = good_unknown_data(data, tau)
    s0 = WaveState(u0, u1)
    energy = 0.0
    for t in (1.0, 10.0, 100.0, 1000.0):
        e1 = wave_evolve(s0, t).mode_energy()
        energy = max(energy, float(np.max(np.abs(e1 - s0.mode_energy()) / np.maximum(s0.mode_energy(), 1e-300))))
    t_eval = np.linspace(0, 10, 21)
    duh = 0.0
    for i in range(0, rho.size, 20):
        orc = ode_oracle([f.values[i] for f in data], 10.0, MgtParams(tau, 0.0), rho[i], t_eval=t_eval)
        scale = max(1.0, np.max(np.abs(orc.phi)))
        for k, t in enumerate(t_eval):
            phi = duhamel_recover(lambda eta: wave_evolve(s0, eta).u_hat.values, data.phi0, tau, t)
            duh = max(duh, abs(phi.values[i] - orc.phi[k]) / scale)
    bounds = {a: check_I_bound(tau, a) for a in (1.0, 0.0, -0.5)}
    ibound_ok = all(b.bounded for b in bounds.values())
    p1 = ExponentPair(*vertices(3)["P1"], 3)
    diag = ExponentPair(F(1, 2), F(1, 2), 3)
    r1 = run_conservative_experiment(tau, None, p1)
    r2 = run_conservative_experiment(tau, None, diag)
    ok = energy < 1e-10 and duh < 1e-6 and ibound_ok and r1.passed and r2.passed
    ib = ", ".join(f"a={a:g}: sup {b.worst_ratio:.4g}" for a, b in bounds.items())
    say(8, ok, f"energy drift {energy:.1e} (< 1e-10); Duhamel vs oracle {duh:.1e} (< 1e-6); I(t) bounded [{ib}]; "
               f"P1 slope {r1.measured_slope:+.3f} <= {r1.predicted_slope:+.2f}+0.15; "
               f"diagonal slope {r2.measured_slope:+.3f} <= {r2.predicted_slope:+.2f}+0.15")
    assert ok


def test_criterion_09_triangle_membership(say):
    n = 3
    inside = list(vertices(n).values()) + [(F(1, 2), F(1, 2))]
    outside = [(F(1), F(0)), (F(1, 2), F(3, 4)), (F(9, 10), F(1, 4))]
    in_ok = all(admissible_region(ExponentPair(a, b, n)) for a, b in inside)
    out_ok = True
    for a, b in outside:
        out_ok &= not admissible_region(ExponentPair(a, b, n))
        try:
            conservative_predicted_exponent_exact(ExponentPair(a, b, n))
            out_ok = False
        except DomainError:
            pass
    trap = vertices(n, Region.TRAPEZOID)
    ex = {k: conservative_predicted_exponent_exact(ExponentPair(*trap[k], n)) for k in ("P4", "P5")}
    trap_ok = all(v >= 0 for v in ex.values())
    ok = in_ok and out_ok and trap_ok
    say(9, ok, f"vertices and midpoint admissible: {in_ok}; exterior probes rejected: {out_ok}; "
               f"P4 exponent {ex['P4']}, P5 exponent {ex['P5']} (>= 0)")
    assert ok


def test_criterion_10_transform_engine(say):
    def smooth(r):
        return r ** 2 * np.exp(-r ** 2 / 2) * (1 + np.cos(r))

    rt, pl = 0.0, 0.0
    for n in (2, 3, 4):
        freq = RadialGrid.gauss_legendre(n, 12.0, 0.25)
        space = RadialGrid.gauss_legendre(n, 14.0, 0.25)
        f = RadialFunction(freq, smooth(freq.nodes))
        g = radial_fourier(f, space, "inverse")
        back = radial_fourier(g, freq, "forward")
        rt = max(rt, float(np.max(np.abs(back.values - f.values))))
        pl = max(pl, abs(lq_norm(g, 2) / lq_norm(f, 2) - 1))
    src = RadialGrid.gauss_legendre(3, 12.0, 0.25)
    target = np.linspace(0, 6, 25)
    gauss = float(np.max(np.abs(radial_fourier(RadialFunction(src, np.exp(-src.nodes ** 2 / 2)), target).values
                                - np.exp(-target ** 2 / 2))))
    r, k = sp.symbols("r k", positive=True)
    closed = sp.lambdify(k, sp.sqrt(2 / sp.pi) / k * sp.integrate(sp.exp(-r) * sp.sin(r * k), (r, 0, sp.oo)))
    ysrc = RadialGrid.gauss_legendre(3, 50.0, 0.25)
    yt = np.linspace(0.05, 5, 34)
    yuk = float(np.max(np.abs(radial_fourier(RadialFunction(ysrc, np.exp(-ysrc.nodes) / ysrc.nodes), yt).values
                              - closed(yt))))
    ok = rt < 1e-6 and pl < 1e-6 and gauss < 1e-6 and yuk < 1e-6
    say(10, ok, f"round trip {rt:.1e}; Plancherel {pl:.1e}; Gaussian pair {gauss:.1e}; Yukawa pair {yuk:.1e} (all < 1e-6)")
    assert ok

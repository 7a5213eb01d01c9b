"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Quantitative anchors are the closed-form limits the construction must
reproduce; tolerances are pinned here and nowhere else.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from ktrg.lattice import TorusLattice
from ktrg.cutoffs import build_cutoffs, coulomb_constant_c
from ktrg.decomposition import decompose
from ktrg.coefficients import ALPHA_SQ_KT, coeff_a, coeff_b, limit_constants, volume_factor
from ktrg.flow import FlowConfig, trajectory, deviation_profile, kosterlitz_q_array
from ktrg.manifold import ManifoldProblem, solve_fixed_point, solve_shooting, empirical_contraction
from ktrg.polymers import (
    paving, polymer, count_S, count_polyominoes, connected_polymers_up_to,
    reblock_inequality, max_reblock_eta, k_small, j_extraction_check, _small_family,
)
from ktrg.regulators import FieldOnTorus, RegulatorConstants, log_field_regulator, log_strong_regulator
from ktrg.polymers import components
from ktrg.oracle import oracle_lattice, grand_Z, neutral_Z, siegert_kac_check


def _report(num: int, desc: str, ok: bool, detail: str = ""):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] criterion {num}: {desc} {detail}")
    assert ok, f"criterion {num}: {desc} {detail}"


@pytest.fixture(scope="module")
def stack33():
    return decompose(TorusLattice(L=3, R=3, m=0.1))


@pytest.fixture(scope="module")
def stack36():
    return decompose(TorusLattice(L=3, R=6, m=0.0))


@pytest.fixture(scope="module")
def stack96():
    return decompose(TorusLattice(L=9, R=6, m=0.0))


def test_criterion_1_telescoping(stack33):
    t0 = time.time()
    err = stack33.telescoping_error()
    dt = time.time() - t0
    _report(1, "decomposition telescoping at (3,3,0.1)", err <= 1e-8 and dt < 60.0,
            f"(max rel err {err:.2e}, {dt:.1f}s)")


def test_criterion_2_diagonal_law(stack36):
    ln = math.log(3.0) / (2.0 * math.pi)
    v = [abs(stack36.gamma0(j) - ln) * 3.0 ** (j / 4.0) for j in range(1, 6)]
    # uniform boundedness of |c_j| L^(j/4): certified as no growth past 3x
    # the first value (the construction decays faster than the L^(-1/4) rate,
    # so the sequence is in fact decreasing)
    ok = max(v) <= 3.0 * v[0]
    _report(2, "diagonal law |Gamma_j(0) - lnL/2pi| L^(j/4) bounded, j=1..5",
            ok, f"(sequence max {max(v):.2e}, first {v[0]:.2e})")


def test_criterion_3_finite_range(stack33, stack36):
    worst = 0.0
    for st in (stack33, stack36):
        for j in range(st.n_scales):
            worst = max(worst, st.leakage(j))
    _report(3, "leakage beyond L^(j+1)/2 below 1e-6 at every scale",
            worst < 1e-6, f"(max ratio {worst:.2e})")


@pytest.fixture(scope="module")
def coulomb_c():
    return coulomb_constant_c(build_cutoffs(3, 2, 10))


def test_criterion_4_coefficient_limits(stack96, coulomb_c):
    a_lim, b_lim = limit_constants(9, ALPHA_SQ_KT, coulomb_c.c)
    devs_b, devs_a = [], []
    for j in range(1, 5):
        devs_b.append(abs(coeff_b(stack96, j) - b_lim) / b_lim)
        devs_a.append(abs(coeff_a(stack96, j) - a_lim) / a_lim)
    dec_b = all(devs_b[i + 1] < devs_b[i] for i in range(3))
    dec_a = all(devs_a[i + 1] < devs_a[i] for i in range(3))
    ok = devs_b[-1] <= 0.05 and devs_a[-1] <= 0.05 and dec_b and dec_a
    _report(4, "a_j, b_j within 5% of the closed-form limits by j=4 at L=9, decreasing",
            ok, f"(b devs {['%.3g' % d for d in devs_b]}, a devs {['%.3g' % d for d in devs_a]})")


def test_criterion_5_volume_factor(stack36):
    devs = [abs(volume_factor(stack36, j) - 1.0) for j in range(1, 5)]
    dec = all(devs[i + 1] < devs[i] for i in range(3))
    _report(5, "|L^2 e^(-4 pi Gamma_j(0)) - 1| decreasing, below 0.05 by j=4",
            dec and devs[-1] < 0.05, f"(devs {['%.3g' % d for d in devs]})")


def test_criterion_6_flow_decay():
    t0 = time.time()
    sigma = solve_fixed_point(ManifoldProblem(y1=0.01, J=100_000)).sigma
    traj = trajectory(sigma, 0.01, FlowConfig(horizon=100_000))
    fit = deviation_profile(traj, 0.01)
    dt = time.time() - t0
    ok = traj.diverged_at is None and fit.exponent_x is not None and fit.exponent_x <= -1.3 and dt < 10.0
    _report(6, "on-manifold deviation exponent <= -1.3 at J=1e5", ok,
            f"(exponent {fit.exponent_x:.3f}, {dt:.1f}s)")


def test_criterion_7_separatrix_agreement():
    gaps = []
    for y1 in (0.005, 0.01, 0.02):
        fp = solve_fixed_point(ManifoldProblem(y1=y1, J=100_000)).sigma
        sh = solve_shooting(y1, tol=2e-10)
        gaps.append(abs(fp - sh))
    agree = max(gaps) <= 1e-8

    q1 = 0.01
    sigma = solve_fixed_point(ManifoldProblem(y1=q1, J=100_000)).sigma
    cfg = FlowConfig(horizon=10_000, ceiling=10.0)
    q = kosterlitz_q_array(q1, cfg.horizon)

    def escapes(x1):
        t = trajectory(x1, q1, cfg)
        n = t.horizon
        bad = (np.abs(t.x - q[:n]) > q[:n] / 4.0) | (np.abs(t.y - q[:n]) > q[:n] / 4.0)
        idx = np.nonzero(bad)[0]
        return int(idx[0]) + 1 if idx.size else None

    esc_up = escapes(sigma + 1e-6)
    esc_dn = escapes(sigma - 1e-6)
    off_ok = esc_up is not None and esc_dn is not None and escapes(sigma) is None

    zero_exact = solve_fixed_point(ManifoldProblem(y1=0.0, J=1000)).sigma == 0.0 and solve_shooting(0.0) == 0.0
    _report(7, "solver agreement <= 1e-8, 1e-6 perturbations escape before 1e4, Sigma(0)=0",
            agree and off_ok and zero_exact,
            f"(max gap {max(gaps):.2e}, escapes at {esc_up}/{esc_dn})")


def test_criterion_8_contraction():
    lip = empirical_contraction(ManifoldProblem(y1=0.01, J=4000), n_samples=100)
    _report(8, "empirical Lipschitz bound of T at default tau", lip <= 0.5, f"(estimate {lip:.3f})")


def test_criterion_9_polymer_suite():
    s_count = count_S(3)
    oracle = sum(n * c for n, c in count_polyominoes(4).items())
    count_ok = s_count == 99 and oracle == 99

    fam = connected_polymers_up_to(paving(3, 2, 0), 5)
    eta = 0.05
    reblock_ok = all(reblock_inequality(X, eta) for X in fam) and max_reblock_eta(fam) > 0

    ks = {}
    for L in (3, 9):
        V = polymer(paving(L, 2, 1), [(1, 1)])
        ks[L] = k_small(10.0, 0.5, V) / L**2
    ks_ok = max(ks.values()) <= 3.0 * min(ks.values())

    pav0 = paving(3, 2, 0)
    sj = _small_family(pav0)
    sj1 = _small_family(paving(3, 2, 1))
    rng = random.Random(2024)
    ident_ok = True
    for _ in range(100):
        qbar = {s: Fraction(rng.randint(-50, 50), rng.randint(1, 16)) for s in rng.sample(sj, 30)}
        q = {s: Fraction(rng.randint(-50, 50), rng.randint(1, 16)) for s in rng.sample(sj1, 20)}
        rep = j_extraction_check(pav0, qbar, q)
        if not rep.all_hold:
            ident_ok = False
            break
    _report(9, "count_S=99, reblocking eta>0, k_s/L^2 bounded, extraction identities exact",
            count_ok and reblock_ok and ks_ok and ident_ok,
            f"(S={s_count}, k_s/L^2={ks[3]:.3f}/{ks[9]:.3f})")


def test_criterion_10_regulators():
    rng = np.random.default_rng(11)
    pav = paving(3, 3, 1)
    X = polymer(pav, [(1, 1), (1, 2), (5, 5), (7, 0)])
    consts = RegulatorConstants(c1=5.0, c3=1.0)
    fact_ok = True
    dom_ok = True
    x = np.arange(27)
    for trial in range(100):
        vals = np.zeros((27, 27))
        for _ in range(3):
            k = rng.integers(1, 4, size=2)
            a = rng.normal(size=2)
            vals += a[0] * np.cos(2 * np.pi * (k[0] * x[:, None] + k[1] * x[None, :]) / 27)
            vals += a[1] * np.sin(2 * np.pi * (k[0] * x[:, None] - k[1] * x[None, :]) / 27)
        phi = FieldOnTorus((1.0 + trial % 4) * vals)
        whole = log_field_regulator(phi, X, consts)
        parts = sum(log_field_regulator(phi, Y, consts) for Y in components(X))
        if abs(whole - parts) > 1e-12 * max(1.0, abs(whole)):
            fact_ok = False
        if log_strong_regulator(phi, X, consts) > whole + 1e-12:
            dom_ok = False
    _report(10, "regulator factorization exact and G^str <= G at c1=5 on 100 fields",
            fact_ok and dom_ok)


def test_criterion_11_oracle():
    t0 = time.time()
    lat = oracle_lattice(5)
    beta = 8.0 * math.pi  # beta = 8 pi / (1 - s) at s = 0
    pos = grand_Z(lat, beta, 0.05, 4)
    neg = grand_Z(lat, beta, -0.05, 4)
    parity_ok = all(pos.Z_neutral(m) == neg.Z_neutral(m) for m in pos.m_sequence)
    parity_ok &= neutral_Z(lat, beta, 0.05, 4).Z(0.0) == neutral_Z(lat, beta, -0.05, 4).Z(0.0)

    mono_ok = True
    for Q in (1, -1, 2):
        w = [abs(pos.sector_weight(m, Q)) for m in pos.m_sequence]
        mono_ok &= all(w[i + 1] < w[i] for i in range(len(w) - 1))

    rep = siegert_kac_check(lat, beta, 0.05, 4, s=0.0)
    dt = time.time() - t0
    _report(11, "z-parity exact, non-neutral decay monotone, Siegert-Kac <= 1e-10",
            parity_ok and mono_ok and rep.passed and dt < 120.0,
            f"(SK mismatch {rep.max_rel_mismatch:.1e}, {dt:.1f}s)")

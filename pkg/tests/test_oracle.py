import math

import pytest

from ktrg.lattice import yukawa_table, normalized_potential_table
from ktrg.oracle import (
    ChargeConfiguration,
    configuration_energy,
    oracle_lattice,
    grand_Z,
    neutral_Z,
    siegert_kac_check,
    pressure_estimate,
)

BETA = 8.0 * math.pi


def test_single_particle_split():
    lat = oracle_lattice(5, 0.5)
    cfg = ChargeConfiguration((((2, 3), 1),))
    neutral, q_factor = configuration_energy(cfg, lat, normalized=True)
    assert neutral == pytest.approx(0.0, abs=1e-12)
    assert q_factor == pytest.approx(0.5)  # Q^2/2 multiplier of W(0; m)


def test_opposite_charges_same_site_cancel():
    lat = oracle_lattice(5, 0.3)
    cfg = ChargeConfiguration((((1, 1), 1), ((1, 1), -1)))
    assert configuration_energy(cfg, lat) == pytest.approx(0.0, abs=1e-12)


def test_energy_translation_invariant():
    lat = oracle_lattice(5, 0.4)
    base = ChargeConfiguration((((0, 0), 1), ((2, 1), -1), ((3, 3), 1)))
    shifted = ChargeConfiguration(tuple(((x[0] + 2, x[1] + 4), s) for (x, s) in base.particles))
    shifted = ChargeConfiguration(tuple((((x0) % 5, (x1) % 5), s) for ((x0, x1), s) in shifted.particles))
    assert configuration_energy(base, lat) == pytest.approx(configuration_energy(shifted, lat), rel=1e-12)


def test_z_zero_unity():
    lat = oracle_lattice(5)
    res = grand_Z(lat, BETA, 0.0, 3)
    for m in res.m_sequence:
        assert res.Z(m) == 1.0


def test_z_parity():
    lat = oracle_lattice(5)
    pos = grand_Z(lat, BETA, 0.05, 4)
    neg = grand_Z(lat, BETA, -0.05, 4)
    for m in pos.m_sequence:
        # sector sums are charge-conjugation symmetric and the sign rule
        # (-z)^n pairs terms exactly; the surviving (neutral) part is even
        for (n, Q), v in pos.sector_terms[m].items():
            assert neg.sector_terms[m][(n, Q)] == (-1.0) ** n * v
            assert pos.sector_terms[m].get((n, -Q)) == pytest.approx(v * (1 if Q == 0 else 1), rel=1e-12)
        assert pos.Z_neutral(m) == neg.Z_neutral(m)
    n0 = neutral_Z(lat, BETA, 0.05, 4)
    n1 = neutral_Z(lat, BETA, -0.05, 4)
    assert n0.Z(0.0) == n1.Z(0.0)


def test_nonneutral_sectors_vanish_monotonically():
    lat = oracle_lattice(5)
    res = grand_Z(lat, BETA, 0.05, 3)
    for Q in (1, -1, 2):
        weights = [abs(res.sector_weight(m, Q)) for m in res.m_sequence]
        assert all(weights[i + 1] < weights[i] for i in range(len(weights) - 1))


def test_sector_decay_matches_self_energy():
    # sector weight ~ e^{-beta Q^2 W(0;m)/2}: check the log-ratio across the
    # mass sequence against the computed self-energies within a few percent
    lat = oracle_lattice(5)
    res = grand_Z(lat, BETA, 0.05, 3)
    ms = res.m_sequence
    W0 = {m: yukawa_table(oracle_lattice(5, m))[0, 0] for m in ms}
    for Q in (1,):
        for m1, m2 in zip(ms, ms[1:]):
            got = math.log(res.sector_weight(m1, Q) / res.sector_weight(m2, Q))
            predicted = 0.5 * BETA * Q * Q * (W0[m2] - W0[m1])
            assert got == pytest.approx(predicted, rel=0.25)


def test_neutral_coefficient_oracle():
    # independent two-particle formula: a +- pair at x1, x2 has energy
    # -W(x1-x2|0), so the z^2 coefficient is sum_{x1,x2} e^{+beta W(x1-x2|0)}
    lat = oracle_lattice(5)
    Wn = normalized_potential_table(oracle_lattice(5, 0.0))
    direct = 0.0
    for x0 in range(5):
        for x1 in range(5):
            for y0 in range(5):
                for y1 in range(5):
                    direct += math.exp(BETA * Wn[(x0 - y0) % 5, (x1 - y1) % 5])
    res = neutral_Z(lat, BETA, 0.05, 2)
    assert res.coefficient(0.0, 2) == pytest.approx(direct, rel=1e-12)


def test_odd_coefficients_vanish():
    lat = oracle_lattice(5)
    res = neutral_Z(lat, BETA, 0.05, 4)
    assert res.coefficient(0.0, 1) == 0.0
    assert res.coefficient(0.0, 3) == 0.0


def test_grand_Z_stabilizes_to_neutral():
    lat = oracle_lattice(5)
    g = grand_Z(lat, BETA, 0.05, 4)
    n = neutral_Z(lat, BETA, 0.05, 4)
    tail = [g.Z(m) for m in g.m_sequence]
    # the grand sum approaches the neutral value as m -> 0
    gaps = [abs(t - n.Z(0.0)) for t in tail]
    assert all(gaps[i + 1] < gaps[i] for i in range(len(gaps) - 1))
    assert gaps[-1] < 1e-4 * n.Z(0.0)


def test_siegert_kac_identity():
    lat = oracle_lattice(5)
    rep = siegert_kac_check(lat, BETA, 0.05, 4, s=0.0)
    assert rep.passed
    for s in (0.2, 0.4):
        rep = siegert_kac_check(lat, BETA, 0.05, 3, s=s)
        assert rep.max_rel_mismatch <= 1e-10
        assert rep.alpha_sq == pytest.approx((1 - s) * BETA)


def test_pressure_even():
    lat = oracle_lattice(5)
    assert pressure_estimate(lat, BETA, 0.0, 4) == 0.0
    p_pos = pressure_estimate(lat, BETA, 0.05, 4)
    p_neg = pressure_estimate(lat, BETA, -0.05, 4)
    assert p_pos == p_neg


def test_pressure_truncation_tail():
    # n_max 4 -> 6 moves the estimate by less than the n = 6 term bound
    # z^6 |Lambda|^3; the 3x3 torus keeps n = 6 inside the budget
    lat = oracle_lattice(3)
    p4 = pressure_estimate(lat, BETA, 0.05, 4)
    p6 = pressure_estimate(lat, BETA, 0.05, 6)
    bound = 0.05**6 * float(lat.n_sites**3) / (BETA * lat.n_sites)
    assert abs(p6 - p4) <= bound


def test_budget_errors():
    with pytest.raises(ValueError):
        grand_Z(oracle_lattice(9), BETA, 0.05, 2)
    with pytest.raises(ValueError):
        grand_Z(oracle_lattice(5), BETA, 0.05, 7)
    with pytest.raises(ValueError):
        grand_Z(oracle_lattice(5), BETA, 0.05, 2, m_sequence=(0.5, 0.0))


def test_charge_validation():
    with pytest.raises(ValueError):
        ChargeConfiguration((((0, 0), 2),))


def test_per_configuration_weights_bounded():
    # e^{-beta H} <= 1 for m > 0 (positive-definite potential), so each
    # n-particle configuration sum is at most the slot count to the n
    lat = oracle_lattice(5, 0.5)
    res = grand_Z(lat, BETA, 1.0, 3, m_sequence=(0.5,))
    slots = 2 * lat.n_sites
    for n in range(4):
        total = sum(v for (nn, Q), v in res.sector_terms[0.5].items() if nn == n)
        assert total <= slots**n / math.factorial(n) + 1e-9

import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from ktrg.polymers import (
    paving,
    polymer,
    closure,
    components,
    is_small,
    neighborhood,
    count_S,
    count_polyominoes,
    k_small,
    k_large,
    reblock_inequality,
    max_reblock_eta,
    connected_polymers_up_to,
    j_extraction_check,
)
from ktrg.polymers import _small_family


def test_paving_counts():
    assert paving(3, 2, 1).n_blocks == 9
    assert paving(3, 2, 0).n_blocks == 81
    assert paving(3, 2, 2).n_blocks == 1
    with pytest.raises(ValueError):
        paving(3, 2, 3)


def test_partition_exactness():
    # every site in exactly one block, center block holds |x| <= L^j/2
    pav = paving(3, 2, 1)
    seen = {}
    for x0 in range(-13, 14):
        for x1 in range(-13, 14):
            b = pav.block_of((x0, x1))
            seen.setdefault(b, set()).add(((x0) % 27, (x1) % 27))
    assert len(seen) == 9
    assert all(len(sites) == 81 for sites in seen.values())
    assert pav.block_of((0, 0)) == pav.block_of((1, -1)) == pav.block_of((-1, 1))
    assert pav.block_of((2, 0)) != pav.block_of((0, 0))


def test_sites_of_matches_block_of():
    pav = paving(3, 2, 1)
    for blk in [(0, 0), (1, 2), (2, 2)]:
        for site in pav.sites_of(blk):
            assert pav.block_of(site) == blk


def test_closure_basics():
    pav0 = paving(3, 2, 0)
    X = polymer(pav0, [(4, 4)])
    assert closure(X).size == 1
    # two blocks in adjacent coarse cells
    Y = polymer(pav0, [(4, 4), (4, 7)])
    assert closure(Y).size == 2


def test_closure_monotone_and_idempotent_size():
    pav0 = paving(3, 3, 0)
    rng = random.Random(0)
    for _ in range(25):
        blocks = {(rng.randrange(27), rng.randrange(27)) for _ in range(rng.randint(1, 6))}
        extra = blocks | {(rng.randrange(27), rng.randrange(27))}
        X, Y = polymer(pav0, blocks), polymer(pav0, extra)
        assert closure(X).blocks <= closure(Y).blocks
    X = polymer(pav0, [(3, 3), (3, 4)])
    c1 = closure(X)
    assert closure(c1).size >= 1  # next-scale closure well-defined


def test_components_and_smallness():
    pav = paving(3, 2, 0)
    one = polymer(pav, [(4, 4)])
    assert len(components(one)) == 1
    assert is_small(one)
    two_far = polymer(pav, [(0, 0), (4, 4)])
    assert len(components(two_far)) == 2
    assert not is_small(two_far)
    line5 = polymer(pav, [(2, 4), (3, 4), (4, 4), (5, 4), (6, 4)])
    assert len(components(line5)) == 1
    assert not is_small(line5)
    diag = polymer(pav, [(0, 0), (1, 1)])  # corner contact does not connect
    assert len(components(diag)) == 2


def test_winding_polymer_not_small():
    pav = paving(3, 1, 0)  # 3x3 block torus
    row = polymer(pav, [(0, 0), (1, 0), (2, 0)])
    assert len(components(row)) == 1
    assert not is_small(row)


def test_neighborhood_strictly_contains():
    pav = paving(3, 2, 0)
    B = polymer(pav, [(4, 4)])
    star = neighborhood(B)
    assert B.blocks < star.blocks
    # exactly the blocks within graph distance 3: 1 + 4 + 8 + 12 = 25
    assert star.size == 25


def test_count_S_value_and_invariance():
    assert count_S(3) == 99
    counts = count_polyominoes(4)
    assert counts == {1: 1, 2: 2, 3: 6, 4: 19}
    assert sum(n * c for n, c in counts.items()) == 99
    # translation invariance on the enumeration torus
    from ktrg.polymers import _connected_sets_containing

    assert len(_connected_sets_containing((2, 3), 9, 4)) == 99
    assert len(_connected_sets_containing((0, 0), 11, 4)) == 99  # scale/size independent
    with pytest.raises(ValueError):
        count_S(3, side_blocks=5)


def _brute_force_k(A, lam, L, small_only):
    # independent enumeration over all subsets of the LxL fine grid of a
    # single coarse block (closure is the block itself whenever nonempty)
    cells = [(i, j) for i in range(L) for j in range(L)]
    tot = 0.0
    for r in range(1, len(cells) + 1):
        for sub in itertools.combinations(cells, r):
            s = set(sub)
            # connectivity
            stack = [sub[0]]
            seen = {sub[0]}
            while stack:
                c = stack.pop()
                for d in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    n = (c[0] + d[0], c[1] + d[1])
                    if n in s and n not in seen:
                        seen.add(n)
                        stack.append(n)
            if len(seen) != len(s):
                continue
            if (len(s) <= 4) != small_only:
                continue
            tot += (lam * A) ** (-len(s))
    return A * tot


def test_k_small_exact_enumeration():
    pav = paving(3, 2, 1)
    V = polymer(pav, [(1, 1)])
    assert k_small(10.0, 1.0, V) == pytest.approx(_brute_force_k(10.0, 1.0, 3, True), rel=1e-12)
    assert k_large(10.0, 1.0, V) == pytest.approx(_brute_force_k(10.0, 1.0, 3, False), rel=1e-12)


def test_k_small_over_L_squared_bounded():
    vals = {}
    for L in (3, 9):
        pav = paving(L, 2, 1)
        V = polymer(pav, [(1, 1)])
        vals[L] = k_small(10.0, 0.5, V) / L**2
    # k_s(A, lam) <= c_s(lam) L^2: the normalized values stay comparable
    assert vals[9] <= 3.0 * vals[3]
    assert vals[3] <= 3.0 * vals[9]


def test_k_large_decreasing_in_A():
    pav = paving(3, 2, 1)
    V = polymer(pav, [(1, 1)])
    ks = [k_large(A, 1.0, V) for A in (6.0, 10.0, 20.0, 40.0)]
    assert all(ks[i + 1] < ks[i] for i in range(len(ks) - 1))
    # below an A^-eta envelope for large A: fit the decay exponent
    eta = -np.polyfit(np.log([6.0, 10.0, 20.0, 40.0]), np.log(ks), 1)[0]
    assert eta > 1.0


def test_k_budget():
    pav = paving(5, 2, 1)
    V = polymer(pav, [(1, 1), (1, 2)])
    with pytest.raises(RuntimeError):
        k_large(10.0, 1.0, V, budget=1000)


def test_reblock_inequality_single_block():
    pav = paving(3, 2, 0)
    X = polymer(pav, [(4, 4)])
    for eta in (0.05, 0.5, 1.0):
        assert reblock_inequality(X, eta)


def test_reblock_inequality_family():
    pav = paving(3, 2, 0)  # 9x9 block grid
    fam = connected_polymers_up_to(pav, 5)
    assert len(fam) > 7000
    assert all(reblock_inequality(X, 0.05) for X in fam)
    assert max_reblock_eta(fam) > 0.05


def test_reblock_inequality_multicomponent():
    # exercise a binding-side case: many singleton components
    pav = paving(3, 3, 0)
    rng = random.Random(5)
    for _ in range(40):
        blocks = {(rng.randrange(27), rng.randrange(27)) for _ in range(8)}
        X = polymer(pav, blocks)
        assert reblock_inequality(X, 0.05)


def test_j_extraction_identities_random_rationals():
    pav_j = paving(3, 2, 0)
    sj = _small_family(pav_j)
    sj1 = _small_family(paving(3, 2, 1))
    rng = random.Random(42)
    for trial in range(5):
        qbar = {s: Fraction(rng.randint(-30, 30), rng.randint(1, 16)) for s in rng.sample(sj, 80)}
        q = {s: Fraction(rng.randint(-30, 30), rng.randint(1, 16)) for s in rng.sample(sj1, 50)}
        rep = j_extraction_check(pav_j, qbar, q)
        assert rep.all_hold, rep.counterexample


def test_j_extraction_zero_inputs():
    pav_j = paving(3, 2, 0)
    rep = j_extraction_check(pav_j, {}, {})
    assert rep.all_hold


def test_j_extraction_qbar_only():
    # with q = 0 the identities reduce to the qbar telescoping alone
    pav_j = paving(3, 2, 0)
    sj = _small_family(pav_j)
    rng = random.Random(9)
    qbar = {s: Fraction(rng.randint(-9, 9), rng.randint(1, 7)) for s in rng.sample(sj, 40)}
    rep = j_extraction_check(pav_j, qbar, {})
    assert rep.all_hold


def test_size_additive_and_closure_minimal():
    pav = paving(3, 2, 0)
    A = polymer(pav, [(0, 0), (0, 1)])
    B = polymer(pav, [(5, 5), (7, 7)])
    union = polymer(pav, set(A.blocks) | set(B.blocks))
    assert union.size == A.size + B.size
    # the closure is exactly the set of parents of the member blocks: no
    # repaving of the closure can shrink it
    up = closure(union)
    parents = {closure(polymer(pav, [b])).blocks for b in union.blocks}
    assert up.blocks == frozenset().union(*parents)

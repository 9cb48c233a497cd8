"""LPP, the per-run coupling identity, corner growth, and the constants."""

import math
import random

import numpy as np
import pytest
from scipy import stats

from ungar_lab import (
    DomainError,
    IdealLattice,
    build_poset,
    coupled_ideal_run,
    grid_poset,
    ideal_complement_rows,
    lpp_grid_samples,
    lpp_sample,
    max_chain_weight,
    maximal_chains,
    rescaling_constants,
    sn_linear_coefficient,
    tamari_linear_coefficient,
    tasep_absorption_samples,
    tasep_run,
    tasep_trajectory,
    tracy_widom_tail,
    upsilon,
    zeta_estimate,
    zeta_liminf_lower_bound,
    zeta_limsup_estimate,
)
from ungar_lab.rng import replica_generator, replica_random


def two_dim_random_poset(n, seed):
    """Random poset: intersection of the identity and a shuffled order."""
    rnd = random.Random(seed)
    perm = list(range(n))
    rnd.shuffle(perm)
    below = [
        [y for y in range(n) if y < x and perm.index(y) < perm.index(x)]
        for x in range(n)
    ]
    pairs = []
    for x in range(n):
        for y in below[x]:
            if not any(z in below[x] and y in below[z] for z in below[x]):
                pairs.append((y, x))
    return build_poset(pairs, n=n)


def truncated_expected_total(p, cutoff=60):
    """Oracle for E[T] on R_{2,2}: enumerate weight vectors up to a cutoff.

    T = G_a + G_d + max(G_b, G_c) with four independent geometrics; the
    certified truncation error is below 1e-6 at the default cutoff.
    """
    q = 1 - p
    probs = [q ** (k - 1) * p for k in range(1, cutoff + 1)]
    mass = sum(probs)
    tail = 1 - mass
    assert tail**0.25 < 1  # four independent truncations
    e_single = sum(k * probs[k - 1] for k in range(1, cutoff + 1))
    e_max = 0.0
    for b in range(1, cutoff + 1):
        for c in range(1, cutoff + 1):
            e_max += max(b, c) * probs[b - 1] * probs[c - 1]
    total = 2 * e_single + e_max
    # crude certified bound on the truncation error
    err = 4 * tail * (cutoff + 2 / p) * 4
    return total, err


def test_lpp_single_element_and_chain():
    single = build_poset([], n=1)
    chain = build_poset([(0, 1)])
    rng = replica_generator(0, 0)
    singles = [lpp_sample(single, 0.5, rng).total for _ in range(20_000)]
    chains = [lpp_sample(chain, 0.5, rng).total for _ in range(20_000)]
    assert abs(np.mean(singles) - 2.0) < 3 * np.std(singles) / math.sqrt(20_000)
    assert abs(np.mean(chains) - 4.0) < 3 * np.std(chains) / math.sqrt(20_000)


def test_lpp_passage_equals_chain_enumeration():
    # the DP pass against the explicit maximal-chain oracle
    rnd = random.Random(4)
    for seed in range(20):
        poset = two_dim_random_poset(7, seed)
        weights = [rnd.randint(1, 9) for _ in range(poset.n)]
        via_chains = max(
            sum(weights[x] for x in chain) for chain in maximal_chains(poset)
        )
        assert max_chain_weight(poset, weights) == via_chains


def test_lpp_r22_mean_matches_truncated_enumeration():
    expected, err = truncated_expected_total(0.5)
    assert expected == pytest.approx(20 / 3, abs=1e-4)  # 2/p + E max(G,G')
    samples = lpp_grid_samples(2, 2, 0.5, 40_000, seed=5)
    stderr = samples.std(ddof=1) / math.sqrt(len(samples))
    assert abs(samples.mean() - expected) <= 3 * stderr + err


def test_coupling_identity_on_grids_and_random_posets():
    rnd = replica_random(9, 0)
    for poset in [grid_poset(3, 2), two_dim_random_poset(8, 1)]:
        for _ in range(300):
            run = coupled_ideal_run(poset, 0.5, rnd)
            # absorbed iff the max-chain sum of the counted weights matches;
            # coupled_ideal_run raises CouplingViolation internally otherwise
            assert run.absorption == max_chain_weight(poset, run.weights)


def test_coupled_weights_are_geometric():
    poset = grid_poset(2, 2)
    rnd = replica_random(10, 0)
    first_cell = []
    for _ in range(20_000)        :
        first_cell.append(coupled_ideal_run(poset, 0.4, rnd).weights[0])
    counts = np.bincount(first_cell, minlength=12)[1:12]
    expected = [0.4 * 0.6 ** (k - 1) * len(first_cell) for k in range(1, 11)]
    expected.append(0.6**10 * len(first_cell))
    observed = list(counts[:10]) + [len(first_cell) - int(sum(counts[:10]))]
    _, pvalue = stats.chisquare(observed, expected)
    assert pvalue > 0.001


def test_antichain_and_chain_absorption_structure():
    anti = build_poset([], n=2)
    rnd = replica_random(11, 0)
    for _ in range(200):
        run = coupled_ideal_run(anti, 0.5, rnd)
        assert run.absorption == max(run.weights)
    chain = build_poset([(0, 1)])
    for _ in range(200):
        run = coupled_ideal_run(chain, 0.5, rnd)
        assert run.absorption == sum(run.weights)


def test_complement_is_young_diagram_every_step():
    grid = grid_poset(3, 4)
    rnd = replica_random(12, 0)
    for _ in range(100):
        run = coupled_ideal_run(grid, 0.5, rnd, record_states=True)
        shapes = [ideal_complement_rows(grid, mask) for mask in run.masks]
        assert shapes[0] == (0, 0, 0)
        assert shapes[-1] == (4, 4, 4)
        for a, b in zip(shapes, shapes[1:]):
            assert all(y - x in (0, 1) for x, y in zip(a, b))


def test_tasep_single_cell_is_geometric():
    samples = tasep_absorption_samples(1, 1, 0.25, 40_000, seed=6)
    stderr = samples.std(ddof=1) / math.sqrt(len(samples))
    assert abs(samples.mean() - 4.0) <= 3 * stderr
    counts = np.bincount(samples, minlength=10)
    assert counts[0] == 0  # takes at least one step


def test_tasep_scalar_matches_vectorized_distribution():
    rnd = replica_random(13, 0)
    scalar = np.array([tasep_run(2, 3, 0.5, rnd) for _ in range(8_000)])
    vec = tasep_absorption_samples(2, 3, 0.5, 8_000, seed=14)
    _, pvalue = stats.ks_2samp(scalar, vec)
    assert pvalue > 0.001


def test_tasep_matches_ideal_chain_distribution():
    rnd = replica_random(15, 0)
    grid = grid_poset(3, 3)
    chain_samples = np.array(
        [coupled_ideal_run(grid, 0.5, rnd).absorption for _ in range(8_000)]
    )
    tasep_samples = tasep_absorption_samples(3, 3, 0.5, 8_000, seed=16)
    _, pvalue = stats.ks_2samp(chain_samples, tasep_samples)
    assert pvalue > 0.001


def test_tasep_window_independence():
    # identical cell-keyed coins: the window trajectory must not change
    # when the simulation tracks a larger region
    def coin(seed):
        def fn(t, i, j):
            return (hash((seed, t, i, j)) & 0xFFFF) / 0x10000 < 0.5

        return fn

    rnd = replica_random(17, 0)
    for seed in range(10):
        small = tasep_trajectory(3, 3, 0.5, rnd, steps=40, bit_fn=coin(seed))
        big = tasep_trajectory(7, 9, 0.5, rnd, steps=40, bit_fn=coin(seed))
        for lam_small, lam_big in zip(small, big):
            clipped = tuple(min(x, 3) for x in lam_big[:3])
            assert clipped == lam_small


def test_rescaling_constants_values():
    phi, eta = rescaling_constants(0.5, 1, 1)
    assert phi == pytest.approx(2 * (2 + math.sqrt(2)), rel=1e-12)
    # direct substitution of the eta formula at p = 1/2, x = y = 1
    expected_eta = (
        0.5 ** (1 / 6) / 0.5 * (1 + math.sqrt(0.5)) ** (2 / 3) * (1 + math.sqrt(0.5)) ** (2 / 3)
    )
    assert eta == pytest.approx(expected_eta, rel=1e-12)
    with pytest.raises(DomainError):
        rescaling_constants(1.0, 1, 1)
    with pytest.raises(DomainError):
        rescaling_constants(0.5, 0, 1)


def test_phi_am_gm_bound():
    rnd = random.Random(18)
    for _ in range(500):
        p = rnd.uniform(0.05, 0.95)
        x, y = rnd.uniform(0.1, 50), rnd.uniform(0.1, 50)
        phi, _ = rescaling_constants(p, x, y)
        assert phi <= (x + y) * (1 + math.sqrt(1 - p)) / p + 1e-12


def test_tracy_widom_tail_values():
    assert tracy_widom_tail(4.0) == pytest.approx(
        math.exp(-32 / 3) / (256 * math.pi), rel=1e-12
    )
    ts = np.linspace(1, 9, 60)
    vals = [tracy_widom_tail(t) for t in ts]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        tracy_widom_tail(0.0)


def test_lln_toward_phi_small():
    samples = lpp_grid_samples(20, 20, 0.5, 400, seed=19).astype(float)
    phi, _ = rescaling_constants(0.5, 20, 20)
    assert 0.8 <= samples.mean() / phi <= 1.1


def test_upsilon_properties():
    assert upsilon(1.0, 5.0) == 0.0
    # scaling invariance under x -> (1-p) x
    for p in (0.3, 0.5, 0.8):
        for x in (0.7, 3.0, 100.0):
            assert upsilon(p, x) == pytest.approx(upsilon(p, (1 - p) * x), rel=1e-9)
    with pytest.raises(DomainError):
        upsilon(0.5, -1.0)


def test_zeta_trivial_and_small_n_exact():
    est, _ = zeta_estimate(0.5, 1, 2_000, seed=20)
    assert est == 1.0  # a single maximum is trivially unique
    # n = 2: P(X != Y) = 1 - p/(1+q) in closed form
    p = 0.4
    exact = 1 - p / (2 - p)
    est, err = zeta_estimate(p, 2, 60_000, seed=21)
    assert abs(est - exact) <= 3 * err


def test_zeta_approaches_upsilon():
    est, err = zeta_estimate(0.5, 1_000, 40_000, seed=22)
    assert abs(est - upsilon(0.5, 1_000)) <= 0.01 + 3 * err
    assert est >= zeta_liminf_lower_bound(0.5) - 3 * err


def test_zeta_limsup_and_coefficients():
    z = zeta_limsup_estimate(0.5)
    assert 0.7 < z < 0.75
    assert z >= zeta_liminf_lower_bound(0.5)
    assert sn_linear_coefficient(0.5) == pytest.approx(
        (1 + math.sqrt(0.5)) / 0.5, rel=1e-12
    )
    coeff = tamari_linear_coefficient(0.5)
    assert 1.0 < coeff < 3.0


def test_survival_dominance_for_sub_ideals():
    # started from any smaller ideal, the chain absorbs stochastically
    # no later than from the full ideal
    from ungar_lab import run_chain
    from ungar_lab.poset import order_ideals

    grid = grid_poset(2, 3)
    lattice = IdealLattice(grid)
    reps = 4_000
    full_rnd = replica_random(41, 0)
    full = np.array(
        [run_chain(lattice, 0.5, full_rnd).absorption for _ in range(reps)]
    )
    for mask in order_ideals(grid).ideal_masks:
        if mask in (0, grid.full_mask()):
            continue
        sub_rnd = replica_random(42 + mask, 0)
        sub = np.array(
            [
                run_chain(lattice, 0.5, sub_rnd, start=mask).absorption
                for _ in range(reps // 4)
            ]
        )
        for t in range(1, int(full.max()) + 1):
            left = (sub >= t).mean()
            right = (full >= t).mean()
            tol = 3 * math.sqrt(
                left * (1 - left) / len(sub) + right * (1 - right) / reps
            )
            assert left <= right + tol, (mask, t)

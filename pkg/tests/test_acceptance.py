"""Acceptance suite: one test per exit criterion, each printing a PASS line
(run with ``pytest tests/test_acceptance.py -s`` to see them).

Criteria 1-2 check the analytical grids cell-by-cell against the golden
reference values (tabulated at slot duration 0.5); criterion 3 cross-checks
simulation against analysis; criterion 4 the closed-form optimizer; criteria
5-7 are the property suites and qualitative trend checks.
"""

import math
import time
from dataclasses import replace
from itertools import product

import numpy as np

from noma_aoi import (SystemConfig, absorbing_moments, average_aoi_nrt,
                      average_aoi_rt, beta_any, beta_u1,
                      brute_force_success_dist, configure_snr_ladder,
                      db_to_linear, gamma_max, optimal_ptx_nrt_k2,
                      ptx_grid_argmin, run_replications, stationary_distribution,
                      transition_matrix, uniform_q)
from noma_aoi.experiments import table_grid, TABLE_POWERS_DB, TABLE_K_VALUES

from reference_values import AOI_NRT, AOI_RT, POWERS_DB
from test_rt import product_chain_lumped_stationary

TOL_TABLE = 0.005


def base_cfg(m=8, k=2, lam=0.5, p_tx=0.5, power_db=20.0, rate=0.2, q=None,
             slot=1.0):
    return SystemConfig(m=m, k=k, lam=lam, p_tx=p_tx,
                        q=uniform_q(k) if q is None else q,
                        power=db_to_linear(power_db), rate=rate,
                        slot_duration=slot)


def _check_grid(golden, rows):
    worst = 0.0
    for row in rows:
        k = row[0]
        for j, value in enumerate(row[1:]):
            err = abs(value - golden[k][j])
            worst = max(worst, err)
            assert err <= TOL_TABLE, (
                f"k={k}, p={TABLE_POWERS_DB[j]} dB: {value:.4f} vs "
                f"{golden[k][j]:.4f}")
    return worst


def test_criterion_1_nrt_table_golden():
    assert POWERS_DB == TABLE_POWERS_DB and set(AOI_NRT) == set(TABLE_K_VALUES)
    start = time.perf_counter()
    _, rows = table_grid("nrt")
    elapsed = time.perf_counter() - start
    worst = _check_grid(AOI_NRT, rows)
    assert elapsed < 10.0
    print(f"\nACCEPTANCE 1 (nrt table, 81 cells): PASS "
          f"(max abs err {worst:.2e}, {elapsed:.1f}s)")


def test_criterion_2_rt_table_golden():
    start = time.perf_counter()
    _, rows = table_grid("rt")
    elapsed = time.perf_counter() - start
    worst = _check_grid(AOI_RT, rows)
    assert elapsed < 60.0
    print(f"\nACCEPTANCE 2 (rt table, 81 cells): PASS "
          f"(max abs err {worst:.2e}, {elapsed:.1f}s)")


def test_criterion_3_simulation_matches_analysis():
    start = time.perf_counter()
    worst = 0.0
    for idx, (scheme, m, k) in enumerate(product(("nrt", "rt"), (2, 8, 16),
                                                 (2, 4))):
        cfg = base_cfg(m=m, k=k)
        if scheme == "nrt":
            analytic = average_aoi_nrt(cfg).avg_aoi
        else:
            analytic = average_aoi_rt(cfg)
        summary = run_replications(cfg, scheme, 300_000,
                                   base_seed=1000 + 100 * idx, reps=8)
        rel = abs(summary.mean - analytic) / analytic
        worst = max(worst, rel)
        assert rel <= 0.02, (scheme, m, k, analytic, summary.mean, rel)
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    print(f"\nACCEPTANCE 3 (sim vs analysis, 12 configs): PASS "
          f"(max rel err {worst:.3%}, {elapsed:.0f}s)")


def _simulated_minimum_location(cfg, center, seed):
    """Vertex of a quadratic fit through simulated AoI means on the 0.01 grid
    around ``center`` (the flat optimum needs the fit to beat Monte Carlo
    noise on single points)."""
    points = [round(center + 0.01 * d, 10) for d in range(-3, 4)]
    points = [p for p in points if 0.0 < p <= 1.0]
    means = []
    for p in points:
        summary = run_replications(replace(cfg, p_tx=p), "nrt", 120_000,
                                   base_seed=seed, reps=4)
        means.append(summary.mean)
    coeffs = np.polyfit(points, means, 2)
    assert coeffs[0] > 0.0
    return -coeffs[1] / (2.0 * coeffs[0])


def test_criterion_4_closed_form_optimizer():
    start = time.perf_counter()
    for j, q1 in enumerate((0.5, 0.6, 0.7)):
        cfg = base_cfg(m=32, k=2, q=(q1, 1.0 - q1))
        star = optimal_ptx_nrt_k2(cfg)
        grid = ptx_grid_argmin(cfg, "nrt", 0.01)
        assert abs(star - grid) <= 0.02, (q1, star, grid)
        sim_min = _simulated_minimum_location(cfg, grid, seed=7000 + 1000 * j)
        assert abs(sim_min - star) <= 0.02, (q1, star, sim_min)
    elapsed = time.perf_counter() - start
    print(f"\nACCEPTANCE 4 (optimal p_tx, q1 in 0.5/0.6/0.7): PASS "
          f"({elapsed:.0f}s)")


def test_criterion_5_combinatorics_properties():
    rng = np.random.default_rng(2024)
    # normalization over success counts
    for _ in range(50):
        k = int(rng.integers(1, 6))
        q = tuple(rng.dirichlet(np.ones(k)))
        for i in range(1, 11):
            total = sum(beta_any(i, x, q) for x in range(gamma_max(i, k) + 1))
            assert abs(total - 1.0) <= 1e-10
    # exchangeability link and exact zeros
    for _ in range(25):
        k = int(rng.integers(1, 6))
        q = tuple(rng.dirichlet(np.ones(k)))
        for i in range(1, 9):
            for x in range(1, gamma_max(i, k) + 1):
                assert abs(beta_u1(i, x, q) - (x / i) * beta_any(i, x, q)) <= 1e-12
        for x in range(1, k):
            assert beta_u1(x + 1, x, q) == 0.0
            assert beta_any(x + 1, x, q) == 0.0
    # brute-force oracle equivalence
    for _ in range(50):
        k = int(rng.integers(1, 5))
        q = tuple(rng.dirichlet(np.ones(k)))
        for i in range(1, 7):
            anon = brute_force_success_dist(i, q).values
            tagged = brute_force_success_dist(i, q, track_user1=True).values
            for x in range(gamma_max(i, k) + 1):
                assert abs(beta_any(i, x, q) - anon.get(x, 0.0)) <= 1e-12
                if x >= 1:
                    assert abs(beta_u1(i, x, q) - tagged.get(x, 0.0)) <= 1e-12
    print("\nACCEPTANCE 5 (combinatorics properties): PASS")


def test_criterion_6_markov_properties():
    rng = np.random.default_rng(4096)
    # row stochasticity and stationary residual across the size grid
    for m in (1, 2, 4, 8, 16, 32):
        for k in (1, 2, 4, 8):
            cfg = base_cfg(m=m, k=k, lam=float(rng.uniform(0.05, 1.0)),
                           p_tx=float(rng.uniform(0.05, 1.0)),
                           power_db=float(rng.uniform(-5.0, 20.0)))
            matrix = transition_matrix(configure_snr_ladder(cfg), cfg)
            assert np.abs(matrix.sum(axis=1) - 1.0).max() <= 1e-10
            pi = stationary_distribution(matrix)
            assert np.abs(pi @ matrix - pi).max() <= 1e-10
    # exact product-chain lumping oracle
    for m, k in ((2, 1), (2, 2), (3, 1), (3, 2)):
        cfg = base_cfg(m=m, k=k, lam=float(rng.uniform(0.1, 0.9)),
                       p_tx=float(rng.uniform(0.1, 1.0)),
                       power_db=float(rng.uniform(0.0, 20.0)))
        ladder = configure_snr_ladder(cfg)
        lumped = product_chain_lumped_stationary(cfg, ladder)
        analytic = stationary_distribution(transition_matrix(ladder, cfg))
        assert np.abs(lumped - analytic).max() <= 1e-10
    # absorbing-chain identity and the two AoI paths
    for _ in range(40):
        lam = float(rng.uniform(0.02, 1.0))
        pt = float(rng.uniform(0.02, 1.0))
        t = float(rng.uniform(0.25, 2.0))
        mom = absorbing_moments(lam, pt, t)
        assert abs(mom.expected_steps - (1 / lam + 1 / pt)) <= 1e-10
        cfg = base_cfg(lam=lam, slot=t)
        composed = (mom.mean_system_time
                    + mom.second_moment_interval / (2 * mom.mean_interval))
        assert abs(average_aoi_rt(cfg, p_tilde=pt) - composed) <= 1e-10
    print("\nACCEPTANCE 6 (markov properties): PASS")


def test_criterion_7_trend_checks():
    # AoI nondecreasing in the number of sources, both schemes
    for scheme in ("nrt", "rt"):
        previous = -math.inf
        for m in (2, 4, 8, 16, 32):
            cfg = base_cfg(m=m, k=4)
            value = (average_aoi_nrt(cfg).avg_aoi if scheme == "nrt"
                     else average_aoi_rt(cfg))
            assert value >= previous - 1e-9, (scheme, m)
            previous = value
    # two or more SNR levels beat the single-level baseline for crowded systems
    for scheme in ("nrt", "rt"):
        for m in (8, 16):
            single = base_cfg(m=m, k=1)
            baseline = (average_aoi_nrt(single).avg_aoi if scheme == "nrt"
                        else average_aoi_rt(single))
            for k in (2, 4):
                cfg = base_cfg(m=m, k=k)
                value = (average_aoi_nrt(cfg).avg_aoi if scheme == "nrt"
                         else average_aoi_rt(cfg))
                assert value < baseline, (scheme, m, k)
    # certain arrivals collapse the rt form to T (2 + p) / (2 p)
    rng = np.random.default_rng(777)
    for _ in range(20):
        pt = float(rng.uniform(0.01, 1.0))
        t = float(rng.uniform(0.25, 2.0))
        cfg = base_cfg(lam=1.0, slot=t)
        assert abs(average_aoi_rt(cfg, p_tilde=pt)
                   - t * (2 + pt) / (2 * pt)) <= 1e-12
    print("\nACCEPTANCE 7 (trend checks): PASS")

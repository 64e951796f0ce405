"""Acceptance suite: one PASS/FAIL line per criterion, at its stated tolerance."""

import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from conftest import product_vector, random_density, to_tensor
from polquasi.coherence import coherence_scan, invariance_check, random_unitary
from polquasi.qpqc import decompose, stationary_states_exact, stationary_states_numeric
from polquasi.simulate import SourceModel, distinguishable_pair_state, hom_curve, model_state, simulate_dataset
from polquasi.stats import monte_carlo_qpqc
from polquasi.states import dicke_state
from polquasi.tomography import (
    omega_from_waveplates,
    predicted_probabilities,
    reconstruct_density,
    reconstruct_from_probabilities,
    waveplate_grid,
)
from polquasi.witness import dicke_projector, gmax_dicke

RHO_11 = dicke_state(2, 1).projector()


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed=None, limit=None):
        timing = "" if elapsed is None else f" [{elapsed:.2f} s, limit {limit} s]"
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}{timing}")
        assert ok, detail

    return emit


def test_criterion_1_ideal_quasiprobabilities(report):
    t0 = time.perf_counter()
    dec = decompose(RHO_11)
    elapsed = time.perf_counter() - t0
    probs = dict(zip(dec.labels, dec.quasi_probs))
    target = {"D": 0.5, "A": 0.5, "R": 0.5, "L": 0.5, "H": -0.5, "V": -0.5}
    axes = sorted(map(tuple, np.round(dec.gammas).astype(int))) == sorted(
        [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    )
    p_ok = set(probs) == set(target) and all(abs(probs[k] - v) < 1e-12 for k, v in target.items())
    # brute-force identity sum_i P_i |s_i><s_i| in the tensor space
    vecs = [product_vector(s.qubit.vector, 2) for s in dec.solutions]
    rebuilt = sum(p * np.outer(v, v.conj()) for p, v in zip(dec.quasi_probs, vecs))
    oracle = np.linalg.norm(rebuilt - to_tensor(RHO_11))
    ok = axes and p_ok and dec.residual_norm < 1e-10 and oracle < 1e-10 and elapsed < 1
    detail = (
        f"P={{{', '.join(f'{k}: {probs.get(k, np.nan):+.3f}' for k in 'DARLHV')}}}, "
        f"residual {dec.residual_norm:.1e}, oracle {oracle:.1e}"
    )
    report(1, ok, detail, elapsed, 1)


def test_criterion_2_residual_magnitude(report):
    rng = np.random.default_rng(2)
    states = [RHO_11, distinguishable_pair_state()]
    src = SourceModel("ideal_pair", visibility=0.91)
    states.append(reconstruct_density(simulate_dataset(src, waveplate_grid(), seed=0), 2).density.elements)
    states += [random_density(3, rng) for _ in range(50)]
    residuals = []
    for rho in states:
        dec = decompose(rho)
        # a decomposition is exact when the stationary states span the state
        if len(dec.solutions) == 6:
            residuals.append(dec.residual_norm)
    worst = max(residuals)
    report(2, worst <= 1e-9, f"max residual {worst:.1e} over {len(residuals)} exact decompositions")


def test_criterion_3_distinguishable_soundness(report):
    t0 = time.perf_counter()
    dec = decompose(distinguishable_pair_state())
    elapsed = time.perf_counter() - t0
    low = float(dec.quasi_probs.min())
    report(3, low >= -1e-8 and elapsed < 1, f"min P = {low:.2e}", elapsed, 1)


def _sphere_max(op):
    # Dicke projectors are invariant about z, so a polar-angle search covers the sphere
    n = op.shape[0] - 1
    big = to_tensor(op)

    def value(theta):
        v = product_vector(np.array([np.cos(theta / 2), np.sin(theta / 2)]), n)
        return float(np.real(v.conj() @ big @ v))

    grid = np.linspace(0, np.pi, 721)
    vals = [value(t) for t in grid]
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda t: -value(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    return max(max(vals), -res.fun)


def test_criterion_4_witness_bounds(report):
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(1, 9):
        for k in range(n + 1):
            worst = max(worst, abs(gmax_dicke(n, k) - _sphere_max(dicke_projector(n, k))))
    elapsed = time.perf_counter() - t0
    spots = [gmax_dicke(n, 0) for n in range(1, 9)] + [gmax_dicke(2, 1), gmax_dicke(4, 2)]
    spots_ok = np.allclose(spots, [1] * 8 + [0.5, 0.375], atol=1e-15)
    ok = worst < 1e-6 and spots_ok and elapsed < 10
    report(4, ok, f"max |closed form - sphere max| = {worst:.1e}; g_max(2,1)={spots[8]}, g_max(4,2)={spots[9]}", elapsed, 10)


def test_criterion_5_tomography_round_trip(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    grid = waveplate_grid()
    dirs = [omega_from_waveplates(s) for s in grid]
    worst = 0.0
    for n in (2, 3):
        for _ in range(20):
            rho = random_density(n + 1, rng)
            probs = np.array([predicted_probabilities(rho, d) for d in dirs])
            worst = max(worst, np.linalg.norm(reconstruct_from_probabilities(probs, grid, n) - rho))
    elapsed = time.perf_counter() - t0
    ok = len(grid) == 156 and worst < 1e-8 and elapsed < 30
    report(5, ok, f"{len(grid)} settings, max Frobenius error {worst:.1e}", elapsed, 30)


def test_criterion_6_hom_physics(report):
    t0 = time.perf_counter()
    shots = 100_000
    ideal = hom_curve(SourceModel("ideal_pair", shots_per_setting=shots), [0.0, 45.0, -45.0], seed=6)
    ideal_ok = True
    for q, p, _ in ideal:
        target = 1.0 if q == 0 else 0.0
        sigma = np.sqrt(target * (1 - target) / shots)
        ideal_ok &= abs(p - target) <= 3 * sigma
    grid = np.arange(-90.0, 90.5, 1.0)
    dist = hom_curve(SourceModel("distinguishable_pair", shots_per_setting=shots), grid, seed=6)
    margin = min(p - (0.5 - 3 * s) for _, p, s in dist)
    q_low, p_low, _ = min(dist, key=lambda r: r[1])
    elapsed = time.perf_counter() - t0
    ok = ideal_ok and margin >= 0 and elapsed < 30
    detail = (
        f"ideal (0, +45, -45) -> {[round(r[1], 5) for r in ideal]}; "
        f"distinguishable minimum {p_low:.4f} at QWP {q_low:+.0f} deg (need >= 0.5 - 3 sigma)"
    )
    report(6, ok, detail, elapsed, 30)


def test_criterion_7_invariance_contrast(report):
    rng = np.random.default_rng(7)
    src = SourceModel("ideal_pair", visibility=0.91)
    noisy = reconstruct_density(simulate_dataset(src, waveplate_grid(), seed=7), 2).density.elements
    rotations = [random_unitary(rng) for _ in range(25)]
    inv = invariance_check(noisy, rotations)
    rows = coherence_scan(RHO_11, np.arange(0.0, 90.5, 1.0))
    c = np.array([r[1] for r in rows])
    spread = float(c.max() - c.min())
    ok = inv.max_sorted_p_deviation < 1e-6 and spread > 0.1 and abs(c[0]) < 1e-12 and abs(c[45] - 0.5) < 1e-12
    detail = f"sorted P deviation {inv.max_sorted_p_deviation:.1e}; C_l2 spread {spread:.3f} (0 deg: {c[0]:.1e}, 45 deg: {c[45]:.3f})"
    report(7, ok, detail)


@pytest.mark.slow
def test_criterion_8_end_to_end_pipeline(report):
    t0 = time.perf_counter()
    src = SourceModel("ideal_pair", shots_per_setting=1_000_000)
    rho = reconstruct_density(simulate_dataset(src, waveplate_grid(), seed=0), 2).density
    dec = decompose(rho)
    mc = monte_carlo_qpqc(rho, dec, z_samples=30_000, seed=0)
    elapsed = time.perf_counter() - t0
    negatives = int(np.sum(dec.quasi_probs < -5 * mc.std))
    total = float(dec.quasi_probs.sum())
    ok = negatives == 2 and abs(total - 1) <= 1e-3 and elapsed < 600
    detail = (
        f"{len(dec.solutions)} stationary states, {negatives} below -5 sigma, sum P = {total:.4f}, "
        f"residual {dec.residual_norm:.1e}, {mc.n_used}/{mc.n_samples} complete samples"
    )
    report(8, ok, detail, elapsed, 600)


def test_criterion_9_solver_cross_validation(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    worst_angle = worst_g = 0.0
    counts_ok = True
    for _ in range(50):
        rho = random_density(3, rng)
        ex, nu = stationary_states_exact(rho), stationary_states_numeric(rho)
        if len(ex) != len(nu):
            counts_ok = False
            continue
        for a, b in zip(ex, nu):
            worst_angle = max(worst_angle, float(np.arccos(np.clip(a.gamma @ b.gamma, -1, 1))))
            worst_g = max(worst_g, abs(a.g - b.g))
    elapsed = time.perf_counter() - t0
    ok = counts_ok and worst_angle < 1e-5 and worst_g < 1e-8 and elapsed < 60
    report(9, ok, f"max angle {worst_angle:.1e} rad, max |dg| {worst_g:.1e}, solution counts match: {counts_ok}", elapsed, 60)

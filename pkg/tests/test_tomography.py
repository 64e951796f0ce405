import logging

import numpy as np
import pytest

from conftest import analyzer_probabilities, random_density
from polquasi.errors import RankDeficientError, ValidationError
from polquasi.simulate import SourceModel, simulate_dataset
from polquasi.states import dicke_state
from polquasi.stats import perturb_density
from polquasi.tomography import (
    CoincidenceDataset,
    DensityMatrix,
    MeasurementSetting,
    PoincareDirection,
    build_design_matrix,
    hermitian_inverse,
    normalized_probabilities,
    omega_from_waveplates,
    povm_element,
    predicted_probabilities,
    q_coefficient,
    q_matrix,
    reconstruct_density,
    reconstruct_from_probabilities,
    waveplate_grid,
)


def _random_direction(rng):
    v = rng.normal(size=3)
    return PoincareDirection.from_vector(v)


def test_waveplate_directions():
    assert np.allclose(omega_from_waveplates(MeasurementSetting(0, 0)).omega, [0, 0, 1])
    assert np.allclose(omega_from_waveplates(MeasurementSetting(0, 45)).omega, [0, 1, 0])
    assert np.allclose(omega_from_waveplates(MeasurementSetting(22.5, 0)).omega, [1, 0, 0])


def test_grid_has_156_unit_directions():
    grid = waveplate_grid()
    assert len(grid) == 156
    assert MeasurementSetting(0, 0) in grid
    assert all(np.isclose(np.linalg.norm(omega_from_waveplates(s).omega), 1) for s in grid)


def test_q_coefficients():
    assert np.allclose(q_matrix(3, 1.0, 0.0), np.eye(4))
    s = 1 / np.sqrt(2)
    assert np.isclose(q_coefficient(1, 1, 2, s, s), 0.0)
    assert np.isclose(q_coefficient(1, 0, 1, s, s), -s)
    with pytest.raises(ValueError):
        q_coefficient(3, 0, 2, s, s)


def test_equatorial_povm_pattern():
    d = PoincareDirection.from_vector([1, 0, 0])
    proj = povm_element(2, 1, d)
    vec = np.array([1, 0, -1]) / np.sqrt(2)
    assert np.allclose(proj, np.outer(vec, vec))


def test_povm_completeness(rng):
    for n in range(1, 7):
        for _ in range(20):
            d = _random_direction(rng)
            total = sum(povm_element(n, k, d) for k in range(n + 1))
            assert np.allclose(total, np.eye(n + 1), atol=1e-12)


def test_probabilities_match_tensor_oracle(rng):
    # counting photons behind a polarizer along +omega, photon by photon
    for n in (1, 2, 3):
        for _ in range(10):
            rho = random_density(n + 1, rng)
            d = _random_direction(rng)
            assert np.allclose(predicted_probabilities(rho, d), analyzer_probabilities(rho, d.omega), atol=1e-12)


def test_probability_examples():
    rho = dicke_state(2, 1).projector()
    assert np.allclose(predicted_probabilities(rho, PoincareDirection.from_vector([0, 0, 1])), [0, 1, 0])
    for q in (45, -45):
        p = predicted_probabilities(rho, omega_from_waveplates(MeasurementSetting(0, q)))
        assert abs(p[1]) < 1e-15
    rng = np.random.default_rng(3)
    for _ in range(5):
        assert np.allclose(predicted_probabilities(np.eye(3) / 3, _random_direction(rng)), 1 / 3)


def test_basis_covariance(rng):
    # measuring the rotated state along omega equals measuring rho along R^-1 omega
    from polquasi.coherence import bloch_rotation, random_unitary
    from polquasi.states import symmetric_representation

    for _ in range(10):
        rho = random_density(3, rng)
        u = random_unitary(rng)
        un = symmetric_representation(u, 2)
        d = _random_direction(rng)
        back = PoincareDirection.from_vector(bloch_rotation(u).T @ d.omega)
        assert np.allclose(predicted_probabilities(un @ rho @ un.conj().T, d), predicted_probabilities(rho, back))


def test_normalized_probabilities_and_exclusion(caplog):
    settings = [MeasurementSetting(0, 0), MeasurementSetting(10, 0)]
    c0 = np.zeros((3, 3), dtype=int)
    c0[0, 2], c0[1, 1], c0[2, 0] = 10, 80, 10
    data = CoincidenceDataset(settings, [c0, np.zeros((3, 3), dtype=int)])
    with caplog.at_level(logging.WARNING):
        probs = normalized_probabilities(data, 2)
    assert np.allclose(probs.probabilities, [[0.1, 0.8, 0.1]])
    assert list(probs.setting_indices) == [0]
    assert probs.excluded and "setting 1" in caplog.text


def test_design_matrix_reproduces_forward_model(rng):
    for n in range(1, 5):
        dirs = [_random_direction(rng) for _ in range(12)]
        q = build_design_matrix(dirs, n)
        rho = random_density(n + 1, rng)
        expected = np.concatenate([predicted_probabilities(rho, d) for d in dirs])
        assert np.allclose((q @ rho.ravel()).real, expected, atol=1e-12)


def test_design_matrix_rank():
    dirs = [omega_from_waveplates(s) for s in waveplate_grid()]
    q = build_design_matrix(dirs, 2)
    sv = np.linalg.svd(q, compute_uv=False)
    assert np.sum(sv > 1e-10 * sv[0]) == 9
    one = build_design_matrix(dirs[:1], 2)
    with pytest.raises(RankDeficientError, match="rank deficient"):
        hermitian_inverse(one, 2)


def test_noiseless_round_trip(rng):
    grid = waveplate_grid()
    dirs = [omega_from_waveplates(s) for s in grid]
    rho = dicke_state(2, 1).projector()
    probs = np.array([predicted_probabilities(rho, d) for d in dirs])
    assert np.linalg.norm(reconstruct_from_probabilities(probs, grid, 2) - rho) < 1e-8
    for n in (2, 3, 4):
        for _ in range(5):
            rho = random_density(n + 1, rng)
            probs = np.array([predicted_probabilities(rho, d) for d in dirs])
            assert np.linalg.norm(reconstruct_from_probabilities(probs, grid, n) - rho) < 1e-8


def test_finite_shot_error_consistent_with_sigma():
    # error of the reconstruction against the spread predicted by the stored sigma
    src = SourceModel("ideal_pair", shots_per_setting=100_000)
    recon = reconstruct_density(simulate_dataset(src, waveplate_grid(), seed=5), 2)
    rho = recon.density
    err = np.linalg.norm(rho.elements - dicke_state(2, 1).projector())
    samples = perturb_density(rho.elements, rho.sigma, np.random.default_rng(0), 2000)
    predicted = np.sqrt(np.mean(np.sum(np.abs(samples - rho.elements) ** 2, axis=(1, 2))))
    assert err < 5 * predicted
    assert recon.raw_min_eigenvalue > -0.01


def test_psd_projection_option():
    src = SourceModel("ideal_pair", shots_per_setting=1000)
    data = simulate_dataset(src, waveplate_grid(), seed=1)
    raw = reconstruct_density(data, 2)
    proj = reconstruct_density(data, 2, psd_project=True)
    assert proj.psd_projected and proj.density.min_eigenvalue >= -1e-12
    assert raw.raw_min_eigenvalue == proj.raw_min_eigenvalue


def test_density_matrix_validation():
    with pytest.raises(ValidationError):
        DensityMatrix(2, np.eye(2))
    with pytest.raises(ValidationError):
        DensityMatrix(2, np.eye(3))
    bad = np.diag([0.5, 0.5, 0]).astype(complex)
    bad[0, 1] = 0.1
    with pytest.raises(ValidationError, match="Hermitian"):
        DensityMatrix(2, bad)
    with pytest.raises(ValidationError, match="eigenvalue"):
        DensityMatrix(2, np.diag([1.2, 0, -0.2]))
    rho = DensityMatrix(2, np.eye(3) / 3)
    with pytest.raises(ValueError):
        rho.elements[0, 0] = 1


def test_dataset_validation():
    s = [MeasurementSetting(0, 0)]
    with pytest.raises(ValidationError, match=r"cell \(1, 0\)"):
        CoincidenceDataset(s, [np.array([[0, 1], [-1, 0]])])
    with pytest.raises(ValidationError):
        CoincidenceDataset(s, [])
    with pytest.raises(ValidationError):
        CoincidenceDataset(s, [np.array([[0.5, 1], [1, 0]])])
    with pytest.raises(ValidationError):
        MeasurementSetting(np.nan, 0)
    assert MeasurementSetting(190, -200).hwp_deg == -170

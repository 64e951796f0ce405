import numpy as np
import pytest

from conftest import random_density
from polquasi.coherence import (
    BasisRotation,
    bloch_rotation,
    coherence_scan,
    invariance_check,
    l2_coherence,
    random_unitary,
    rotate_state,
)
from polquasi.errors import ValidationError
from polquasi.simulate import distinguishable_pair_state
from polquasi.states import coherent_state, dicke_state, symmetric_representation
from polquasi.tomography import DensityMatrix

RHO_11 = dicke_state(2, 1).projector()


def test_rotation_examples():
    rho = random_density(3, np.random.default_rng(0))
    assert np.allclose(rotate_state(rho, BasisRotation(0)), rho, atol=1e-15)
    hh = dicke_state(2, 2).projector()
    assert np.allclose(rotate_state(hh, BasisRotation(90)), dicke_state(2, 0).projector(), atol=1e-12)
    twice = rotate_state(rotate_state(rho, BasisRotation(45)), BasisRotation(45))
    assert np.allclose(twice, rotate_state(rho, BasisRotation(90)), atol=1e-12)
    assert BasisRotation(200).theta_deg == pytest.approx(20)
    with pytest.raises(ValidationError):
        BasisRotation(10, "w")


def test_fock_unitary_is_lifted_qubit_unitary():
    # a coherent state built from the rotated qubit equals the rotated coherent state
    q = np.array([0.6, 0.8j])
    for axis in ("linear", "x", "z"):
        for th in (0, 17, 45, 133):
            r = BasisRotation(th, axis)
            for n in (1, 2, 3):
                lhs = r.fock_unitary(n) @ coherent_state(n, q).coeffs
                rhs = coherent_state(n, r.qubit_unitary() @ q).coeffs
                assert np.allclose(lhs, rhs, atol=1e-12)


def test_linear_rotation_turns_bloch_sphere_about_y():
    r = bloch_rotation(BasisRotation(22.5).qubit_unitary())
    assert np.allclose(r @ [0, 0, 1], [np.sqrt(0.5), 0, np.sqrt(0.5)], atol=1e-12)
    r = bloch_rotation(BasisRotation(45).qubit_unitary())
    assert np.allclose(np.abs(r @ [0, 0, 1]), [1, 0, 0], atol=1e-12)
    assert np.allclose(r @ [0, 1, 0], [0, 1, 0], atol=1e-12)


def test_rotation_preserves_spectrum(rng):
    for _ in range(10):
        rho = random_density(4, rng)
        out = rotate_state(rho, BasisRotation(rng.uniform(0, 180)))
        assert np.trace(out) == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(out, out.conj().T, atol=1e-12)
        assert np.allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-12)
    dm = DensityMatrix(2, RHO_11)
    assert isinstance(rotate_state(dm, BasisRotation(30)), DensityMatrix)


def test_l2_coherence_examples():
    assert l2_coherence(np.diag([0.2, 0.3, 0.5])) == 0
    rotated = rotate_state(RHO_11, BasisRotation(45))
    assert np.allclose(np.abs(np.diag(rotated)), [0.5, 0, 0.5])
    assert l2_coherence(rotated) == pytest.approx(0.5, abs=1e-12)
    assert l2_coherence(RHO_11, basis="two_qubit") == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        l2_coherence(RHO_11, basis="qutrit")


def test_scan_of_ideal_state():
    rows = coherence_scan(RHO_11, np.arange(0, 180, 1.0))
    theta, c, s = np.array(rows).T
    assert np.all(np.isfinite(c)) and np.all(np.isnan(s))
    assert c[0] == pytest.approx(0, abs=1e-15) and c[90] == pytest.approx(0, abs=1e-12)
    assert c[45] == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(c[:90], c[90:], atol=1e-12)
    # rotated coefficients (-sin 2t / sqrt2, cos 2t, sin 2t / sqrt2)
    t = np.deg2rad(theta)
    analytic = 0.5 * np.sin(2 * t) ** 4 + np.sin(4 * t) ** 2 / 2
    assert np.allclose(c, analytic, atol=1e-12)
    assert np.max(c) > 10 * max(np.min(c), 1e-3)
    flat = coherence_scan(np.eye(3) / 3, [0, 30, 60])
    assert np.allclose([r[1] for r in flat], 0)
    with pytest.raises(ValidationError):
        coherence_scan(RHO_11, [])


def test_scan_uncertainty_band():
    sigma = np.full((3, 3), 0.01)
    rows = coherence_scan(RHO_11, [0, 45], sigma=sigma, z_samples=500, seed=3)
    assert all(r[2] > 0 for r in rows)
    assert rows == coherence_scan(RHO_11, [0, 45], sigma=sigma, z_samples=500, seed=3)


def test_invariance_check_reports():
    rng = np.random.default_rng(11)
    rotations = [random_unitary(rng) for _ in range(10)]
    rep = invariance_check(RHO_11, rotations)
    assert rep.passed and rep.max_p_deviation < 1e-8 and rep.max_sorted_p_deviation < 1e-8
    rep = invariance_check(distinguishable_pair_state(), rotations)
    assert rep.passed
    rep = invariance_check(RHO_11, [BasisRotation(t) for t in (0, 45)])
    assert rep.passed and rep.coherence_spread == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        invariance_check(np.eye(4) / 4, rotations)


def test_sorted_quasiprobabilities_invariant_for_noisy_state(rng):
    rho = 0.9 * RHO_11 + 0.1 * random_density(3, rng)
    rotations = [random_unitary(rng) for _ in range(10)]
    assert invariance_check(rho, rotations).max_sorted_p_deviation < 1e-6
    un = symmetric_representation(rotations[0], 2)
    assert np.allclose(rotate_state(rho, rotations[0]), un @ rho @ un.conj().T)

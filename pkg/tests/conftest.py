"""Shared fixtures and independent oracles.

The oracles work in the 2^N tensor-product space with explicit qubit
vectors, so they share no code path with the Fock-basis implementation.
"""

import itertools

import numpy as np
import pytest

from polquasi.states import symmetric_embedding


def random_density(dim, rng, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = a @ a.conj().T
    return m / np.trace(m).real


def qubit_from_bloch(gamma):
    """Qubit vector ``(a_H, a_V)`` from polar/azimuthal angles."""
    gx, gy, gz = np.asarray(gamma, dtype=float) / np.linalg.norm(gamma)
    theta = np.arccos(np.clip(gz, -1, 1))
    phi = np.arctan2(gy, gx)
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def product_vector(q, n):
    out = np.array([1.0 + 0j])
    for _ in range(n):
        out = np.kron(out, q)
    return out


def to_tensor(rho):
    """Fock-basis matrix embedded into the full tensor space."""
    rho = np.asarray(rho)
    emb = symmetric_embedding(rho.shape[0] - 1)
    return emb @ rho @ emb.T


def tensor_expectation(rho, gamma):
    n = np.asarray(rho).shape[0] - 1
    v = product_vector(qubit_from_bloch(gamma), n)
    return float(np.real(v.conj() @ to_tensor(rho) @ v))


def analyzer_probabilities(rho, omega):
    """Probability of ``k`` photons along ``+omega`` by summing over which
    photons went where."""
    n = np.asarray(rho).shape[0] - 1
    plus = qubit_from_bloch(omega)
    minus = np.array([-np.conj(plus[1]), np.conj(plus[0])])
    big = to_tensor(rho)
    probs = np.zeros(n + 1)
    for arms in itertools.product((0, 1), repeat=n):
        v = product_vector(np.array([1.0]), 0)
        for a in arms:
            v = np.kron(v, plus if a == 0 else minus)
        probs[arms.count(0)] += np.real(v.conj() @ big @ v)
    return probs


def sphere_grid(n_polar=400, n_azimuth=800):
    theta = np.linspace(0, np.pi, n_polar)
    phi = np.linspace(0, 2 * np.pi, n_azimuth, endpoint=False)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    return np.column_stack([(np.sin(t) * np.cos(p)).ravel(), (np.sin(t) * np.sin(p)).ravel(), np.cos(t).ravel()])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

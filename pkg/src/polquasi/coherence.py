"""Polarization-basis rotations and the basis dependence of coherence.

The l2-coherence of a density matrix changes when the polarization basis is
rotated, whereas the quasiprobabilities do not: rotations map product
states to product states and leave every overlap unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .qpqc import decompose
from .states import PAULIS, fock_to_two_qubit, symmetric_representation
from .stats import match_solutions, perturb_density
from .tomography import q_matrix

AXES = ("linear", "x", "z")
_SWAP = np.array([[0, 1], [1, 0]])


@dataclass(frozen=True)
class BasisRotation:
    """Rotation of the polarization basis by ``theta_deg``.

    ``linear`` mixes H and V with real amplitudes (a Bloch rotation about
    ``y``); ``x`` and ``z`` rotate about those Bloch axes. In every case the
    Bloch sphere turns by ``2 theta``.
    """

    theta_deg: float
    axis: str = "linear"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValidationError(f"unknown rotation axis {self.axis!r}; use one of {AXES}")
        if not np.isfinite(self.theta_deg):
            raise ValidationError("rotation angle must be finite")
        object.__setattr__(self, "theta_deg", float(self.theta_deg) % 180.0)

    def qubit_unitary(self):
        th = np.deg2rad(self.theta_deg)
        if self.axis == "linear":
            return (_SWAP @ q_matrix(1, np.cos(th), np.sin(th)) @ _SWAP).astype(complex)
        gen = PAULIS[1] if self.axis == "x" else PAULIS[3]
        return np.cos(th) * PAULIS[0] - 1j * np.sin(th) * gen

    def fock_unitary(self, n_photons):
        th = np.deg2rad(self.theta_deg)
        if self.axis == "linear":
            return q_matrix(n_photons, np.cos(th), np.sin(th)).astype(complex)
        return symmetric_representation(self.qubit_unitary(), n_photons)


def _unitary(rotation, n_photons):
    if isinstance(rotation, BasisRotation):
        return rotation.qubit_unitary(), rotation.fock_unitary(n_photons)
    u = np.asarray(rotation, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-10):
        raise ValidationError("rotation must be a BasisRotation or a 2x2 unitary")
    return u, symmetric_representation(u, n_photons)


def bloch_rotation(u):
    """SO(3) matrix ``R`` with ``gamma(u q) = R gamma(q)``."""
    u = np.asarray(u, dtype=complex)
    sig = PAULIS[1:]
    return np.array([[0.5 * np.trace(u.conj().T @ a @ u @ b).real for b in sig] for a in sig])


def rotate_state(rho, rotation):
    """``U_N rho U_N^dag``; returns the same type as the input."""
    mat = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    _, u_n = _unitary(rotation, mat.shape[0] - 1)
    out = u_n @ mat @ u_n.conj().T
    if hasattr(rho, "elements"):
        from .tomography import DensityMatrix

        return DensityMatrix(rho.n_photons, (out + out.conj().T) / 2, psd_tol=rho.psd_tol)
    return out


def l2_coherence(rho, basis="fock"):
    """Sum of squared moduli of the off-diagonal elements.

    ``basis="two_qubit"`` evaluates it on the 4x4 embedding of a two-photon state.
    """
    mat = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    if basis == "two_qubit":
        mat = fock_to_two_qubit(mat)
    elif basis != "fock":
        raise ValidationError(f"unknown basis {basis!r}")
    off = mat - np.diag(np.diag(mat))
    return float(np.sum(np.abs(off) ** 2))


def _l2_batch(mats):
    dim = mats.shape[-1]
    mask = ~np.eye(dim, dtype=bool)
    return np.sum(np.abs(mats[:, mask]) ** 2, axis=1)


def coherence_scan(rho, thetas, *, axis="linear", basis="fock", sigma=None, z_samples=2000, seed=0):
    """``(theta, C, sigma_C)`` rows over an angle grid.

    ``sigma_C`` is the spread of ``C`` over Gaussian samples of ``rho`` (the
    same samples at every angle); it is ``nan`` when no uncertainties exist.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if thetas.size == 0:
        raise ValidationError("empty angle grid")
    mat = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    if sigma is None:
        sigma = getattr(rho, "sigma", None)
    samples = None
    if sigma is not None:
        samples = perturb_density(mat, sigma, np.random.default_rng(seed), z_samples)
    rows = []
    for th in thetas:
        _, u_n = _unitary(BasisRotation(th, axis), mat.shape[0] - 1)
        value = l2_coherence(u_n @ mat @ u_n.conj().T, basis)
        spread = np.nan
        if samples is not None:
            rot = u_n @ samples @ u_n.conj().T
            if basis == "two_qubit":
                rot = np.array([fock_to_two_qubit(s) for s in rot])
            spread = float(np.std(_l2_batch(rot), ddof=1))
        rows.append((float(th), value, spread))
    return rows


@dataclass
class InvarianceReport:
    max_p_deviation: float
    max_g_deviation: float
    max_sorted_p_deviation: float
    coherence_values: list
    tol: float = 1e-6

    @property
    def coherence_spread(self):
        return max(self.coherence_values) - min(self.coherence_values)

    @property
    def passed(self):
        return max(self.max_p_deviation, self.max_g_deviation, self.max_sorted_p_deviation) < self.tol


def invariance_check(rho, rotations, tol=1e-6):
    """Quasiprobabilities of rotated copies of a two-photon state.

    Stationary states of the rotated state are paired with the rotated
    stationary states of the original before comparing ``P`` and ``g``.
    Degenerate solution sets are compared as sorted multisets.
    """
    mat = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    if mat.shape != (3, 3):
        raise ValidationError("invariance_check needs a two-photon state")
    base = decompose(mat)
    sorted_base = np.sort(base.quasi_probs)
    dp = dg = ds = 0.0
    coh = [l2_coherence(mat)]
    for rotation in rotations:
        u, u_n = _unitary(rotation, 2)
        rotated = u_n @ mat @ u_n.conj().T
        dec = decompose(rotated)
        coh.append(l2_coherence(rotated))
        expected = base.gammas @ bloch_rotation(u).T
        if len(dec.solutions) != len(base.solutions):
            dp = dg = ds = np.inf
            continue
        idx = match_solutions(expected, dec.gammas)
        degenerate = any(sol.degenerate for sol in base.solutions + dec.solutions)
        if degenerate:
            # directions inside a degenerate eigenspace are a basis choice,
            # so only the multisets are comparable
            dp = max(dp, float(np.max(np.abs(np.sort(dec.quasi_probs) - sorted_base))))
            dg = max(dg, float(np.max(np.abs(np.sort(dec.g_vec) - np.sort(base.g_vec)))))
        elif np.any(idx < 0):
            dp = dg = np.inf
        else:
            dp = max(dp, float(np.max(np.abs(dec.quasi_probs[idx] - base.quasi_probs))))
            dg = max(dg, float(np.max(np.abs(dec.g_vec[idx] - base.g_vec))))
        ds = max(ds, float(np.max(np.abs(np.sort(dec.quasi_probs) - sorted_base))))
    return InvarianceReport(dp, dg, ds, coh, tol)


def random_unitary(rng):
    """Haar-random 2x2 unitary."""
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))

"""Two-mode Fock states, qubits and angular-momentum coherent states.

Basis convention used throughout the package: for ``N`` photons the
symmetric subspace is spanned by ``|m, N - m>`` with ``m = n_H`` horizontal
photons, and coefficient/matrix index ``m`` always refers to ``n_H``.
Single-photon vectors are ordered ``(H, V)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

NORM_TOL = 1e-9

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z)

# Bloch directions of the six polarization eigenstates.
AXIS_LABELS = {
    "D": (1.0, 0.0, 0.0),
    "A": (-1.0, 0.0, 0.0),
    "R": (0.0, 1.0, 0.0),
    "L": (0.0, -1.0, 0.0),
    "H": (0.0, 0.0, 1.0),
    "V": (0.0, 0.0, -1.0),
}


def _normalized(vec, what):
    vec = np.asarray(vec, dtype=complex)
    norm = np.linalg.norm(vec)
    if abs(norm**2 - 1.0) > NORM_TOL:
        raise ValueError(f"{what} is not normalized (norm^2 = {norm**2:.12g})")
    return vec / norm


def _frozen(arr):
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QubitState:
    """Single-photon polarization ``alpha_h |H> + alpha_v |V>``."""

    alpha_h: complex
    alpha_v: complex

    def __post_init__(self):
        vec = _normalized([self.alpha_h, self.alpha_v], "qubit")
        object.__setattr__(self, "alpha_h", complex(vec[0]))
        object.__setattr__(self, "alpha_v", complex(vec[1]))

    @property
    def vector(self):
        return np.array([self.alpha_h, self.alpha_v])

    @property
    def bloch(self):
        return qubit_to_bloch(self)

    @classmethod
    def from_bloch(cls, gamma):
        return bloch_to_qubit(gamma)

    @classmethod
    def from_label(cls, label):
        return bloch_to_qubit(AXIS_LABELS[label])


def qubit_to_bloch(q):
    """Bloch vector ``(2 Re a_H* a_V, 2 Im a_H* a_V, |a_H|^2 - |a_V|^2)``."""
    a_h, a_v = _amplitudes(q)
    z = np.conj(a_h) * a_v
    return np.array([2 * z.real, 2 * z.imag, abs(a_h) ** 2 - abs(a_v) ** 2])


def bloch_to_qubit(gamma):
    """Pure qubit for a unit Bloch vector, with ``alpha_H`` real and nonnegative."""
    gamma = np.asarray(gamma, dtype=float)
    norm = np.linalg.norm(gamma)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"Bloch vector must have unit length, got {norm:.12g}")
    gx, gy, gz = gamma / norm
    transverse = complex(gx, gy)
    # take the larger amplitude from gz and the smaller from |transverse|
    if gz >= 0:
        a_h = np.sqrt((1.0 + gz) / 2.0)
        a_v = transverse / (2.0 * a_h)
    else:
        mag_v = np.sqrt((1.0 - gz) / 2.0)
        a_h = abs(transverse) / (2.0 * mag_v)
        phase = transverse / abs(transverse) if abs(transverse) > 0 else 1.0
        a_v = phase * mag_v
    return QubitState(a_h, a_v)


def _amplitudes(q):
    if isinstance(q, QubitState):
        return q.alpha_h, q.alpha_v
    vec = _normalized(q, "qubit")
    if vec.shape != (2,):
        raise ValueError("a qubit needs exactly two amplitudes")
    return vec[0], vec[1]


@dataclass(frozen=True)
class SymmetricState:
    """Pure ``N``-photon state in the basis ``|m, N - m>``, ``m = n_H``."""

    n_photons: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n_photons < 1:
            raise ValueError("n_photons must be >= 1")
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != (self.n_photons + 1,):
            raise ValueError(f"expected {self.n_photons + 1} coefficients, got shape {coeffs.shape}")
        object.__setattr__(self, "coeffs", _frozen(_normalized(coeffs, "symmetric state")))

    def projector(self):
        return np.outer(self.coeffs, self.coeffs.conj())


@dataclass(frozen=True)
class QuditState:
    """Single-particle state ``sum_j alpha_j |j>`` for ``d >= 2`` levels."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=complex))
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("a qudit needs d >= 2 amplitudes")
        object.__setattr__(self, "amplitudes", _frozen(_normalized(amps, "qudit")))

    @property
    def dim(self):
        return self.amplitudes.size


def coherent_state(n_photons, q):
    """Angular-momentum coherent state ``|q>^{(x)N}`` in the Fock basis.

    ``coeffs[m] = binom(N, m)^{1/2} alpha_H^m alpha_V^(N-m)``.
    """
    if n_photons < 1:
        raise ValueError("coherent states need N >= 1")
    a_h, a_v = _amplitudes(q)
    m = np.arange(n_photons + 1)
    binoms = np.array([comb(n_photons, k) for k in m], dtype=float)
    coeffs = np.sqrt(binoms) * a_h**m * a_v ** (n_photons - m)
    return SymmetricState(n_photons, coeffs)


def coherent_from_bloch(n_photons, gamma):
    return coherent_state(n_photons, bloch_to_qubit(gamma))


def coherent_vectors(n_photons, gammas):
    """Coherent-state coefficient rows for an ``(S, 3)`` array of Bloch vectors.

    Vectorized twin of :func:`coherent_from_bloch` (same phase convention).
    """
    gammas = np.atleast_2d(np.asarray(gammas, dtype=float))
    gammas = gammas / np.linalg.norm(gammas, axis=1, keepdims=True)
    gz = gammas[:, 2]
    transverse = gammas[:, 0] + 1j * gammas[:, 1]
    size = np.abs(transverse)
    north = gz >= 0
    big_h = np.sqrt(np.clip((1.0 + gz) / 2.0, 0.0, None))
    big_v = np.sqrt(np.clip((1.0 - gz) / 2.0, 0.0, None))
    a_h = np.where(north, big_h, size / (2.0 * np.where(north, 1.0, big_v)))
    phase = np.where(size > 0, transverse / np.where(size > 0, size, 1.0), 1.0)
    a_v = np.where(north, transverse / (2.0 * np.where(north, big_h, 1.0)), phase * big_v)
    m = np.arange(n_photons + 1)
    binoms = np.sqrt([comb(n_photons, k) for k in m])
    return binoms * a_h[:, None] ** m * a_v[:, None] ** (n_photons - m)


def dicke_state(n_photons, k):
    """Dicke state with ``k`` horizontal photons, i.e. Fock state ``|k, N - k>``."""
    if not 0 <= k <= n_photons:
        raise ValueError(f"excitation index k={k} outside [0, {n_photons}]")
    coeffs = np.zeros(n_photons + 1, dtype=complex)
    coeffs[k] = 1.0
    return SymmetricState(n_photons, coeffs)


def state_overlap(s1, s2):
    """Inner product ``<s1|s2>``."""
    if s1.n_photons != s2.n_photons:
        raise ValueError(f"photon numbers differ: {s1.n_photons} vs {s2.n_photons}")
    return complex(np.vdot(s1.coeffs, s2.coeffs))


def qudit_coherent_coeffs(n_photons, q):
    """Amplitudes of ``|q>^{(x)N}`` over multimode occupations ``(k_1..k_d)``."""
    if not isinstance(q, QuditState):
        q = QuditState(q)
    if q.dim < 2:
        raise ValueError("qudit dimension must be >= 2")
    out = {}
    for occ in occupations(n_photons, q.dim):
        multinom = factorial(n_photons)
        for k in occ:
            multinom //= factorial(k)
        amp = np.sqrt(multinom) * np.prod([a**k for a, k in zip(q.amplitudes, occ)])
        out[occ] = complex(amp)
    return out


def occupations(n_photons, dim):
    """All tuples of ``dim`` nonnegative integers summing to ``n_photons``."""
    if dim == 1:
        return [(n_photons,)]
    result = []
    for first in range(n_photons, -1, -1):
        for rest in occupations(n_photons - first, dim - 1):
            result.append((first,) + rest)
    return result


def symmetric_embedding(n_photons):
    """Isometry from the Fock basis into the ``2^N`` qubit tensor space.

    Column ``m`` is the normalized symmetrization of ``|H>^m |V>^(N-m)``.
    Qubit ordering is ``H = 0``, ``V = 1`` with the first photon most
    significant.
    """
    dim = 2**n_photons
    emb = np.zeros((dim, n_photons + 1))
    for idx, bits in enumerate(itertools.product((0, 1), repeat=n_photons)):
        m = n_photons - sum(bits)
        emb[idx, m] = 1.0
    return emb / np.sqrt(emb.sum(axis=0))


def fock_to_two_qubit(rho):
    """Embed a two-photon Fock-basis matrix into the ``{HH, HV, VH, VV}`` basis."""
    mat = _matrix(rho)
    if mat.shape != (3, 3):
        raise ValueError(f"fock_to_two_qubit needs N = 2 (3x3), got {mat.shape}")
    emb = symmetric_embedding(2)
    return emb @ mat @ emb.T


def two_qubit_to_fock(rho4):
    """Project a 4x4 two-qubit matrix back onto the symmetric Fock basis."""
    rho4 = np.asarray(rho4, dtype=complex)
    if rho4.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    emb = symmetric_embedding(2)
    return emb.T @ rho4 @ emb


def spin_operators(n_photons):
    """Schwinger spin operators ``(J_x, J_y, J_z)`` on the ``N``-photon subspace.

    With these, a coherent state of Bloch vector ``gamma`` has
    ``<J> = N gamma / 2``.
    """
    m = np.arange(n_photons + 1)
    # a_H^dag a_V maps |m, N-m> to sqrt((m+1)(N-m)) |m+1, N-m-1>
    raise_h = np.diag(np.sqrt((m[:-1] + 1) * (n_photons - m[:-1])), k=-1).astype(complex)
    jx = (raise_h + raise_h.conj().T) / 2
    jy = (raise_h - raise_h.conj().T) / 2j
    jz = np.diag(m - n_photons / 2).astype(complex)
    return jx, jy, jz


def symmetric_representation(u, n_photons):
    """Lift a single-photon 2x2 unitary to the ``N``-photon Fock subspace.

    Each creation operator transforms as ``a_j^dag -> sum_i u[i, j] a_i^dag``.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("expected a 2x2 single-photon unitary")
    n = n_photons
    # polynomials in a_H^dag are stored by ascending power of a_H^dag
    col_h = np.array([u[1, 0], u[0, 0]])
    col_v = np.array([u[1, 1], u[0, 1]])
    fact = np.array([factorial(k) for k in range(n + 1)], dtype=float)
    out = np.zeros((n + 1, n + 1), dtype=complex)
    for m in range(n + 1):
        poly = np.array([1.0 + 0j])
        for _ in range(m):
            poly = np.convolve(poly, col_h)
        for _ in range(n - m):
            poly = np.convolve(poly, col_v)
        norm = np.sqrt(fact * fact[::-1]) / np.sqrt(fact[m] * fact[n - m])
        out[:, m] = poly * norm
    return out


def tensor_power(vec, n):
    out = np.array([1.0 + 0j])
    for _ in range(n):
        out = np.kron(out, vec)
    return out


def axis_label(gamma, tol=1e-6):
    """Polarization letter for a Bloch vector on a coordinate axis, else ``None``."""
    gamma = np.asarray(gamma, dtype=float)
    for label, axis in AXIS_LABELS.items():
        if np.linalg.norm(gamma - np.asarray(axis)) < tol:
            return label
    return None


def _matrix(rho):
    return np.asarray(getattr(rho, "elements", rho), dtype=complex)

"""Waveplate measurement model and linear-inversion state reconstruction."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import RankDeficientError, ValidationError

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
RAW_PSD_TOL = 5e-2
PINV_RCOND = 1e-10


def _canonical_deg(angle):
    return (float(angle) + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class MeasurementSetting:
    """Half- and quarter-wave plate angles in degrees."""

    hwp_deg: float
    qwp_deg: float

    def __post_init__(self):
        if not (np.isfinite(self.hwp_deg) and np.isfinite(self.qwp_deg)):
            raise ValidationError("waveplate angles must be finite")
        object.__setattr__(self, "hwp_deg", _canonical_deg(self.hwp_deg))
        object.__setattr__(self, "qwp_deg", _canonical_deg(self.qwp_deg))


@dataclass(frozen=True)
class PoincareDirection:
    """Unit analyzer direction with polar angle ``theta`` and azimuth ``phi`` (radians)."""

    omega: np.ndarray
    theta: float
    phi: float

    @classmethod
    def from_vector(cls, omega):
        omega = np.asarray(omega, dtype=float)
        norm = np.linalg.norm(omega)
        if norm == 0 or not np.isfinite(norm):
            raise ValidationError("direction vector must be finite and nonzero")
        omega = omega / norm
        theta = float(np.arccos(np.clip(omega[2], -1.0, 1.0)))
        phi = float(np.arctan2(omega[1], omega[0]))
        omega = np.array(omega)
        omega.setflags(write=False)
        return cls(omega, theta, phi)

    @property
    def t_abs(self):
        return float(np.cos(self.theta / 2))

    @property
    def r_abs(self):
        return float(np.sin(self.theta / 2))


@dataclass(frozen=True)
class DensityMatrix:
    """Fock-basis density matrix ``rho[l1, l2]`` for ``N`` photons.

    ``sigma`` optionally holds the standard deviation of each complex
    element (total over real and imaginary parts).
    """

    n_photons: int
    elements: np.ndarray
    sigma: np.ndarray | None = None
    psd_tol: float = RAW_PSD_TOL

    def __post_init__(self):
        mat = np.array(self.elements, dtype=complex)
        dim = self.n_photons + 1
        if mat.shape != (dim, dim):
            raise ValidationError(f"density matrix for N={self.n_photons} must be {dim}x{dim}, got {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("density matrix is not Hermitian")
        if abs(np.trace(mat) - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace is {np.trace(mat).real:.12g}, expected 1")
        mat = (mat + mat.conj().T) / 2
        mat.setflags(write=False)
        object.__setattr__(self, "elements", mat)
        if self.min_eigenvalue < -self.psd_tol:
            raise ValidationError(
                f"density matrix has eigenvalue {self.min_eigenvalue:.3g} below -{self.psd_tol:g}"
            )
        if self.sigma is not None:
            sig = np.array(self.sigma, dtype=float)
            if sig.shape != mat.shape or np.any(sig < 0) or not np.all(np.isfinite(sig)):
                raise ValidationError("sigma must be a nonnegative finite matrix shaped like rho")
            sig.setflags(write=False)
            object.__setattr__(self, "sigma", sig)

    @property
    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.elements)[0])

    @property
    def dim(self):
        return self.n_photons + 1

    def with_sigma(self, sigma):
        return DensityMatrix(self.n_photons, self.elements, sigma, self.psd_tol)

    @classmethod
    def from_state(cls, state):
        return cls(state.n_photons, state.projector())

    @classmethod
    def from_matrix(cls, mat, *, psd_tol=RAW_PSD_TOL):
        mat = np.asarray(mat, dtype=complex)
        return cls(mat.shape[0] - 1, mat, psd_tol=psd_tol)


@dataclass
class CoincidenceDataset:
    """Waveplate settings with one photon-number count matrix ``C[n_+, n_-]`` each."""

    settings: list
    counts: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.settings) != len(self.counts):
            raise ValidationError(
                f"{len(self.settings)} settings but {len(self.counts)} count matrices"
            )
        checked = []
        for j, mat in enumerate(self.counts):
            arr = np.asarray(mat)
            if arr.ndim != 2:
                raise ValidationError(f"count matrix {j} is not two-dimensional")
            if not np.issubdtype(arr.dtype, np.integer):
                if not np.all(np.equal(np.mod(arr, 1), 0)):
                    raise ValidationError(f"count matrix {j} has non-integer entries")
            arr = arr.astype(np.int64)
            bad = np.argwhere(arr < 0)
            if bad.size:
                r, c = bad[0]
                raise ValidationError(f"negative count at setting {j}, cell ({r}, {c})")
            checked.append(arr)
        self.counts = checked

    def __len__(self):
        return len(self.settings)

    def subspace_counts(self, n_photons):
        """Counts ``C[k, N - k]`` for ``k = 0..N`` at every setting, shape ``(S, N+1)``."""
        out = np.zeros((len(self), n_photons + 1), dtype=np.int64)
        for j, mat in enumerate(self.counts):
            for k in range(n_photons + 1):
                if k < mat.shape[0] and n_photons - k < mat.shape[1]:
                    out[j, k] = mat[k, n_photons - k]
        return out


def omega_from_waveplates(setting):
    """Poincare direction reached by a HWP/QWP pair."""
    two_q = np.deg2rad(2 * setting.qwp_deg)
    four_h = np.deg2rad(4 * setting.hwp_deg)
    omega = np.array(
        [
            np.cos(two_q) * np.sin(four_h - two_q),
            np.sin(two_q),
            np.cos(two_q) * np.cos(four_h - two_q),
        ]
    )
    return PoincareDirection.from_vector(omega)


def waveplate_grid(step_deg=15.0):
    """Tomography grid: ``2 HWP`` in ``[0, 180)`` and ``2 QWP`` in ``[-90, 90]``.

    With the default 15 degree step this is the 12 x 13 = 156 setting grid.
    """
    double_hwp = np.arange(0.0, 180.0 - 1e-9, step_deg)
    double_qwp = np.arange(-90.0, 90.0 + 1e-9, step_deg)
    return [MeasurementSetting(h / 2, q / 2) for h in double_hwp for q in double_qwp]


def q_coefficient(l, k, n_photons, t_abs, r_abs):
    """Real mixing coefficient between ``|l, N-l>`` and the rotated ``|k, N-k>``."""
    n = n_photons
    if not (0 <= l <= n and 0 <= k <= n):
        raise ValueError(f"indices (l={l}, k={k}) outside [0, {n}]")
    if abs(t_abs**2 + r_abs**2 - 1.0) > 1e-9:
        raise ValueError("|t|^2 + |r|^2 must equal 1")
    pref = np.sqrt(float(factorial(k) * factorial(n - k) * factorial(l) * factorial(n - l)))
    total = 0.0
    for u in range(max(0, l - k), min(l, n - k) + 1):
        denom = factorial(l - u) * factorial(k - l + u) * factorial(u) * factorial(n - k - u)
        total += (-1) ** u * pref / denom * t_abs ** (n - k + l - 2 * u) * r_abs ** (k - l + 2 * u)
    return total


def q_matrix(n_photons, t_abs, r_abs):
    """All ``q_{l,k}`` as an ``(N+1) x (N+1)`` array indexed ``[l, k]``."""
    n = n_photons
    return np.array([[q_coefficient(l, k, n, t_abs, r_abs) for k in range(n + 1)] for l in range(n + 1)])


def povm_vectors(n_photons, direction):
    """Columns are the rotated Fock states ``|k, N-k>_Omega`` (global phase dropped)."""
    q = q_matrix(n_photons, direction.t_abs, direction.r_abs)
    # e^{-i phi l} puts the "+" arm on the Bloch vector +omega (R = +y)
    phases = np.exp(-1j * direction.phi * np.arange(n_photons + 1))
    return phases[:, None] * q


def povm_element(n_photons, k, direction):
    """Projector onto ``k`` photons in the ``+`` arm for analyzer direction ``direction``."""
    if not 0 <= k <= n_photons:
        raise ValueError(f"outcome k={k} outside [0, {n_photons}]")
    vec = povm_vectors(n_photons, direction)[:, k]
    return np.outer(vec, vec.conj())


def predicted_probabilities(rho, direction):
    """Outcome probabilities ``p_k = tr(rho Pi_k)`` for one analyzer direction."""
    mat = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    n = mat.shape[0] - 1
    vecs = povm_vectors(n, direction)
    return np.einsum("lk,lm,mk->k", vecs.conj(), mat, vecs).real


@dataclass
class SubspaceProbabilities:
    """Normalized ``N``-photon outcome frequencies for the usable settings."""

    setting_indices: np.ndarray
    probabilities: np.ndarray
    counts: np.ndarray
    totals: np.ndarray
    excluded: list


def normalized_probabilities(dataset, n_photons):
    """Frequencies ``C[k, N-k] / sum_k C[k, N-k]``; empty settings are excluded."""
    counts = dataset.subspace_counts(n_photons)
    totals = counts.sum(axis=1)
    keep = np.flatnonzero(totals > 0)
    excluded = []
    for j in np.flatnonzero(totals == 0):
        msg = f"setting {j} has no {n_photons}-photon events; excluded"
        log.warning(msg)
        excluded.append({"setting_index": int(j), "reason": msg})
    probs = counts[keep] / totals[keep, None]
    return SubspaceProbabilities(keep, probs, counts[keep], totals[keep], excluded)


def build_design_matrix(directions, n_photons):
    """Matrix ``Q`` with ``p = Q vec(rho)``.

    Rows are ordered setting-major ``(j, k)``; columns follow the row-major
    flattening ``(l1, l2)`` of ``rho``.
    """
    directions = list(directions)
    if not directions:
        raise ValidationError("no measurement directions given")
    dim = n_photons + 1
    rows = []
    for direction in directions:
        vecs = povm_vectors(n_photons, direction)
        # p_k = sum conj(v_l1) rho_l1l2 v_l2
        rows.append(np.einsum("ak,bk->kab", vecs.conj(), vecs).reshape(dim, dim * dim))
    design = np.vstack(rows)
    if design.shape[0] < dim * dim:
        log.warning("only %d probabilities for %d unknowns; not informationally complete", design.shape[0], dim * dim)
    return design


@dataclass
class Reconstruction:
    """Linear-inversion result plus the linear map it came from."""

    density: DensityMatrix
    raw_min_eigenvalue: float
    inverse: np.ndarray
    probabilities: SubspaceProbabilities
    psd_projected: bool
    warnings: list


def hermitian_inverse(design, n_photons):
    """Pseudo-inverse of ``Q`` mapping probabilities to a Hermitized ``vec(rho)``.

    Raises :class:`RankDeficientError` naming the unconstrained directions.
    """
    dim = n_photons + 1
    u, s, vh = np.linalg.svd(design, full_matrices=False)
    cutoff = PINV_RCOND * s[0]
    rank = int(np.sum(s > cutoff))
    if rank < dim * dim:
        null = vh[rank:].conj()
        names = []
        for vec in null[:3]:
            mat = vec.reshape(dim, dim)
            idx = np.unravel_index(np.argmax(np.abs(mat)), mat.shape)
            names.append(f"rho[{idx[0]},{idx[1]}]")
        raise RankDeficientError(
            f"rank deficient design matrix (rank {rank} < {dim * dim}); "
            f"unconstrained directions dominated by {', '.join(names)}"
        )
    pinv = (vh.conj().T / s) @ u.conj().T
    # rho -> (rho + rho^dag) / 2 acting on the vectorized solution
    perm = np.arange(dim * dim).reshape(dim, dim).T.ravel()
    return (pinv + pinv[perm].conj()) / 2


def reconstruct_density(dataset, n_photons, *, psd_project=False, psd_tol=RAW_PSD_TOL, with_sigma=True):
    """Reconstruct the ``N``-photon density matrix from coincidence counts.

    Linear inversion through the Moore-Penrose pseudo-inverse of the design
    matrix, followed by Hermitization and trace normalization. The
    uncertainty map comes from binomial count errors pushed through the
    (linear) inversion.
    """
    from .stats import linear_sigma, sigma_counts

    probs = normalized_probabilities(dataset, n_photons)
    if len(probs.setting_indices) == 0:
        raise ValidationError(f"no setting contains {n_photons}-photon events")
    dirs = [omega_from_waveplates(dataset.settings[j]) for j in probs.setting_indices]
    design = build_design_matrix(dirs, n_photons)
    inverse = hermitian_inverse(design, n_photons)
    p_vec = probs.probabilities.ravel()
    dim = n_photons + 1
    mat = (inverse @ p_vec).reshape(dim, dim)
    trace = np.trace(mat).real
    mat = mat / trace
    warnings = list(e["reason"] for e in probs.excluded)
    raw_min = float(np.linalg.eigvalsh(mat)[0])
    if raw_min < -psd_tol and not psd_project:
        msg = f"reconstructed state has eigenvalue {raw_min:.3g} below -{psd_tol:g}"
        log.warning(msg)
        warnings.append(msg)
    if psd_project:
        mat = project_psd(mat)
    sigma = None
    if with_sigma:
        sig_p = np.concatenate([sigma_counts(row) for row in probs.counts])
        sigma = linear_sigma(inverse / trace, sig_p).reshape(dim, dim)
    density = DensityMatrix(n_photons, mat, sigma, psd_tol=max(psd_tol, -raw_min + 1e-12))
    return Reconstruction(density, raw_min, inverse, probs, psd_project, warnings)


def project_psd(mat):
    """Zero the negative eigenvalues and renormalize the trace."""
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    out = (vecs * vals) @ vecs.conj().T
    return out / np.trace(out).real


def reconstruct_from_probabilities(probabilities, settings, n_photons):
    """Linear inversion of exact outcome probabilities, shape ``(S, N+1)``."""
    probabilities = np.asarray(probabilities, dtype=float)
    settings = list(settings)
    if probabilities.shape != (len(settings), n_photons + 1):
        raise ValidationError(
            f"expected probabilities of shape {(len(settings), n_photons + 1)}, got {probabilities.shape}"
        )
    dirs = [omega_from_waveplates(s) for s in settings]
    inverse = hermitian_inverse(build_design_matrix(dirs, n_photons), n_photons)
    dim = n_photons + 1
    mat = (inverse @ probabilities.ravel()).reshape(dim, dim)
    return mat / np.trace(mat).real

"""Separability eigenvalue equations and quasiprobabilities of quantum coherence.

Classical references are the symmetric product states ``|q>^{(x)N}``, which
coincide with angular-momentum coherent states. Stationary points of
``g(q) = <q^N|rho|q^N>`` on the Bloch sphere feed a Gram-matrix inversion
that yields the quasiprobabilities ``P``; any significantly negative entry
certifies entanglement and nonclassical polarization at once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalError, ValidationError
from .states import (
    PAULIS,
    axis_label,
    bloch_to_qubit,
    coherent_vectors,
    fock_to_two_qubit,
    spin_operators,
    symmetric_embedding,
)

log = logging.getLogger(__name__)

SEE_RESIDUAL_TOL = 1e-8
NORM_CHECK_TOL = 1e-6
DEGENERATE_TOL = 1e-9
CLUSTER_TOL = 1e-10
DEDUPE_ANGLE = 1e-6
GRAM_COND_MAX = 1e12


@dataclass(frozen=True)
class PauliDecomposition:
    """``rho = sum Gamma[w, w'] sigma_w (x) sigma_w'`` for ``w, w'`` in ``0, x, y, z``."""

    gamma00: float
    gamma_vec: np.ndarray
    gamma_mat: np.ndarray

    @property
    def full(self):
        out = np.empty((4, 4))
        out[0, 0] = self.gamma00
        out[0, 1:] = out[1:, 0] = self.gamma_vec
        out[1:, 1:] = self.gamma_mat
        return out

    def reconstruct(self):
        full = self.full
        return sum(full[a, b] * np.kron(PAULIS[a], PAULIS[b]) for a in range(4) for b in range(4))


@dataclass(frozen=True)
class StationarySolution:
    lam: float
    gamma: np.ndarray
    g: float
    degenerate: bool = False
    residual: float = 0.0

    @property
    def label(self):
        exact = axis_label(self.gamma)
        if exact:
            return exact
        near = axis_label(self.gamma, tol=2 * np.sin(np.deg2rad(2.5)))
        return f"~{near}" if near else "({:+.3f},{:+.3f},{:+.3f})".format(*self.gamma)

    @property
    def qubit(self):
        return bloch_to_qubit(self.gamma)


@dataclass
class QpqcDecomposition:
    solutions: list
    gram: np.ndarray
    g_vec: np.ndarray
    quasi_probs: np.ndarray
    residual_norm: float
    n_photons: int = 2
    notes: list = field(default_factory=list)

    @property
    def gammas(self):
        return np.array([s.gamma for s in self.solutions]).reshape(-1, 3)

    @property
    def labels(self):
        return [s.label for s in self.solutions]

    @property
    def total(self):
        return float(np.sum(self.quasi_probs))

    def nonclassical(self, sigma=None, z=5.0, atol=1e-9):
        """True when some ``P_i`` lies below ``-z sigma_i`` (or ``-atol`` without errors)."""
        thresh = atol if sigma is None else np.maximum(z * np.asarray(sigma), atol)
        return bool(np.any(self.quasi_probs < -thresh))

    def reconstructed(self):
        vecs = coherent_vectors(self.n_photons, self.gammas)
        return np.einsum("i,ia,ib->ab", self.quasi_probs, vecs, vecs.conj())


# sigma_w (x) sigma_w' restricted to the symmetric two-photon subspace
_EMB2 = symmetric_embedding(2)
_PAULI_FOCK = np.array([[_EMB2.T @ np.kron(a, b) @ _EMB2 for b in PAULIS] for a in PAULIS])


def _fock(rho):
    return np.asarray(getattr(rho, "elements", rho), dtype=complex)


def pauli_decompose(rho4):
    """Pauli coefficients ``Gamma = tr(rho sigma_w (x) sigma_w') / 4`` of a two-qubit matrix."""
    rho4 = np.asarray(rho4, dtype=complex)
    if rho4.shape != (4, 4):
        raise ValidationError("pauli_decompose expects a 4x4 matrix")
    if np.max(np.abs(rho4 - rho4.conj().T)) > 1e-10:
        raise ValidationError("pauli_decompose expects a Hermitian matrix")
    full = np.array([[np.trace(rho4 @ np.kron(a, b)).real / 4 for b in PAULIS] for a in PAULIS])
    full = (full + full.T) / 2
    return PauliDecomposition(float(full[0, 0]), full[0, 1:].copy(), full[1:, 1:].copy())


def _pauli_from_fock(mat):
    # same as pauli_decompose(fock_to_two_qubit(mat)) without the 4x4 detour
    full = np.einsum("ab,wvba->wv", mat, _PAULI_FOCK).real / 4
    full = (full + full.T) / 2
    return PauliDecomposition(float(full[0, 0]), full[0, 1:].copy(), full[1:, 1:].copy())


def separability_polynomial(gamma_vec, gamma_mat):
    """Coefficients (highest power first) of the degree-6 polynomial in ``lambda``.

    ``[Gv^T (lambda - Gamma)^-2 Gv - 1] det(lambda - Gamma)^2``, written in the
    eigenbasis of ``Gamma``.
    """
    e, vecs = np.linalg.eigh(gamma_mat)
    c = vecs.T @ gamma_vec
    return _secular_poly(e, c)


def _secular_poly(e, c):
    sq = [np.polymul([1.0, -ek], [1.0, -ek]) for ek in e]
    poly = -np.polymul(np.polymul(sq[0], sq[1]), sq[2])
    for j in range(3):
        others = [sq[k] for k in range(3) if k != j]
        poly = np.polyadd(poly, c[j] ** 2 * np.polymul(others[0], others[1]))
    return poly


def companion_roots(coeffs):
    """Polynomial roots as eigenvalues of the companion matrix."""
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "f")
    deg = len(coeffs) - 1
    if deg < 1:
        return np.array([], dtype=complex)
    monic = coeffs[1:] / coeffs[0]
    comp = np.zeros((deg, deg))
    comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = -monic[::-1]
    return np.linalg.eigvals(comp)


def secular_roots(poles, weights_sqrt, tangent_tol=1e-10):
    """Real roots of ``h(lam) = sum c_j^2 / (lam - e_j)^2 - 1``.

    These are the real roots of the degree-6 polynomial away from its
    poles. ``h`` is monotone outside the poles and convex between adjacent
    ones, so each gap holds zero, one (tangent) or two roots, bracketed
    around the minimum. Unlike companion-matrix eigenvalues this stays
    accurate when roots cluster within ``1e-5`` of each other.
    """
    poles = np.asarray(poles, dtype=float)
    w = np.asarray(weights_sqrt, dtype=float) ** 2
    order = np.argsort(poles)
    poles, w = poles[order], w[order]

    def h(lam):
        return np.sum(w / (lam - poles) ** 2) - 1.0

    def dh(lam):
        return -2.0 * np.sum(w / (lam - poles) ** 3)

    reach = 1.01 * np.sqrt(w.sum()) + 1e-300
    roots = []
    # left of the lowest and right of the highest pole: one root each
    lo, hi = poles[0] - reach, poles[0] - 0.5 * np.sqrt(w[0])
    roots.append(brentq(h, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps))
    lo, hi = poles[-1] + 0.5 * np.sqrt(w[-1]), poles[-1] + reach
    roots.append(brentq(h, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps))
    for i in range(len(poles) - 1):
        a, b = poles[i], poles[i + 1]
        gap = b - a
        if gap <= 0:
            continue
        eps = max(gap * 1e-9, 8 * np.spacing(max(abs(a), abs(b))))
        if 2 * eps >= gap or dh(a + eps) >= 0 or dh(b - eps) <= 0:
            # h is huge at both ends and cannot turn negative in between
            continue
        lam_min = brentq(dh, a + eps, b - eps, xtol=1e-16, rtol=4 * np.finfo(float).eps)
        hmin = h(lam_min)
        if hmin > tangent_tol:
            continue
        if hmin >= 0:
            roots.append(lam_min)
            continue
        roots.append(brentq(h, a + 0.5 * np.sqrt(w[i]), lam_min, xtol=1e-16, rtol=4 * np.finfo(float).eps))
        roots.append(brentq(h, lam_min, b - 0.5 * np.sqrt(w[i + 1]), xtol=1e-16, rtol=4 * np.finfo(float).eps))
    return sorted(roots)


def _aligned_eigensystem(gamma_vec, gamma_mat):
    """Eigenpairs of ``Gamma`` (descending) with degenerate blocks rotated so that
    ``gamma_vec`` overlaps at most one vector per block."""
    e, vecs = np.linalg.eigh(gamma_mat)
    e, vecs = e[::-1].copy(), vecs[:, ::-1].copy()
    clusters = []
    start = 0
    for i in range(1, 4):
        if i == 3 or abs(e[i] - e[i - 1]) > CLUSTER_TOL:
            clusters.append(list(range(start, i)))
            start = i
    for cl in clusters:
        if len(cl) < 2:
            continue
        e[cl] = np.mean(e[cl])
        block = vecs[:, cl]
        proj = block.T @ gamma_vec
        if np.linalg.norm(proj) <= DEGENERATE_TOL:
            continue
        # first basis vector along the projection, the rest orthogonal to it
        basis = np.linalg.qr(np.column_stack([proj, np.eye(len(cl))]))[0][:, : len(cl)]
        if basis[:, 0] @ proj < 0:
            basis[:, 0] *= -1
        vecs[:, cl] = block @ basis
    return e, vecs, clusters


def _newton_polish(gamma_vec, gamma_mat, lam, gamma, iters=8):
    """Refine ``(gamma, lambda)`` on ``Gamma gamma + Gv = lambda gamma``, ``|gamma| = 1``."""
    eye = np.eye(3)
    for _ in range(iters):
        res = np.concatenate([gamma_mat @ gamma + gamma_vec - lam * gamma, [(gamma @ gamma - 1) / 2]])
        if np.max(np.abs(res)) < 1e-16:
            break
        jac = np.zeros((4, 4))
        jac[:3, :3] = gamma_mat - lam * eye
        jac[:3, 3] = -gamma
        jac[3, :3] = gamma
        step = np.linalg.lstsq(jac, -res, rcond=1e-13)[0]
        gamma = gamma + step[:3]
        lam = lam + step[3]
    return lam, gamma / np.linalg.norm(gamma)


def _exact_candidates(gamma_vec, gamma_mat):
    e, vecs, clusters = _aligned_eigensystem(gamma_vec, gamma_mat)
    c = vecs.T @ gamma_vec
    deg = np.abs(c) <= DEGENERATE_TOL
    cands = []
    if not np.all(deg):
        pole_window = max(1e-7, 1e3 * DEGENERATE_TOL)
        for lam in secular_roots(e[~deg], c[~deg]):
            if np.any(deg & (np.abs(lam - e) < pole_window)):
                continue
            denom = lam - e
            if np.any(~deg & (np.abs(denom) < 1e-300)):
                continue
            gamma = vecs @ np.where(deg, 0.0, c / np.where(deg, 1.0, denom))
            if abs(np.linalg.norm(gamma) - 1) > NORM_CHECK_TOL:
                log.debug("root %.6g fails the normalization check (|gamma| = %.6g)", lam, np.linalg.norm(gamma))
                continue
            cands.append((lam, gamma, False))
    # lambda at an eigenvalue whose block carries no Gamma_vec component
    for cl in clusters:
        if not np.all(deg[cl]):
            continue
        lam = e[cl[0]]
        outside = [j for j in range(3) if j not in cl]
        part = vecs[:, outside] @ (c[outside] / (lam - e[outside])) if outside else np.zeros(3)
        t2 = 1 - part @ part
        if t2 < -NORM_CHECK_TOL:
            continue
        t = np.sqrt(max(t2, 0.0))
        for j in cl:
            for sign in (1, -1):
                cands.append((lam, part + sign * t * vecs[:, j], True))
                if t == 0:
                    break
    return cands


def reduced_action(rho, gamma):
    """``rho_{q^(N-1)} |q>`` for the qubit with Bloch vector ``gamma``.

    Uses ``d g / d conj(alpha_i) = N (rho_q q)_i`` on the Fock representation.
    """
    mat = _fock(rho)
    n = mat.shape[0] - 1
    q = bloch_to_qubit(gamma)
    a_h, a_v = q.alpha_h, q.alpha_v
    m = np.arange(n + 1)
    from math import comb

    b = np.sqrt([comb(n, k) for k in m])
    s = b * a_h**m * a_v ** (n - m)
    with np.errstate(divide="ignore", invalid="ignore"):
        ds_h = b * m * np.where(m > 0, a_h ** np.maximum(m - 1, 0), 0) * a_v ** (n - m)
        ds_v = b * (n - m) * a_h**m * np.where(n - m > 0, a_v ** np.maximum(n - m - 1, 0), 0)
    rs = mat @ s
    w = np.array([np.vdot(ds_h, rs), np.vdot(ds_v, rs)])
    return w / n, np.array([a_h, a_v])


def see_residual(rho, gamma):
    """Residual ``|rho_q q - g q|`` of the separability eigenvalue equation and ``g``."""
    act, q = reduced_action(rho, gamma)
    g = np.vdot(q, act)
    return float(np.linalg.norm(act - g * q)), float(g.real)


def _sort_key(gamma):
    z, x, y = np.round([gamma[2], gamma[0], gamma[1]], 9)
    return (z, x, y)


def _dedupe(gammas, angle=DEDUPE_ANGLE):
    kept = []
    for gmm in gammas:
        if all(np.arccos(np.clip(gmm @ k, -1, 1)) > angle for k in kept):
            kept.append(gmm)
    return kept


def stationary_states_exact(rho):
    """All stationary product states of a two-photon state from the degree-6 polynomial."""
    mat = _fock(rho)
    if mat.shape != (3, 3):
        raise ValidationError("the exact solver handles N = 2 only")
    pd = _pauli_from_fock(mat)
    cands = _exact_candidates(pd.gamma_vec, pd.gamma_mat)
    if not cands:
        raise NumericalError("separability polynomial has no admissible real root")
    polished = []
    for lam, gamma, degen in cands:
        lam, gamma = _newton_polish(pd.gamma_vec, pd.gamma_mat, lam, gamma)
        polished.append((lam, gamma, degen))
    out = []
    kept = []
    for lam, gamma, degen in polished:
        if any(np.arccos(np.clip(gamma @ k, -1, 1)) <= DEDUPE_ANGLE for k in kept):
            continue
        res, g = see_residual(mat, gamma)
        if res > SEE_RESIDUAL_TOL:
            log.warning("dropping stationary candidate with residual %.3g", res)
            continue
        kept.append(gamma)
        out.append(StationarySolution(float(lam), gamma, g, degen, res))
    if not out:
        raise NumericalError("no stationary state passed the residual check")
    out.sort(key=lambda s: _sort_key(s.gamma))
    return out


def fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    polar = np.arccos(1 - 2 * i / n)
    azim = np.pi * (1 + 5**0.5) * i
    return np.column_stack([np.cos(azim) * np.sin(polar), np.sin(azim) * np.sin(polar), np.cos(polar)])


def _tangent_frames(gammas):
    ref = np.zeros_like(gammas)
    ref[np.arange(len(gammas)), np.argmin(np.abs(gammas), axis=1)] = 1.0
    e1 = np.cross(gammas, ref)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(gammas, e1)
    return e1, e2


class _SphereFunction:
    """``f(gamma) = <s(gamma)|op|s(gamma)>`` with exact Riemannian derivatives.

    Derivatives come from the rotation generators: moving ``gamma`` along a
    great circle is ``exp(-i eps a.J)`` with ``a = gamma x e``.
    """

    def __init__(self, op):
        self.op = np.asarray(op, dtype=complex)
        self.n = self.op.shape[0] - 1
        self.jops = spin_operators(self.n)
        comm = [j @ self.op - self.op @ j for j in self.jops]
        self.first = np.array([j @ self.op for j in self.jops])
        self.second = np.array([[jm @ cn - cn @ jm for cn in comm] for jm in self.jops])

    def value(self, gammas):
        s = coherent_vectors(self.n, gammas)
        return np.einsum("sa,ab,sb->s", s.conj(), self.op, s).real

    def derivatives(self, gammas):
        s = coherent_vectors(self.n, gammas)
        e1, e2 = _tangent_frames(gammas)
        axes = np.stack([np.cross(gammas, e1), np.cross(gammas, e2)], axis=1)
        t1 = np.einsum("sa,mab,sb->sm", s.conj(), self.first, s)
        grad = -2 * np.einsum("sim,sm->si", axes, t1).imag
        t2 = np.einsum("sa,mnab,sb->smn", s.conj(), self.second, s)
        t2 = (t2 + np.swapaxes(t2, 1, 2)).real
        hess = -0.5 * np.einsum("sim,smn,sjn->sij", axes, t2, axes)
        return grad, hess, e1, e2


def _newton_step(grad, hess):
    det = hess[:, 0, 0] * hess[:, 1, 1] - hess[:, 0, 1] * hess[:, 1, 0]
    scale = np.maximum(np.abs(hess).max(axis=(1, 2)), 1e-300)
    ok = np.abs(det) > 1e-14 * scale**2
    step = -grad.copy()
    inv = np.empty_like(hess[ok])
    inv[:, 0, 0] = hess[ok, 1, 1]
    inv[:, 1, 1] = hess[ok, 0, 0]
    inv[:, 0, 1] = -hess[ok, 0, 1]
    inv[:, 1, 0] = -hess[ok, 1, 0]
    step[ok] = -np.einsum("sij,sj->si", inv, grad[ok]) / det[ok, None]
    return step


def _newton_on_sphere(func, seeds, tol=1e-10, max_iter=200, max_step=0.3):
    """Newton iteration for ``grad f = 0`` with a per-seed step radius.

    A step is kept only if it lowers the gradient norm; otherwise the radius
    shrinks. This reaches saddles as well as extrema.
    """
    gam = np.array(seeds, dtype=float)
    grad, hess, e1, e2 = func.derivatives(gam)
    gnorm = np.linalg.norm(grad, axis=1)
    radius = np.full(len(gam), max_step)
    active = np.ones(len(gam), dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        step = _newton_step(grad[idx], hess[idx])
        length = np.linalg.norm(step, axis=1)
        cap = radius[idx]
        step *= np.where(length > cap, cap / np.maximum(length, 1e-300), 1.0)[:, None]
        length = np.linalg.norm(step, axis=1)
        tangent = step[:, :1] * e1[idx] + step[:, 1:] * e2[idx]
        unit = tangent / np.maximum(length, 1e-300)[:, None]
        cand = np.cos(length)[:, None] * gam[idx] + np.sin(length)[:, None] * unit
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        g2, h2, f1, f2 = func.derivatives(cand)
        n2 = np.linalg.norm(g2, axis=1)
        accept = (n2 < gnorm[idx]) | (length < tol)
        acc = idx[accept]
        gam[acc], grad[acc], hess[acc] = cand[accept], g2[accept], h2[accept]
        e1[acc], e2[acc], gnorm[acc] = f1[accept], f2[accept], n2[accept]
        radius[acc] = np.minimum(max_step, 2 * radius[acc])
        radius[idx[~accept]] *= 0.5
        done = (accept & (length < tol)) | (radius[idx] < 1e-15) | (gnorm[idx] == 0)
        active[idx[done]] = False
    scale = max(np.abs(func.op).max(), 1e-300) * max(func.n, 1) ** 2
    converged = gnorm < 1e-9 * scale
    return gam, converged


def _canonical_circle(points):
    """Canonical representatives of a circle of stationary points on the sphere."""
    points = np.asarray(points)
    centroid = points.mean(axis=0)
    _, sv, vh = np.linalg.svd(points - centroid)
    normal = vh[-1]
    if sv[-1] / np.sqrt(len(points)) > 1e-6:
        return None
    height = centroid @ normal
    center = height * normal
    radius = np.sqrt(max(0.0, 1 - height**2))
    axes = np.eye(3)
    proj = axes - np.outer(axes @ normal, normal)
    norms = np.linalg.norm(proj, axis=1)
    first = int(np.flatnonzero(norms >= norms.max() - 1e-9)[0])
    u = proj[first] / norms[first]
    v = np.cross(normal, u)
    reps = [center + radius * u, center - radius * u, center + radius * v, center - radius * v]
    return _dedupe([r / np.linalg.norm(r) for r in reps])


def stationary_points_numeric(op, grid_points=2000, refine_tol=1e-10, continuum_min=8):
    """Stationary Bloch vectors of ``<q^N|op|q^N>`` by grid seeding and Newton refinement.

    Continua of stationary points (from rotational symmetry) are reported by
    canonical representatives: the points of the circle closest to the
    coordinate axes.
    """
    func = _SphereFunction(op)
    seeds = fibonacci_sphere(grid_points)
    vals = func.value(seeds)
    spread = vals.max() - vals.min()
    if spread < 1e-12 * max(1.0, abs(vals).max()):
        # constant function: every direction is stationary
        return [np.asarray(a, dtype=float) for a in np.vstack([np.eye(3), -np.eye(3)])], []
    gam, conv = _newton_on_sphere(func, seeds, tol=refine_tol)
    warnings = []
    if not conv.all():
        # seeds stuck on a fold of |grad f| are redundant with their neighbours
        log.debug("%d of %d seeds stalled without converging", int((~conv).sum()), len(conv))
    pts = _dedupe(gam[conv])
    if not pts:
        raise NumericalError("no stationary point converged")
    fvals = func.value(np.array(pts))
    groups = {}
    for p, fv in zip(pts, fvals):
        key = None
        for k in groups:
            if abs(k - fv) <= 1e-9 * (1 + abs(fv)):
                key = k
                break
        groups.setdefault(fv if key is None else key, []).append(p)
    out = []
    for members in groups.values():
        if len(members) > continuum_min:
            reps = _canonical_circle(members)
            if reps is None:
                warnings.append("stationary continuum is not a circle; keeping raw points")
                out.extend(members)
            else:
                out.extend(reps)
        else:
            out.extend(members)
    return out, warnings


def stationary_states_numeric(rho, grid_points=2000, refine_tol=1e-10):
    """Stationary product states for any ``N`` via the sphere optimizer."""
    mat = _fock(rho)
    n = mat.shape[0] - 1
    if n < 2:
        raise ValidationError("need N >= 2")
    points, _ = stationary_points_numeric(mat, grid_points, refine_tol)
    out = []
    for gamma in points:
        res, g = see_residual(mat, gamma)
        if res > SEE_RESIDUAL_TOL:
            log.warning("numeric stationary point with residual %.3g dropped", res)
            continue
        lam = np.nan
        if n == 2:
            pd = _pauli_from_fock(mat)
            lam = float(gamma @ (pd.gamma_mat @ gamma + pd.gamma_vec))
        out.append(StationarySolution(lam, np.asarray(gamma), g, False, res))
    out.sort(key=lambda s: _sort_key(s.gamma))
    return out


def gram_matrix(solutions, n_photons):
    """``G_ij = |<q_i|q_j>|^(2N) = ((1 + gamma_i . gamma_j) / 2)^N``."""
    gam = np.array([getattr(s, "gamma", s) for s in solutions], dtype=float).reshape(-1, 3)
    if len(gam) == 0:
        raise ValidationError("need at least one stationary state")
    dots = np.clip(gam @ gam.T, -1.0, 1.0)
    return ((1 + dots) / 2) ** n_photons


def quasiprobabilities(rho, solutions, *, allow_pinv=True):
    """Solve ``G P = g`` and report how well ``sum P_i |s_i><s_i|`` reproduces ``rho``."""
    mat = _fock(rho)
    n = mat.shape[0] - 1
    solutions = list(solutions)
    gram = gram_matrix(solutions, n)
    vecs = coherent_vectors(n, np.array([s.gamma for s in solutions]))
    g_vec = np.einsum("ia,ab,ib->i", vecs.conj(), mat, vecs).real
    notes = []
    cond = np.linalg.cond(gram)
    if cond < GRAM_COND_MAX:
        probs = np.linalg.solve(gram, g_vec)
    elif allow_pinv:
        probs = np.linalg.lstsq(gram, g_vec, rcond=1 / GRAM_COND_MAX)[0]
        notes.append(f"Gram matrix ill-conditioned (cond {cond:.3g}); least-squares solution")
    else:
        raise NumericalError(f"Gram matrix is singular (cond {cond:.3g})")
    recon = np.einsum("i,ia,ib->ab", probs, vecs, vecs.conj())
    residual = float(np.linalg.norm(mat - recon))
    return QpqcDecomposition(solutions, gram, g_vec, probs, residual, n, notes)


def decompose(rho, method="exact", **kwargs):
    """Stationary states followed by quasiprobabilities."""
    if method == "exact":
        sols = stationary_states_exact(rho)
    elif method == "numeric":
        sols = stationary_states_numeric(rho, **kwargs)
    else:
        raise ValueError(f"unknown method {method!r}")
    return quasiprobabilities(rho, sols)


def embed_two_qubit(rho):
    return fock_to_two_qubit(rho)

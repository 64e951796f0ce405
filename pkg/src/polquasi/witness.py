"""Dicke-state witnesses of entanglement and nonclassical polarization."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import NumericalError, ValidationError
from .qpqc import _newton_on_sphere, _SphereFunction, fibonacci_sphere
from .stats import sigma_linear_functional

VERDICTS = ("classical-compatible", "nonclassical", "inconclusive")


@dataclass(frozen=True)
class WitnessReport:
    test_operator: str
    g_max: float
    expectation: float
    margin: float
    sigma_margin: float | None
    verdict: str
    z: float = 5.0

    def as_dict(self):
        return {
            "test_operator": self.test_operator,
            "g_max": self.g_max,
            "expectation": self.expectation,
            "margin": self.margin,
            "sigma_margin": self.sigma_margin,
            "verdict": self.verdict,
            "z": self.z,
        }


def dicke_projector(n_photons, k):
    if not 0 <= k <= n_photons:
        raise ValidationError(f"excitation k={k} outside [0, {n_photons}]")
    proj = np.zeros((n_photons + 1, n_photons + 1), dtype=complex)
    proj[k, k] = 1.0
    return proj


def gmax_dicke(n_photons, k):
    """Largest overlap of a product state with the Dicke state ``|k, N-k>``.

    ``binom(N, k) k^k (N-k)^(N-k) / N^N`` (Python's ``0**0 == 1`` covers the poles).
    """
    if n_photons < 1:
        raise ValidationError("need N >= 1")
    if not 0 <= k <= n_photons:
        raise ValidationError(f"excitation k={k} outside [0, {n_photons}]")
    n = n_photons
    return comb(n, k) * k**k * (n - k) ** (n - k) / n**n


def dicke_maximizer(n_photons, k):
    """Bloch vector attaining :func:`gmax_dicke`, with ``|alpha_H|^2 = k / N``.

    Any azimuth works; the representative on the ``x >= 0`` meridian is returned.
    """
    gz = 2 * k / n_photons - 1
    return np.array([np.sqrt(max(0.0, 1 - gz**2)), 0.0, gz])


def gmax_generic(op, grid_points=2000, refine_tol=1e-12):
    """Maximum of ``<q^N|L|q^N>`` over the Bloch sphere for a Hermitian ``L``."""
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] < 2:
        raise ValidationError("test operator must be a square matrix of size N+1 >= 2")
    if np.max(np.abs(op - op.conj().T)) > 1e-10:
        raise ValidationError("test operator must be Hermitian")
    func = _SphereFunction(op)
    for points in (grid_points, 4 * grid_points):
        seeds = fibonacci_sphere(points)
        vals = func.value(seeds)
        top = seeds[np.argsort(vals)[-20:]]
        gam, conv = _newton_on_sphere(func, top, tol=refine_tol)
        if conv.any():
            best = max(vals.max(), func.value(gam[conv]).max())
            return float(best)
    raise NumericalError("sphere maximization did not converge")


def _verdict(margin, sigma, z, atol=1e-12):
    spread = z * (sigma or 0.0)
    if margin > spread + atol:
        return "nonclassical"
    if margin < -spread - atol:
        return "classical-compatible"
    return "inconclusive"


def witness_evaluate(rho, op=None, *, k=None, sigma=None, z=5.0, g_max=None):
    """Compare ``tr(rho L)`` with the classical bound of ``L``.

    Pass ``k`` for the Dicke projector ``|k, N-k><k, N-k|`` or ``op`` for a
    custom Hermitian test operator. ``sigma`` defaults to ``rho.sigma``.
    """
    mat = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    n = mat.shape[0] - 1
    if sigma is None:
        sigma = getattr(rho, "sigma", None)
    if op is None:
        if k is None:
            raise ValidationError("give either a test operator or a Dicke index k")
        op = dicke_projector(n, k)
        name = f"Dicke({n},{k})"
        bound = gmax_dicke(n, k) if g_max is None else g_max
    else:
        op = np.asarray(op, dtype=complex)
        name = "custom"
        bound = gmax_generic(op) if g_max is None else g_max
    if op.shape != mat.shape:
        raise ValidationError(f"test operator shape {op.shape} does not match state {mat.shape}")
    expectation = float(np.trace(mat @ op).real)
    margin = expectation - bound
    sig = None if sigma is None else sigma_linear_functional(op, sigma)
    return WitnessReport(name, float(bound), expectation, margin, sig, _verdict(margin, sig, z), z)

"""Count-level errors, quadratic propagation and Monte Carlo uncertainties."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import NumericalError, ValidationError

log = logging.getLogger(__name__)

MC_CHUNK = 1000
MATCH_CAP_DEG = 30.0
FAILURE_LIMIT = 0.01
COMPLETE_RESIDUAL = 1e-6


def sigma_counts(counts):
    """Binomial standard error ``sqrt(p (1 - p) / n)`` of each outcome frequency."""
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise ValidationError("counts must be nonnegative")
    n = counts.sum()
    if n <= 0:
        raise ValidationError("sigma_counts needs at least one count")
    p = counts / n
    return np.sqrt(p * (1 - p) / n)


def linear_sigma(matrix, sigma):
    """Standard deviation of ``x = M p`` for independent errors on ``p``.

    For complex rows the real and imaginary variances are added, so the
    result is the total spread ``sqrt(var(Re x) + var(Im x))``.
    """
    matrix = np.asarray(matrix)
    var = np.asarray(sigma, dtype=float) ** 2
    total = (matrix.real**2) @ var
    if np.iscomplexobj(matrix):
        total = total + (matrix.imag**2) @ var
    return np.sqrt(total)


def propagate_quadratic(func, p, sigma):
    """``sqrt(sum_k (dF/dp_k)^2 sigma_k^2)`` with central differences.

    The step for coordinate ``k`` is ``max(1e-6, 0.1 sigma_k)``.
    """
    p = np.asarray(p, dtype=float)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), p.shape)
    total = 0.0
    for k in np.ndindex(p.shape):
        if sigma[k] == 0:
            continue
        h = max(1e-6, 0.1 * sigma[k])
        up, down = p.copy(), p.copy()
        up[k] += h
        down[k] -= h
        f_up, f_down = func(up), func(down)
        if not (np.isfinite(f_up) and np.isfinite(f_down)):
            raise NumericalError(f"functional is not finite near coordinate {k}")
        total += ((f_up - f_down) / (2 * h) * sigma[k]) ** 2
    return float(np.sqrt(total))


def perturb_density(mat, sigma, rng, size):
    """Gaussian samples around ``mat``; Hermitian by construction, trace 1.

    ``sigma`` is the total standard deviation of each complex element, so
    off-diagonal real and imaginary parts each get ``sigma / sqrt(2)``.
    """
    mat = np.asarray(mat, dtype=complex)
    sigma = np.asarray(sigma, dtype=float)
    dim = mat.shape[0]
    iu = np.triu_indices(dim, 1)
    out = np.broadcast_to(mat, (size, dim, dim)).copy()
    diag = np.arange(dim)
    out[:, diag, diag] += rng.standard_normal((size, dim)) * np.diag(sigma)
    off = sigma[iu] / np.sqrt(2)
    noise = (rng.standard_normal((size, len(off))) + 1j * rng.standard_normal((size, len(off)))) * off
    out[:, iu[0], iu[1]] += noise
    out[:, iu[1], iu[0]] = out[:, iu[0], iu[1]].conj()
    out[:, diag, diag] = out[:, diag, diag].real
    trace = np.trace(out, axis1=1, axis2=2).real
    return out / trace[:, None, None]


def match_solutions(reference, sample, cap_deg=MATCH_CAP_DEG):
    """Pair reference and sample Bloch vectors minimizing the total angle.

    Returns ``idx`` with ``idx[i]`` the sample index matched to reference
    ``i`` or ``-1`` when no partner lies within ``cap_deg``.
    """
    reference = np.asarray(reference).reshape(-1, 3)
    sample = np.asarray(sample).reshape(-1, 3)
    angles = np.degrees(np.arccos(np.clip(reference @ sample.T, -1, 1)))
    rows, cols = linear_sum_assignment(angles)
    idx = -np.ones(len(reference), dtype=int)
    for r, c in zip(rows, cols):
        if angles[r, c] <= cap_deg:
            idx[r] = c
    return idx


@dataclass
class MonteCarloSummary:
    """Per-quasiprobability mean and standard deviation over valid samples."""

    mean: np.ndarray
    std: np.ndarray
    n_samples: int
    n_used: int
    failures: int
    incomplete: int
    unstable: np.ndarray
    seed: int
    flags: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "n_samples": self.n_samples,
            "n_used": self.n_used,
            "failures": self.failures,
            "incomplete": self.incomplete,
            "unstable": self.unstable.tolist(),
            "seed": self.seed,
            "flags": dict(self.flags),
        }


def _run_chunk(args):
    from .qpqc import quasiprobabilities, stationary_states_exact

    mat, sigma, ref_gammas, seq, size = args
    rng = np.random.default_rng(seq)
    samples = perturb_density(mat, sigma, rng, size)
    n_ref = len(ref_gammas)
    probs = np.full((size, n_ref), np.nan)
    status = np.zeros(size, dtype=int)  # 0 ok, 1 failure, 2 incomplete
    unstable = np.zeros(n_ref, dtype=int)
    for i, sample in enumerate(samples):
        try:
            sols = stationary_states_exact(sample)
            dec = quasiprobabilities(sample, sols)
        except (NumericalError, np.linalg.LinAlgError):
            status[i] = 1
            continue
        idx = match_solutions(ref_gammas, dec.gammas)
        missing = idx < 0
        unstable += missing
        if missing.any() or dec.residual_norm > COMPLETE_RESIDUAL:
            status[i] = 2
            continue
        probs[i] = dec.quasi_probs[idx]
    return probs, status, unstable


def monte_carlo_qpqc(rho, reference=None, z_samples=30000, seed=0, *, sigma=None, workers=1):
    """Spread of the quasiprobabilities under Gaussian noise on ``rho``.

    Samples are drawn in fixed-size chunks, each with its own child of
    ``SeedSequence(seed)``, so the result does not depend on ``workers``.
    Samples whose stationary set does not contain a partner for every
    reference state, or whose decomposition leaves a residual, are counted
    as incomplete and left out of the statistics.
    """
    from .qpqc import decompose

    mat = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    if sigma is None:
        sigma = getattr(rho, "sigma", None)
    if sigma is None:
        raise ValidationError("monte_carlo_qpqc needs element uncertainties")
    if z_samples < 2:
        raise ValidationError("need at least two Monte Carlo samples")
    if reference is None:
        reference = decompose(mat)
    ref_gammas = reference.gammas
    sizes = [MC_CHUNK] * (z_samples // MC_CHUNK)
    if z_samples % MC_CHUNK:
        sizes.append(z_samples % MC_CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(mat, np.asarray(sigma, dtype=float), ref_gammas, sq, sz) for sq, sz in zip(seqs, sizes)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    else:
        results = [_run_chunk(job) for job in jobs]
    probs = np.vstack([r[0] for r in results])
    status = np.concatenate([r[1] for r in results])
    unstable = np.sum([r[2] for r in results], axis=0)
    failures = int(np.sum(status == 1))
    incomplete = int(np.sum(status == 2))
    if failures > FAILURE_LIMIT * z_samples:
        raise NumericalError(f"{failures} of {z_samples} Monte Carlo samples failed")
    used = probs[status == 0]
    if len(used) < 2:
        raise NumericalError("fewer than two complete Monte Carlo samples")
    if incomplete:
        log.debug("%d of %d Monte Carlo samples had an incomplete stationary set", incomplete, z_samples)
    flags = {"hermitian_by_construction": True, "trace_renormalized": True, "psd_projected": False}
    return MonteCarloSummary(
        used.mean(axis=0), used.std(axis=0, ddof=1), z_samples, len(used), failures, incomplete, unstable, seed, flags
    )


def monte_carlo_functional(rho, func, z_samples=30000, seed=0, *, sigma=None):
    """Mean and standard deviation of a real functional of the sampled matrices."""
    mat = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    if sigma is None:
        sigma = rho.sigma
    rng = np.random.default_rng(seed)
    vals = np.array([func(s) for s in perturb_density(mat, sigma, rng, z_samples)])
    return float(vals.mean()), float(vals.std(ddof=1))


def sigma_linear_functional(op, sigma):
    """Standard deviation of ``tr(rho L)`` under the element noise model of
    :func:`perturb_density` (no trace renormalization)."""
    op = np.asarray(op, dtype=complex)
    sigma = np.asarray(sigma, dtype=float)
    diag = np.sum((np.diag(op).real * np.diag(sigma)) ** 2)
    iu = np.triu_indices(op.shape[0], 1)
    # 2 Re(rho_ab L_ba) with independent re/im parts of spread sigma / sqrt(2)
    off = np.sum(2 * np.abs(op.T[iu]) ** 2 * sigma[iu] ** 2)
    return float(np.sqrt(diag + off))

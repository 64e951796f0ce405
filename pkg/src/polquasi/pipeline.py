"""From coincidence counts to a report: tomography, quasiprobabilities,
witnesses and the coherence scan, each stage labelled in its errors."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .coherence import coherence_scan
from .errors import NumericalError, StageError, ValidationError
from .io import atomic_write, canonical_json, dataset_to_dict, write_table
from .qpqc import decompose
from .stats import monte_carlo_qpqc
from .tomography import reconstruct_density
from .witness import witness_evaluate

log = logging.getLogger(__name__)


@dataclass
class PipelineOptions:
    n_photons: int = 2
    psd_project: bool = False
    mc_samples: int = 30000
    sigma_z: float = 5.0
    seed: int = 0
    scan_start: float = 0.0
    scan_stop: float = 180.0
    scan_step: float = 1.0
    scan_axis: str = "linear"
    workers: int = 1

    def thetas(self):
        n = int(round((self.scan_stop - self.scan_start) / self.scan_step))
        return self.scan_start + self.scan_step * np.arange(n + 1)


@dataclass
class ReportBundle:
    reconstruction: object
    qpqc: object | None
    monte_carlo: object | None
    witnesses: list
    coherence: list
    hom: list
    manifest: dict
    notes: list = field(default_factory=list)

    @property
    def density(self):
        return self.reconstruction.density

    @property
    def sigma_p(self):
        if self.monte_carlo is None:
            return None
        return self.monte_carlo.std

    def significant_negatives(self):
        """Indices with ``P_i < -z sigma_i``."""
        if self.qpqc is None or self.sigma_p is None:
            return []
        z = self.manifest["options"]["sigma_z"]
        return [i for i, (p, s) in enumerate(zip(self.qpqc.quasi_probs, self.sigma_p)) if p < -z * s]


def _stage(name, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except (ValidationError, NumericalError) as exc:
        raise StageError(name, exc) from exc
    except np.linalg.LinAlgError as exc:
        raise StageError(name, NumericalError(str(exc))) from exc


def dataset_digest(dataset):
    return hashlib.sha256(canonical_json(dataset_to_dict(dataset)).encode()).hexdigest()


def hom_from_dataset(dataset):
    """Normalized coincidences at the settings with the HWP at 0."""
    sub = dataset.subspace_counts(2)
    rows = []
    for setting, counts in zip(dataset.settings, sub):
        total = counts.sum()
        if setting.hwp_deg != 0.0 or total == 0:
            continue
        p = counts[1] / total
        rows.append((setting.qwp_deg, float(p), float(np.sqrt(p * (1 - p) / total))))
    return sorted(rows)


def run_pipeline(dataset, options=None):
    options = options or PipelineOptions()
    n = options.n_photons
    notes = []
    recon = _stage("tomography", reconstruct_density, dataset, n, psd_project=options.psd_project)
    notes.extend(recon.warnings)
    rho = recon.density
    dec = mc = None
    if n == 2:
        dec = _stage("qpqc", decompose, rho)
        notes.extend(dec.notes)
        if options.mc_samples > 0:
            mc = _stage(
                "monte-carlo",
                monte_carlo_qpqc,
                rho,
                dec,
                options.mc_samples,
                options.seed,
                workers=options.workers,
            )
            if mc.incomplete:
                notes.append(
                    f"{mc.incomplete} of {mc.n_samples} Monte Carlo samples lacked a full stationary set"
                )
        if dec.residual_norm > 1e-8:
            notes.append(
                f"stationary states do not span the state (residual {dec.residual_norm:.3g}); "
                "quasiprobabilities are a least-squares fit"
            )
    else:
        notes.append("quasiprobabilities are computed for photon pairs only; witnesses reported instead")
    witnesses = [
        _stage("witness", witness_evaluate, rho, k=k, z=options.sigma_z) for k in range(n + 1)
    ]
    scan = _stage(
        "coherence", coherence_scan, rho, options.thetas(), axis=options.scan_axis, seed=options.seed
    )
    hom = hom_from_dataset(dataset) if n == 2 else []
    manifest = {
        "tool": "polquasi",
        "version": __version__,
        "options": asdict(options),
        "dataset_sha256": dataset_digest(dataset),
        "dataset_metadata": dataset.metadata,
        "n_settings": len(dataset),
        "flags": {
            "psd_projected": options.psd_project,
            "monte_carlo": None if mc is None else mc.flags,
        },
        "raw_min_eigenvalue": recon.raw_min_eigenvalue,
        "notes": notes,
    }
    for msg in notes:
        log.warning(msg)
    return ReportBundle(recon, dec, mc, witnesses, scan, hom, manifest, notes)


def density_rows(rho):
    sig = rho.sigma
    rows = []
    for (i, j), val in np.ndenumerate(rho.elements):
        rows.append((i, j, val.real, val.imag, np.nan if sig is None else sig[i, j]))
    return rows


def qpqc_rows(bundle):
    if bundle.qpqc is None:
        return []
    sig = bundle.sigma_p
    rows = []
    for i, sol in enumerate(bundle.qpqc.solutions):
        s = np.nan if sig is None else sig[i]
        rows.append((sol.label, *sol.gamma, sol.g, sol.lam, bundle.qpqc.quasi_probs[i], s))
    return rows


def write_report(bundle, outdir, figures=True):
    """Delimited tables, the manifest and (optionally) PNG figures."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def table(name, header, rows):
        path = out / name
        write_table(path, header, rows)
        written.append(path)

    table("density.csv", ["row", "col", "re", "im", "sigma"], density_rows(bundle.density))
    if bundle.qpqc is not None:
        table("qpqc.csv", ["state", "gamma_x", "gamma_y", "gamma_z", "g", "lambda", "P", "sigma_P"], qpqc_rows(bundle))
    table(
        "witnesses.csv",
        ["operator", "g_max", "expectation", "margin", "sigma_margin", "verdict"],
        [
            (w.test_operator, w.g_max, w.expectation, w.margin,
             np.nan if w.sigma_margin is None else w.sigma_margin, w.verdict)
            for w in bundle.witnesses
        ],
    )
    table("coherence_scan.csv", ["theta_deg", "c_l2", "sigma"], bundle.coherence)
    if bundle.hom:
        table("hom.csv", ["qwp_deg", "coincidence", "sigma"], bundle.hom)
    manifest = dict(bundle.manifest)
    if bundle.monte_carlo is not None:
        manifest["monte_carlo"] = bundle.monte_carlo.as_dict()
    if bundle.qpqc is not None:
        manifest["qpqc_residual_norm"] = bundle.qpqc.residual_norm
    if figures:
        from .plotting import render_figures

        written.extend(render_figures(bundle, out))
    manifest["files"] = sorted(p.name for p in written)
    atomic_write(out / "manifest.json", canonical_json(_plain(manifest)))
    written.append(out / "manifest.json")
    return written


def _plain(obj):
    from .io import _jsonable

    obj = _jsonable(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_plain(v) for v in obj]
    return obj

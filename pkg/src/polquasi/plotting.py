"""PNG figures for a report bundle (density matrix, quasiprobabilities,
coherence scan, coincidence curve)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_density(rho, path):
    mat = np.asarray(rho.elements)
    n = mat.shape[0] - 1
    ticks = [f"|{m},{n - m}>" for m in range(n + 1)]
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.6))
    for ax, part, title in zip(axes, (mat.real, mat.imag), ("Re", "Im")):
        im = ax.imshow(part, cmap="RdBu_r", vmin=-1, vmax=1)
        ax.set_title(f"{title} rho")
        ax.set_xticks(range(n + 1), ticks)
        ax.set_yticks(range(n + 1), ticks)
        fig.colorbar(im, ax=ax, shrink=0.8)
    return _save(fig, path)


def plot_qpqc(decomposition, sigma, path, z=5.0):
    probs = decomposition.quasi_probs
    x = np.arange(len(probs))
    fig, ax = plt.subplots(figsize=(6, 3.6))
    colors = ["tab:red" if p < 0 else "tab:blue" for p in probs]
    err = None if sigma is None else z * np.asarray(sigma)
    ax.bar(x, probs, color=colors, yerr=err, capsize=3)
    ax.axhline(0, color="k", lw=0.8)
    ax.set_xticks(x, decomposition.labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("P")
    ax.set_title(f"quasiprobabilities (bars: {z:g} sigma)" if err is not None else "quasiprobabilities")
    return _save(fig, path)


def plot_coherence(rows, path):
    th, c, s = (np.array(col, dtype=float) for col in zip(*rows))
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(th, c, color="tab:green")
    if np.all(np.isfinite(s)):
        ax.fill_between(th, c - s, c + s, color="tab:green", alpha=0.3)
    ax.set_xlabel("basis angle theta (deg)")
    ax.set_ylabel("l2 coherence")
    return _save(fig, path)


def plot_hom(rows, path, reference=None):
    q, c, s = (np.array(col, dtype=float) for col in zip(*rows))
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.errorbar(q, c, yerr=s, fmt="o", ms=4, label="data")
    if reference is not None:
        rq, rc = zip(*[(r[0], r[1]) for r in reference])
        ax.plot(rq, rc, "k--", lw=1, label="ideal pair")
    ax.axhline(0.5, color="gray", lw=0.8, ls=":")
    ax.set_xlabel("QWP angle (deg)")
    ax.set_ylabel("normalized coincidences")
    ax.legend()
    return _save(fig, path)


def render_figures(bundle, outdir):
    from .simulate import SourceModel, hom_curve

    out = Path(outdir)
    paths = [plot_density(bundle.density, out / "density.png")]
    if bundle.qpqc is not None:
        z = bundle.manifest["options"]["sigma_z"]
        paths.append(plot_qpqc(bundle.qpqc, bundle.sigma_p, out / "qpqc.png", z))
    if bundle.coherence:
        paths.append(plot_coherence(bundle.coherence, out / "coherence_scan.png"))
    if bundle.hom:
        grid = np.linspace(-90, 90, 181)
        ref = hom_curve(SourceModel("ideal_pair"), grid)
        paths.append(plot_hom(bundle.hom, out / "hom.png", ref))
    return paths

"""Synthetic coincidence data for ideal and imperfect photon-pair sources."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .states import coherent_from_bloch, dicke_state
from .tomography import (
    CoincidenceDataset,
    DensityMatrix,
    MeasurementSetting,
    omega_from_waveplates,
    predicted_probabilities,
)

KINDS = ("ideal_pair", "distinguishable_pair", "custom_rho")


def ideal_pair_state():
    """``|1,1><1,1|``: one horizontal and one vertical photon."""
    return dicke_state(2, 1).projector()


def distinguishable_pair_state():
    """Equal mixture of ``|D,D>`` and ``|A,A>``."""
    dd = coherent_from_bloch(2, (1.0, 0.0, 0.0)).projector()
    aa = coherent_from_bloch(2, (-1.0, 0.0, 0.0)).projector()
    return (dd + aa) / 2


@dataclass
class SourceModel:
    """Photon source. ``visibility`` blends the ideal pair with the
    distinguishable mixture, ``v rho_ideal + (1 - v) rho_dist``."""

    kind: str = "ideal_pair"
    visibility: float = 1.0
    n_photons: int = 2
    shots_per_setting: int = 100_000
    rho: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown source kind {self.kind!r}; use one of {KINDS}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValidationError(f"visibility {self.visibility} outside [0, 1]")
        if self.shots_per_setting < 1:
            raise ValidationError("shots_per_setting must be >= 1")
        if self.kind == "custom_rho":
            if self.rho is None:
                raise ValidationError("custom_rho source needs a density matrix")
            mat = np.asarray(getattr(self.rho, "elements", self.rho), dtype=complex)
            self.n_photons = mat.shape[0] - 1
        elif self.n_photons != 2:
            raise ValidationError("pair sources are two-photon sources (n_photons = 2)")


def model_state(src):
    if src.kind == "custom_rho":
        mat = np.asarray(getattr(src.rho, "elements", src.rho), dtype=complex)
    elif src.kind == "distinguishable_pair":
        mat = distinguishable_pair_state()
    else:
        v = src.visibility
        mat = v * ideal_pair_state() + (1 - v) * distinguishable_pair_state()
    return DensityMatrix(src.n_photons, mat)


def simulate_dataset(src, settings, seed=0):
    """Multinomial photon-number counts for every setting.

    Setting ``j`` draws from child ``j`` of ``SeedSequence(seed)``, so each
    setting's counts do not depend on how many settings precede it.
    """
    rho = model_state(src)
    n = src.n_photons
    settings = list(settings)
    children = np.random.SeedSequence(seed).spawn(len(settings))
    counts = []
    for setting, child in zip(settings, children):
        p = np.clip(predicted_probabilities(rho, omega_from_waveplates(setting)), 0.0, None)
        draw = np.random.default_rng(child).multinomial(src.shots_per_setting, p / p.sum())
        mat = np.zeros((n + 1, n + 1), dtype=np.int64)
        mat[np.arange(n + 1), n - np.arange(n + 1)] = draw
        counts.append(mat)
    meta = {
        "label": f"simulated {src.kind}",
        "source": src.kind,
        "visibility": src.visibility,
        "shots_per_setting": src.shots_per_setting,
        "seed": seed,
        **src.metadata,
    }
    return CoincidenceDataset(settings, counts, meta)


def hom_curve(src, qwp_grid, seed=None):
    """Normalized coincidences ``C_11 / (C_20 + C_11 + C_02)`` against the QWP angle.

    The HWP stays at 0. Without a seed the model probability is returned; with
    a seed the counts are sampled. The error is the binomial
    ``sqrt(p (1 - p) / shots)``.
    """
    if src.n_photons != 2:
        raise ValidationError("the coincidence curve is defined for photon pairs")
    settings = [MeasurementSetting(0.0, q) for q in qwp_grid]
    shots = src.shots_per_setting
    if seed is None:
        rho = model_state(src)
        fracs = [predicted_probabilities(rho, omega_from_waveplates(s))[1] for s in settings]
    else:
        data = simulate_dataset(src, settings, seed)
        sub = data.subspace_counts(2)
        fracs = sub[:, 1] / sub.sum(axis=1)
    rows = []
    for q, p in zip(qwp_grid, fracs):
        p = float(np.clip(p, 0.0, 1.0))
        rows.append((float(q), p, float(np.sqrt(p * (1 - p) / shots))))
    return rows

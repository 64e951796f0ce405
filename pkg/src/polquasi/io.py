"""Dataset and density-matrix files, delimited tables and atomic writes.

Files are JSON with sorted keys and two-space indentation, so saving a
loaded canonical file reproduces it byte for byte. Complex numbers are
``[re, im]`` pairs and angles are degrees.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .tomography import CoincidenceDataset, DensityMatrix, MeasurementSetting

SCHEMA_VERSION = 1
METADATA_KEYS = ("label", "pump_mean_photon_number", "acquisition_seconds")


def atomic_write(path, text):
    """Write via a temporary file in the same directory and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def canonical_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def dataset_to_dict(dataset):
    return {
        "schema_version": SCHEMA_VERSION,
        "metadata": _jsonable(dataset.metadata),
        "settings": [{"hwp_deg": s.hwp_deg, "qwp_deg": s.qwp_deg} for s in dataset.settings],
        "counts": [
            {"setting_index": j, "matrix": mat.tolist()} for j, mat in enumerate(dataset.counts)
        ],
    }


def _require(cond, msg):
    if not cond:
        raise ValidationError(msg)


def dataset_from_dict(doc):
    _require(isinstance(doc, dict), "dataset document must be an object")
    for key in ("schema_version", "settings", "counts"):
        _require(key in doc, f"dataset is missing field {key!r}")
    _require(doc["schema_version"] == SCHEMA_VERSION, f"unsupported schema_version {doc['schema_version']!r}")
    meta = doc.get("metadata", {})
    _require(isinstance(meta, dict), "metadata must be an object")
    settings = []
    for j, item in enumerate(doc["settings"]):
        _require(isinstance(item, dict), f"settings[{j}] must be an object")
        try:
            settings.append(MeasurementSetting(float(item["hwp_deg"]), float(item["qwp_deg"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"settings[{j}] needs numeric hwp_deg and qwp_deg ({exc})") from exc
    counts = [None] * len(settings)
    for i, entry in enumerate(doc["counts"]):
        _require(isinstance(entry, dict), f"counts[{i}] must be an object")
        idx = entry.get("setting_index")
        _require(isinstance(idx, int) and not isinstance(idx, bool), f"counts[{i}].setting_index must be an integer")
        _require(0 <= idx < len(settings), f"counts[{i}].setting_index {idx} has no matching setting")
        _require(counts[idx] is None, f"duplicate setting_index {idx} in counts[{i}]")
        rows = entry.get("matrix")
        _require(isinstance(rows, list) and rows and all(isinstance(r, list) for r in rows),
                 f"counts[{i}].matrix must be a list of rows")
        _require(len({len(r) for r in rows}) == 1, f"counts[{i}].matrix is not rectangular")
        for r, row in enumerate(rows):
            for c, val in enumerate(row):
                _require(isinstance(val, int) and not isinstance(val, bool),
                         f"counts[{i}].matrix[{r}][{c}] = {val!r} is not an integer")
                _require(val >= 0, f"negative count {val} at counts[{i}].matrix[{r}][{c}]")
        counts[idx] = np.array(rows, dtype=np.int64)
    missing = [j for j, c in enumerate(counts) if c is None]
    _require(not missing, f"settings without counts: {missing[:10]}")
    return CoincidenceDataset(settings, counts, dict(meta))


def save_dataset(dataset, path):
    atomic_write(path, canonical_json(dataset_to_dict(dataset)))


def load_dataset(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    return dataset_from_dict(doc)


def load_counts_csv(path, metadata=None):
    """Counts from rows ``hwp_deg,qwp_deg,n_plus,n_minus,count``.

    Settings keep their order of first appearance.
    """
    index = {}
    cells = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"hwp_deg", "qwp_deg", "n_plus", "n_minus", "count"}
        _require(reader.fieldnames is not None and need <= set(reader.fieldnames),
                 f"CSV header must contain {sorted(need)}")
        for line, row in enumerate(reader, start=2):
            try:
                key = (float(row["hwp_deg"]), float(row["qwp_deg"]))
                n_plus, n_minus, count = int(row["n_plus"]), int(row["n_minus"]), int(row["count"])
            except ValueError as exc:
                raise ValidationError(f"{path}:{line}: {exc}") from exc
            _require(n_plus >= 0 and n_minus >= 0, f"{path}:{line}: negative photon number")
            _require(count >= 0, f"{path}:{line}: negative count {count}")
            index.setdefault(key, len(index))
            cells.append((index[key], n_plus, n_minus, count))
    _require(cells, f"{path}: no data rows")
    rows = 1 + max(c[1] for c in cells)
    cols = 1 + max(c[2] for c in cells)
    mats = [np.zeros((rows, cols), dtype=np.int64) for _ in index]
    for j, a, b, count in cells:
        mats[j][a, b] += count
    settings = [MeasurementSetting(h, q) for h, q in index]
    return CoincidenceDataset(settings, mats, dict(metadata or {}))


def _pairs(mat):
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(mat, dtype=complex)]


def density_to_dict(rho):
    return {
        "schema_version": SCHEMA_VERSION,
        "n_photons": rho.n_photons,
        "elements": _pairs(rho.elements),
        "sigma": None if rho.sigma is None else np.asarray(rho.sigma).tolist(),
        "psd_tol": rho.psd_tol,
    }


def density_from_dict(doc, psd_tol=None):
    try:
        n = int(doc["n_photons"])
        arr = np.array(doc["elements"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"invalid density document ({exc})") from exc
    _require(arr.shape == (n + 1, n + 1, 2), f"elements must be a {n + 1}x{n + 1} grid of [re, im] pairs")
    sigma = doc.get("sigma")
    if psd_tol is None:
        psd_tol = doc.get("psd_tol")
    kwargs = {} if psd_tol is None else {"psd_tol": float(psd_tol)}
    return DensityMatrix(n, arr[..., 0] + 1j * arr[..., 1], None if sigma is None else np.array(sigma), **kwargs)


def save_density(rho, path):
    atomic_write(path, canonical_json(density_to_dict(rho)))


def load_density(path, psd_tol=None):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    return density_from_dict(doc, psd_tol)


def format_table(header, rows, delimiter=","):
    buf = _io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value)) if np.isfinite(value) else "nan"
    return value


def write_table(path, header, rows, delimiter=","):
    atomic_write(path, format_table(header, rows, delimiter))

"""JSON and CSV serialization of count files, density matrices, Stokes tensors and samples.

Every writer goes through a temporary file in the destination directory that is
renamed into place, so readers never see half-written artifacts.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .bayes import PosteriorSampleSet
from .measurement import AXIS, CountRecord, Dataset

FORMAT_VERSION = 1


class CountFileError(ValueError):
    """A count file that cannot be turned into a Dataset.

    ``category`` is a short machine-readable tag and ``record`` the 0-based
    index of the offending record, when there is one.
    """

    def __init__(self, category: str, detail: str, record: int | None = None):
        self.category = category
        self.record = record
        super().__init__(detail if record is None else f"{detail}, record {record}")


# ---------------------------------------------------------------- atomic writes


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps(obj))


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise CountFileError("malformed-json", f"{path}: {exc}") from None


# ---------------------------------------------------------------- count files


def dataset_to_dict(dataset: Dataset) -> dict:
    records = []
    for rec in dataset.values():
        entry = {"setting": rec.setting, "counts": [int(c) for c in rec.counts]}
        if rec.duration is not None:
            entry["duration_s"] = rec.duration
        records.append(entry)
    return {"format_version": FORMAT_VERSION, "n_qubits": dataset.n_qubits, "records": records}


def dataset_from_dict(doc) -> Dataset:
    if not isinstance(doc, dict):
        raise CountFileError("schema", "count file must be a JSON object")
    for key in ("format_version", "n_qubits", "records"):
        if key not in doc:
            raise CountFileError("schema", f"missing field {key!r}")
    if doc["format_version"] != FORMAT_VERSION:
        raise CountFileError("schema", f"unsupported format_version {doc['format_version']!r}")
    n = doc["n_qubits"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise CountFileError("schema", f"n_qubits must be a positive integer, got {n!r}")
    if not isinstance(doc["records"], list):
        raise CountFileError("schema", "records must be a list")
    records, seen = [], {}
    for i, raw in enumerate(doc["records"]):
        if not isinstance(raw, dict) or "setting" not in raw or "counts" not in raw:
            raise CountFileError("schema", "record needs 'setting' and 'counts'", i)
        setting = raw["setting"]
        if not isinstance(setting, str):
            raise CountFileError("schema", "setting must be a string", i)
        for pos, letter in enumerate(setting):
            if letter not in AXIS:
                raise CountFileError(
                    "unknown-basis", f"unknown basis {letter!r} at position {pos} of {setting!r}", i
                )
        if len(setting) != n:
            raise CountFileError(
                "setting-length", f"setting {setting!r} has length {len(setting)}, expected {n}", i
            )
        if setting in seen:
            raise CountFileError(
                "duplicate-setting", f"duplicate setting {setting!r} (first at record {seen[setting]})", i
            )
        seen[setting] = i
        counts = raw["counts"]
        if not isinstance(counts, list):
            raise CountFileError("schema", "counts must be a list", i)
        if len(counts) != 2**n:
            raise CountFileError("counts-length", f"counts length {len(counts)}, expected {2**n}", i)
        if not all(isinstance(c, int) and not isinstance(c, bool) and c >= 0 for c in counts):
            raise CountFileError("counts-value", "counts must be nonnegative integers", i)
        duration = raw.get("duration_s")
        if duration is not None and not isinstance(duration, (int, float)):
            raise CountFileError("schema", "duration_s must be a number", i)
        records.append(CountRecord(setting, np.asarray(counts, dtype=np.int64), duration))
    return Dataset.from_records(records, n_qubits=n)


def write_count_file(dataset: Dataset, path) -> None:
    write_json(path, dataset_to_dict(dataset))


def read_count_file(path) -> Dataset:
    return dataset_from_dict(read_json(path))


# ---------------------------------------------------------------- matrices and tensors


def density_to_dict(rho: np.ndarray) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {
        "dim": int(rho.shape[0]),
        "re": rho.real.reshape(-1).tolist(),
        "im": rho.imag.reshape(-1).tolist(),
    }


def density_from_dict(doc) -> np.ndarray:
    try:
        dim = int(doc["dim"])
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed density matrix: {exc}") from None
    if re.shape != (dim * dim,) or im.shape != (dim * dim,):
        raise ValueError(f"density matrix arrays must have {dim * dim} entries")
    return (re + 1j * im).reshape(dim, dim)


def stokes_to_dict(stokes: np.ndarray) -> dict:
    stokes = np.asarray(stokes, dtype=float)
    return {"n_qubits": stokes.ndim, "values": stokes.reshape(-1).tolist()}


def stokes_from_dict(doc) -> np.ndarray:
    n = int(doc["n_qubits"])
    values = np.asarray(doc["values"], dtype=float)
    if values.shape != (4**n,):
        raise ValueError(f"Stokes values must have {4**n} entries for {n} qubits")
    return values.reshape((4,) * n)


# ---------------------------------------------------------------- posterior samples


def write_samples(path, sets: dict[str, PosteriorSampleSet]) -> None:
    """Store named sample sets in one ``.npz`` archive."""
    arrays = {}
    for name, s in sets.items():
        arrays[f"{name}/samples"] = s.samples
        arrays[f"{name}/meta"] = np.array([s.n_qubits, s.burn_in_index, s.acceptance_rate])
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    atomic_write_bytes(path, buf.getvalue())


def read_samples(path) -> dict[str, PosteriorSampleSet]:
    out = {}
    with np.load(path) as z:
        names = sorted({k.rsplit("/", 1)[0] for k in z.files})
        for name in names:
            n, burn, rate = z[f"{name}/meta"]
            out[name] = PosteriorSampleSet(int(n), z[f"{name}/samples"], int(burn), float(rate))
    return out


def pair_key(pair) -> str:
    return f"pair-{pair[0]}-{pair[1]}"


def parse_pair_key(key: str) -> tuple[int, int]:
    _, a, b = key.split("-")
    return int(a), int(b)


# ---------------------------------------------------------------- scans


def scan_to_csv(scan) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta1", "theta2", "fidelity", "normalized"])
    for a, b, f, nf in scan.rows():
        w.writerow([f"{a:g}", f"{b:g}", f"{f:.12f}", f"{nf:.12f}"])
    return buf.getvalue()

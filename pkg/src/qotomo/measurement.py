"""Measurement bases, Born-rule probabilities and coincidence-count records.

A basis setting is a string of basis letters, one per qubit, e.g. ``"ZXYZ"``.
Outcome ``k`` of a setting is read as a bit string with qubit 0 as the most
significant bit; bit 0 is the transmitted (first-listed, eigenvalue +1)
eigenstate and bit 1 the reflected one.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from functools import lru_cache, reduce

import numpy as np

from .core import check_density, n_qubits_of

BASES = ("X", "Y", "Z")
AXIS = {"X": 1, "Y": 2, "Z": 3}
BASIS_OF_AXIS = {1: "X", 2: "Y", 3: "Z"}

_S = 1 / np.sqrt(2)
# columns: (+1 eigenstate, -1 eigenstate)
EIGENSTATES = {
    "Z": np.array([[1, 0], [0, 1]], dtype=complex),  # H, V
    "X": np.array([[_S, _S], [_S, -_S]], dtype=complex),  # D, A
    "Y": np.array([[_S, _S], [1j * _S, -1j * _S]], dtype=complex),  # R, L
}

# (HWP angle, QWP angle) in degrees
WAVEPLATES = {"Z": (0.0, 0.0), "X": (22.5, 0.0), "Y": (0.0, 45.0)}


class EmptyRecordError(ValueError):
    """A count record with no events cannot be normalized."""


def check_setting(setting: str, n: int | None = None) -> str:
    setting = str(setting).upper()
    for pos, letter in enumerate(setting):
        if letter not in AXIS:
            raise ValueError(f"unknown basis {letter!r} at position {pos} of {setting!r}")
    if not setting:
        raise ValueError("empty basis setting")
    if n is not None and len(setting) != n:
        raise ValueError(f"setting {setting!r} has length {len(setting)}, expected {n}")
    return setting


def outcome_bits(outcome: int, n: int) -> tuple[int, ...]:
    return tuple((outcome >> (n - 1 - j)) & 1 for j in range(n))


def basis_to_waveplates(basis: str) -> tuple[float, float]:
    """Waveplate angles (HWP, QWP) in degrees that select ``basis``."""
    return WAVEPLATES[check_setting(basis, 1)]


@lru_cache(maxsize=None)
def _setting_unitary(setting: str) -> np.ndarray:
    # columns are the 2**n product eigenstates in outcome order
    u = reduce(np.kron, [EIGENSTATES[b] for b in setting])
    u.setflags(write=False)
    return u


def projector(setting: str, outcome: int) -> np.ndarray:
    """Rank-1 projector onto the product eigenstate selected by ``outcome``."""
    setting = check_setting(setting)
    n = len(setting)
    if not 0 <= outcome < 2**n:
        raise ValueError(f"outcome {outcome} out of range for {n} qubits")
    v = _setting_unitary(setting)[:, outcome]
    return np.outer(v, v.conj())


def outcome_probabilities(rho: np.ndarray, setting: str) -> np.ndarray:
    """Born-rule probabilities of all 2**n outcomes of ``setting``."""
    setting = check_setting(setting)
    n = n_qubits_of(rho)
    if len(setting) != n:
        raise ValueError(f"setting {setting!r} does not match a {n}-qubit state")
    u = _setting_unitary(setting)
    p = np.einsum("io,ij,jo->o", u.conj(), rho, u).real
    p[p < 0] = 0.0
    return p / p.sum()


def pattern_to_outcome(detectors: Iterable[int], n_units: int | None = None) -> int:
    """Outcome index of a coincidence pattern.

    Detection unit ``u`` (0-based) owns detectors ``2u+1`` (transmitted) and
    ``2u+2`` (reflected); exactly one detector per unit must fire. Without
    ``n_units`` the number of units is taken from the pattern size.
    """
    dets = sorted(set(int(d) for d in detectors))
    if not dets or dets[0] < 1:
        raise ValueError(f"invalid detector ids: {dets}")
    n = len(dets) if n_units is None else int(n_units)
    units = [(d - 1) // 2 for d in dets]
    if units != list(range(n)):
        raise ValueError(f"pattern {dets} must hold exactly one detector from each of {n} units")
    out = 0
    for d in dets:
        out = (out << 1) | ((d - 1) % 2)
    return out


def outcome_to_pattern(outcome: int, n: int) -> tuple[int, ...]:
    return tuple(2 * j + 1 + b for j, b in enumerate(outcome_bits(outcome, n)))


@dataclass(frozen=True)
class CountRecord:
    """Coincidence counts of one basis setting, in outcome order."""

    setting: str
    counts: np.ndarray
    duration: float | None = None

    def __post_init__(self):
        setting = check_setting(self.setting)
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size != 2 ** len(setting):
            raise ValueError(
                f"counts length {counts.size}, expected {2 ** len(setting)} for setting {setting}"
            )
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(counts == np.round(counts)):
                raise ValueError("counts must be integers")
            counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        counts = counts.astype(np.int64, copy=True)
        counts.setflags(write=False)
        object.__setattr__(self, "setting", setting)
        object.__setattr__(self, "counts", counts)

    @property
    def n_qubits(self) -> int:
        return len(self.setting)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        if not isinstance(other, CountRecord):
            return NotImplemented
        return (
            self.setting == other.setting
            and np.array_equal(self.counts, other.counts)
            and self.duration == other.duration
        )

    __hash__ = None


def normalize_counts(record: CountRecord) -> np.ndarray:
    """Relative frequencies c_i / sum(c)."""
    total = record.total
    if total <= 0:
        raise EmptyRecordError(f"record for setting {record.setting} has no counts")
    return record.counts / total


@dataclass(frozen=True)
class Dataset(Mapping):
    """Immutable map from basis setting to its count record."""

    n_qubits: int
    records: dict = field(default_factory=dict)

    def __post_init__(self):
        recs = {}
        for key, rec in dict(self.records).items():
            if rec.n_qubits != self.n_qubits:
                raise ValueError(
                    f"record {rec.setting} has {rec.n_qubits} qubits, dataset has {self.n_qubits}"
                )
            if key != rec.setting:
                raise ValueError(f"record key {key!r} does not match its setting {rec.setting!r}")
            recs[key] = rec
        object.__setattr__(self, "records", recs)

    @classmethod
    def from_records(cls, records: Iterable[CountRecord], n_qubits: int | None = None) -> "Dataset":
        records = list(records)
        if n_qubits is None:
            if not records:
                raise ValueError("cannot infer n_qubits from an empty record list")
            n_qubits = records[0].n_qubits
        out = {}
        for i, rec in enumerate(records):
            if rec.setting in out:
                raise ValueError(f"duplicate setting {rec.setting} at record {i}")
            out[rec.setting] = rec
        return cls(n_qubits, out)

    def __getitem__(self, setting: str) -> CountRecord:
        return self.records[setting]

    def __iter__(self) -> Iterator[str]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.n_qubits == other.n_qubits and list(self.records.items()) == list(
            other.records.items()
        )

    __hash__ = None

    @property
    def total_counts(self) -> int:
        return sum(r.total for r in self.records.values())

    def subset(self, settings: Iterable[str]) -> "Dataset":
        return Dataset.from_records([self.records[s] for s in settings], self.n_qubits)


def exact_dataset(rho: np.ndarray, schedule: Iterable[str], scale: int = 10**12) -> Dataset:
    """Counts proportional to exact Born probabilities (the infinite-statistics limit)."""
    check_density(rho)
    recs = []
    for s in schedule:
        p = outcome_probabilities(rho, s)
        recs.append(CountRecord(s, np.rint(p * scale).astype(np.int64)))
    return Dataset.from_records(recs, n_qubits_of(rho))

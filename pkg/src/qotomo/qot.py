"""Overlapping tomography of all two-qubit marginals.

The n qubits are split into two groups in ``ceil(log2 n)`` different ways
(divides) such that every pair of qubits lands in different groups at least
once. Measuring all qubits in X, Y and Z, plus the six mixed assignments
(B1 on group 0, B2 != B1 on group 1) for each divide, gives ``3 + 6q``
settings that fix every two-qubit Stokes parameter.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import density_from_stokes, nearest_density
from .exact import IncompleteScheduleError, Reconstruction, setting_matches, sign_pattern
from .measurement import BASES, CountRecord, Dataset, normalize_counts


def n_divides(n: int) -> int:
    return (n - 1).bit_length()


@dataclass(frozen=True)
class Divide:
    """Group label (0 or 1) of every qubit."""

    group_of: tuple[int, ...]

    def __post_init__(self):
        labels = set(self.group_of)
        if not labels <= {0, 1}:
            raise ValueError("group labels must be 0 or 1")
        if labels != {0, 1}:
            raise ValueError("both groups of a divide must be nonempty")

    def groups(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        g0 = tuple(j for j, g in enumerate(self.group_of) if g == 0)
        g1 = tuple(j for j, g in enumerate(self.group_of) if g == 1)
        return g0, g1

    def separates(self, a: int, b: int) -> bool:
        return self.group_of[a] != self.group_of[b]

    def setting(self, b0: str, b1: str) -> str:
        return "".join(b0 if g == 0 else b1 for g in self.group_of)


def generate_divides(n: int) -> list[Divide]:
    """Divide t puts qubit j in group (j >> t) & 1."""
    if n < 2:
        raise ValueError("overlapping tomography needs at least 2 qubits")
    return [Divide(tuple((j >> t) & 1 for j in range(n))) for t in range(n_divides(n))]


@dataclass(frozen=True)
class QotSchedule:
    divides: tuple[Divide, ...]
    uniform_settings: tuple[str, ...]
    divide_settings: tuple[tuple[str, ...], ...]

    @property
    def n_qubits(self) -> int:
        return len(self.uniform_settings[0])

    @property
    def settings(self) -> list[str]:
        out = list(self.uniform_settings)
        for group in self.divide_settings:
            out.extend(group)
        return out

    def __len__(self) -> int:
        return len(self.settings)

    def __iter__(self):
        return iter(self.settings)


def qot_schedule(n: int) -> QotSchedule:
    divides = generate_divides(n)
    uniform = tuple(b * n for b in BASES)
    per_divide = tuple(
        tuple(d.setting(b0, b1) for b0, b1 in itertools.permutations(BASES, 2)) for d in divides
    )
    sched = QotSchedule(tuple(divides), uniform, per_divide)
    assert len(set(sched.settings)) == len(sched.settings)
    return sched


def _check_pair(pair, n: int) -> tuple[int, int]:
    x1, x2 = (int(x) for x in pair)
    if not (0 <= x1 < x2 < n):
        raise ValueError(f"pair {pair} must satisfy 0 <= x1 < x2 < {n}")
    return x1, x2


def _covered(dataset: Dataset) -> list[str]:
    sched = qot_schedule(dataset.n_qubits).settings
    missing = [s for s in sched if s not in dataset]
    if missing:
        raise IncompleteScheduleError(missing, "overlapping tomography")
    return sched


def pair_stokes(dataset: Dataset, pair) -> np.ndarray:
    """4x4 Stokes tensor of the marginal on ``pair``.

    Each component is the unweighted mean of the sign-weighted sums over every
    schedule setting whose bases agree with the component at the non-identity
    positions.
    """
    n = dataset.n_qubits
    x1, x2 = _check_pair(pair, n)
    sched = _covered(dataset)
    probs = {s: normalize_counts(dataset[s]) for s in sched}
    out = np.empty((4, 4))
    for i1, i2 in itertools.product(range(4), repeat=2):
        if i1 == 0 and i2 == 0:
            out[0, 0] = 1.0
            continue
        word = [0] * n
        word[x1], word[x2] = i1, i2
        signs = sign_pattern(word)
        vals = [signs @ probs[s] for s in sched if setting_matches(word, s)]
        if not vals:
            raise IncompleteScheduleError([f"any setting for S{(i1, i2)} on {pair}"])
        out[i1, i2] = np.mean(vals)
    return out


def pair_records(dataset: Dataset, pair) -> list[CountRecord]:
    """Schedule records marginalized onto ``pair`` (settings may repeat)."""
    n = dataset.n_qubits
    x1, x2 = _check_pair(pair, n)
    out = []
    for s in _covered(dataset):
        c = dataset[s].counts.reshape((2,) * n)
        drop = tuple(j for j in range(n) if j not in (x1, x2))
        out.append(CountRecord(s[x1] + s[x2], c.sum(axis=drop).reshape(4)))
    return out


def all_pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def reconstruct_pairs(dataset: Dataset) -> dict[tuple[int, int], Reconstruction]:
    out = {}
    for pair in all_pairs(dataset.n_qubits):
        raw = density_from_stokes(pair_stokes(dataset, pair))
        out[pair] = Reconstruction(raw, nearest_density(raw))
    return out

"""Linear-inversion ("exact") full state tomography."""

from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np

from .core import density_from_stokes, nearest_density
from .measurement import AXIS, BASES, BASIS_OF_AXIS, Dataset, normalize_counts


class IncompleteScheduleError(ValueError):
    """The dataset lacks settings that the requested quantity needs."""

    def __init__(self, missing, what="dataset"):
        self.missing = sorted(missing)
        shown = ", ".join(self.missing[:8]) + (" ..." if len(self.missing) > 8 else "")
        super().__init__(f"{what} is missing {len(self.missing)} settings: {shown}")


class Reconstruction(NamedTuple):
    raw: np.ndarray
    physical: np.ndarray


def full_schedule(n: int) -> list[str]:
    """All 3**n settings, lexicographic with X < Y < Z."""
    if n < 1:
        raise ValueError("n must be positive")
    return ["".join(s) for s in itertools.product(BASES, repeat=n)]


def sign_pattern(word) -> np.ndarray:
    """Coefficient (+1/-1) of each outcome probability in S_word.

    Qubits with index 0 in the word are transparent; every other qubit
    contributes -1 when its outcome bit is 1.
    """
    word = tuple(int(i) for i in word)
    n = len(word)
    outcomes = np.arange(2**n)
    parity = np.zeros(2**n, dtype=np.int64)
    for j, i in enumerate(word):
        if i != 0:
            parity ^= (outcomes >> (n - 1 - j)) & 1
    return 1 - 2 * parity


def compatible_settings(word, bases=BASES) -> list[str]:
    """Settings whose basis matches the word wherever the word is not identity."""
    choices = [bases if i == 0 else (BASIS_OF_AXIS[i],) for i in word]
    return ["".join(s) for s in itertools.product(*choices)]


def setting_matches(word, setting: str) -> bool:
    return all(i == 0 or AXIS[b] == i for i, b in zip(word, setting))


def stokes_component(word, dataset: Dataset) -> float:
    """S_word averaged (unweighted) over every compatible full-schedule setting."""
    word = tuple(int(i) for i in word)
    if len(word) != dataset.n_qubits:
        raise ValueError(f"word {word} does not match {dataset.n_qubits} qubits")
    if all(i == 0 for i in word):
        return 1.0
    settings = compatible_settings(word)
    missing = [s for s in settings if s not in dataset]
    if missing:
        raise IncompleteScheduleError(missing, f"S{word}")
    signs = sign_pattern(word)
    vals = [signs @ normalize_counts(dataset[s]) for s in settings]
    return float(np.mean(vals))


def full_stokes(dataset: Dataset) -> np.ndarray:
    """Linear-inversion Stokes tensor from a dataset covering the full schedule."""
    n = dataset.n_qubits
    sched = full_schedule(n)
    missing = [s for s in sched if s not in dataset]
    if missing:
        raise IncompleteScheduleError(missing, "full tomography")
    probs = {s: normalize_counts(dataset[s]) for s in sched}
    stokes = np.empty((4,) * n)
    for word in itertools.product(range(4), repeat=n):
        if not any(word):
            stokes[word] = 1.0
            continue
        signs = sign_pattern(word)
        stokes[word] = np.mean([signs @ probs[s] for s in compatible_settings(word)])
    return stokes


def reconstruct_full(dataset: Dataset) -> Reconstruction:
    """Raw linear-inversion matrix and the closest density matrix to it."""
    raw = density_from_stokes(full_stokes(dataset))
    return Reconstruction(raw, nearest_density(raw))

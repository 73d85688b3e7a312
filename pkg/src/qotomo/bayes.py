"""Bayesian mean estimation of Stokes parameters by coordinate-wise Metropolis sampling.

The parameter vector ``theta`` holds the Stokes values of every non-identity
Pauli word in lexicographic order (4**n - 1 entries); the identity coefficient
is pinned to 1. The posterior combines a Gaussian surrogate of the count
likelihood,

    log L = -sum_{settings, outcomes} (nbar - n)**2 / nbar,   nbar = N * p(theta),

with a Gaussian prior centred on a reference parameter vector. Parameters that
imply a non-positive-semidefinite matrix have zero posterior weight.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from ._kernel import is_psd, run_chain
from .core import (
    PSD_TOL,
    density_from_stokes,
    pauli_word_matrix,
    nearest_density,
    pauli_words,
    project_to_physical,
    stokes_from_density,
)
from .exact import full_stokes, sign_pattern, setting_matches
from .measurement import CountRecord, Dataset, _setting_unitary
from .qot import all_pairs, pair_records, pair_stokes


@dataclass(frozen=True)
class SamplerConfig:
    beta: float = 0.01
    iterations: int = 5000
    burn_in: float = 0.2
    seed: int = 0
    sigma_floor: float = 0.1
    count_floor: float = 0.5

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0 <= self.burn_in < 1:
            raise ValueError("burn_in must lie in [0, 1)")
        if not self.sigma_floor > 0:
            raise ValueError("sigma_floor must be positive")
        if not self.count_floor > 0:
            raise ValueError("count_floor must be positive")
        if int(self.iterations) < 1:
            raise ValueError("iterations must be at least 1")


@dataclass(frozen=True)
class PosteriorSampleSet:
    """One parameter vector per sweep; the first ``burn_in_index`` are warm-up."""

    n_qubits: int
    samples: np.ndarray
    burn_in_index: int
    acceptance_rate: float

    def __post_init__(self):
        if len(self.samples) == 0:
            raise ValueError("sample set is empty")
        if not 0 <= self.burn_in_index < len(self.samples):
            raise ValueError("burn_in_index must index into the samples")

    @property
    def retained(self) -> np.ndarray:
        return self.samples[self.burn_in_index :]

    def stokes(self) -> np.ndarray:
        """Retained samples as Stokes tensors, shape (R, 4, ..., 4)."""
        r = self.retained
        full = np.concatenate([np.ones((len(r), 1)), r], axis=1)
        return full.reshape((len(r),) + (4,) * self.n_qubits)

    def densities(self) -> Iterable[np.ndarray]:
        for s in self.stokes():
            yield density_from_stokes(s)

    def marginal(self, keep: Sequence[int]) -> "PosteriorSampleSet":
        """Samples of the reduced state on ``keep`` (Stokes sub-tensor, no partial trace)."""
        keep = sorted(keep)
        idx = tuple(slice(None) if q in keep else 0 for q in range(self.n_qubits))
        s = np.concatenate(
            [np.ones((len(self.samples), 1)), self.samples], axis=1
        ).reshape((len(self.samples),) + (4,) * self.n_qubits)
        sub = s[(slice(None),) + idx].reshape(len(self.samples), -1)[:, 1:]
        return PosteriorSampleSet(len(keep), np.ascontiguousarray(sub), self.burn_in_index,
                                  self.acceptance_rate)


def theta_from_stokes(stokes: np.ndarray) -> np.ndarray:
    return np.asarray(stokes, dtype=float).reshape(-1)[1:].copy()


def stokes_from_theta(theta: np.ndarray, n: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (4**n - 1,):
        raise ValueError(f"expected {4**n - 1} parameters for {n} qubits, got {theta.shape}")
    return np.concatenate([[1.0], theta]).reshape((4,) * n)


def n_qubits_of_theta(theta) -> int:
    size = len(theta) + 1
    n = int(round(math.log(size, 4)))
    if 4**n != size:
        raise ValueError(f"parameter vector of length {len(theta)} is not 4**n - 1")
    return n


def density_from_theta(theta: np.ndarray) -> np.ndarray:
    return density_from_stokes(stokes_from_theta(theta, n_qubits_of_theta(theta)))


def _records(data) -> list[CountRecord]:
    if isinstance(data, Mapping):
        return list(data.values())
    return list(data)


def log_likelihood(theta: np.ndarray, data, count_floor: float = 0.5) -> float:
    """Gaussian count surrogate; -inf when theta implies an unphysical state."""
    rho = density_from_theta(theta)
    n = rho.shape[0].bit_length() - 1
    if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
        return -np.inf
    total = 0.0
    for rec in _records(data):
        if rec.n_qubits != n:
            raise ValueError(f"record {rec.setting} does not match {n} qubits")
        u = _setting_unitary(rec.setting)
        p = np.einsum("io,ij,jo->o", u.conj(), rho, u).real
        nbar = rec.total * p
        total -= np.sum((nbar - rec.counts) ** 2 / np.maximum(nbar, count_floor))
    return float(total)


def log_prior(theta: np.ndarray, theta_ref: np.ndarray, sigma_floor: float = 0.1) -> float:
    theta = np.asarray(theta, dtype=float)
    theta_ref = np.asarray(theta_ref, dtype=float)
    if theta.shape != theta_ref.shape:
        raise ValueError("theta and theta_ref differ in length")
    scale = np.maximum(np.abs(theta_ref), sigma_floor)
    return float(-np.sum((theta - theta_ref) ** 2 / (2 * scale)))


def _design(records: list[CountRecord], n: int):
    """Sparse map from each parameter to the (record, outcome) rows it moves."""
    d = 2**n
    words = pauli_words(n)
    totals = np.repeat([float(r.total) for r in records], d)
    observed = np.concatenate([r.counts for r in records]).astype(float)
    base = totals / d
    ptr = [0]
    rows, signs = [], []
    for w in words:
        pattern = sign_pattern(w) / d
        for i, rec in enumerate(records):
            if setting_matches(w, rec.setting):
                rows.extend(range(i * d, (i + 1) * d))
                signs.extend(pattern)
        ptr.append(len(rows))
    paulis = np.stack([pauli_word_matrix(w) for w in words]) / d
    return (
        paulis,
        np.eye(d, dtype=complex) / d,
        np.asarray(ptr, dtype=np.int64),
        np.asarray(rows, dtype=np.int64),
        np.asarray(signs, dtype=float),
        totals,
        base,
        observed,
    )


def gibbs_sample(
    data: Dataset | Sequence[CountRecord],
    theta_ref: np.ndarray,
    theta_start: np.ndarray,
    cfg: SamplerConfig = SamplerConfig(),
) -> PosteriorSampleSet:
    """Metropolis-within-Gibbs chain over all Stokes parameters.

    Each sweep visits every coordinate once, proposing
    ``theta_k' ~ N(theta_k, beta * max(|theta_k|, sigma_floor))`` and accepting
    with the Metropolis-Hastings ratio, including the correction for the
    state-dependent proposal width.
    """
    records = _records(data)
    if not records:
        raise ValueError("no count records to sample from")
    theta_start = np.asarray(theta_start, dtype=float)
    theta_ref = np.asarray(theta_ref, dtype=float)
    n = n_qubits_of_theta(theta_start)
    if theta_ref.shape != theta_start.shape:
        raise ValueError("theta_ref and theta_start differ in length")
    if not np.all(np.isfinite(theta_start)) or not np.all(np.isfinite(theta_ref)):
        raise ValueError("parameter vectors must be finite")
    rho0 = density_from_theta(theta_start)
    if not is_psd(np.ascontiguousarray(rho0), PSD_TOL):
        raise ValueError("theta_start implies a state that is not positive semidefinite")
    paulis, ident, ptr, rows, signs, totals, base, observed = _design(records, n)
    prior_scale = np.maximum(np.abs(theta_ref), cfg.sigma_floor)
    rng = np.random.default_rng(cfg.seed)
    sweeps, dim = int(cfg.iterations), len(theta_start)
    normals = rng.standard_normal((sweeps, dim))
    uniforms = rng.random((sweeps, dim))
    samples, accepted = run_chain(
        theta_start, theta_ref, prior_scale, paulis, ident, ptr, rows, signs, totals, base,
        observed, float(cfg.count_floor), float(cfg.beta), float(cfg.sigma_floor), PSD_TOL,
        normals, uniforms,
    )
    burn = min(int(cfg.burn_in * sweeps), sweeps - 1)
    return PosteriorSampleSet(n, samples, burn, accepted / (sweeps * dim))


def posterior_mean(samples: PosteriorSampleSet) -> np.ndarray:
    """Average of the retained states, projected onto the physical set."""
    kept = samples.retained
    if len(kept) == 0:
        raise ValueError("no samples after burn-in")
    mean = np.mean(kept, axis=0)
    return project_to_physical(density_from_theta(mean))


def nearest_rank(values: np.ndarray, q: float):
    """Smallest order statistic with at least a fraction q of values at or below it."""
    v = np.sort(np.asarray(values))
    k = max(math.ceil(q * len(v) - 1e-9), 1)
    return v[k - 1]


def credible_interval(
    samples: PosteriorSampleSet,
    functional: Callable[[np.ndarray], float],
    level: float = 0.95,
) -> tuple[float, float]:
    """Central interval of ``functional`` over retained samples."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    values = np.array([functional(rho) for rho in samples.densities()])
    return interval_from_values(values, level)


def interval_from_values(values: np.ndarray, level: float = 0.95) -> tuple[float, float]:
    if len(values) < 10:
        raise ValueError(f"need at least 10 samples for an interval, got {len(values)}")
    return (
        float(nearest_rank(values, (1 - level) / 2)),
        float(nearest_rank(values, (1 + level) / 2)),
    )


def physical_start(stokes: np.ndarray, white: float = 0.01) -> np.ndarray:
    """Interior starting point near a linear-inversion Stokes tensor.

    The raw estimate is moved to the nearest density matrix and mixed with a
    fraction ``white`` of the maximally mixed state; a start on the boundary of
    the positive cone would make every coordinate move unphysical.
    """
    rho = nearest_density(density_from_stokes(stokes))
    d = rho.shape[0]
    rho = (1 - white) * rho + white * np.eye(d) / d
    return theta_from_stokes(stokes_from_density(rho))


def estimate_full(
    dataset: Dataset, cfg: SamplerConfig = SamplerConfig(), reference: np.ndarray | None = None
) -> PosteriorSampleSet:
    """Sample the full-state posterior, starting from the linear-inversion estimate.

    The prior is centred on the raw linear-inversion Stokes values unless a
    reference density matrix is given.
    """
    raw = full_stokes(dataset)
    ref = theta_from_stokes(raw if reference is None else stokes_from_density(reference))
    return gibbs_sample(dataset, ref, physical_start(raw), cfg)


def _pair_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), 1 + index]).generate_state(1)[0])


PAIR_CONFIG = SamplerConfig(beta=0.05, iterations=2000)


def estimate_pairs(
    dataset: Dataset, cfg: SamplerConfig = PAIR_CONFIG
) -> dict[tuple[int, int], PosteriorSampleSet]:
    """Independent two-qubit chains for every pair of an overlapping-tomography dataset."""
    out = {}
    for i, pair in enumerate(all_pairs(dataset.n_qubits)):
        raw = pair_stokes(dataset, pair)
        pair_cfg = SamplerConfig(cfg.beta, cfg.iterations, cfg.burn_in, _pair_seed(cfg.seed, i),
                                 cfg.sigma_floor, cfg.count_floor)
        out[pair] = gibbs_sample(pair_records(dataset, pair), theta_from_stokes(raw),
                                 physical_start(raw), pair_cfg)
    return out

"""Reference states of the two-pair photon source and a coincidence-count simulator."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .core import StateError, check_density, n_qubits_of
from .measurement import CountRecord, Dataset, check_setting, outcome_probabilities

H = np.array([1, 0], dtype=complex)
V = np.array([0, 1], dtype=complex)


@dataclass(frozen=True)
class SourceParams:
    """HWP angles on qubits 2 and 4, and the two pair phases (all degrees)."""

    theta_a: float = 0.0
    theta_b: float = 0.0
    theta_1: float = 0.0
    theta_2: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.theta_a, self.theta_b, self.theta_1, self.theta_2])):
            raise ValueError("source angles must be finite")


@dataclass(frozen=True)
class NoiseSpec:
    counts_per_setting: int = 2000
    white_noise_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.counts_per_setting) <= 0:
            raise ValueError("counts_per_setting must be positive")
        if not 0.0 <= self.white_noise_fraction <= 1.0:
            raise ValueError("white_noise_fraction must lie in [0, 1]")


def _kets(*vecs) -> np.ndarray:
    out = vecs[0]
    for v in vecs[1:]:
        out = np.kron(out, v)
    return out


def _pair_state(phase_deg: float, hwp_deg: float) -> np.ndarray:
    """|HV> + e^{i phase}|VH> with a half-wave plate on the second photon."""
    c, s = np.cos(np.radians(2 * hwp_deg)), np.sin(np.radians(2 * hwp_deg))
    rot = np.array([[c, -s], [s, c]], dtype=complex)
    pair = _kets(H, V) + np.exp(1j * np.radians(phase_deg)) * _kets(V, H)
    return np.kron(np.eye(2), rot) @ pair


def four_photon_state(p: SourceParams) -> np.ndarray:
    """Post-selected 4-photon state after photons 2 and 4 meet at the PBS.

    Two pairs |HV> + e^{i theta_k}|VH> are prepared, the second photon of each
    goes through a half-wave plate, and only events where photons 2 and 4
    carry equal polarization survive. The result is renormalized.
    """
    psi = np.kron(_pair_state(p.theta_1, p.theta_a), _pair_state(p.theta_2, p.theta_b))
    # keep |HH> + |VV> on qubits 1 and 3
    amps = psi.reshape(2, 2, 2, 2).copy()
    amps[:, 0, :, 1] = 0
    amps[:, 1, :, 0] = 0
    psi = amps.reshape(-1)
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        raise StateError(f"post-selection leaves no amplitude for {p}")
    return psi / norm


def ghz_state(n: int, theta: float = 0.0) -> np.ndarray:
    """(|HVHV...> + e^{i theta}|VHVH...>)/sqrt(2), theta in degrees."""
    if n < 2:
        raise ValueError("GHZ state needs at least 2 qubits")
    a = _kets(*[H if j % 2 == 0 else V for j in range(n)])
    b = _kets(*[V if j % 2 == 0 else H for j in range(n)])
    return (a + np.exp(1j * np.radians(theta)) * b) / np.sqrt(2)


def _setting_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def simulate_dataset(rho: np.ndarray, schedule: Sequence[str], noise: NoiseSpec) -> Dataset:
    """Multinomial counts from (1 - f) Born(rho) + f uniform for every setting.

    Each setting draws from its own stream seeded by ``(seed, setting index)``,
    so results do not depend on evaluation order.
    """
    check_density(rho)
    n = n_qubits_of(rho)
    if len(schedule) == 0:
        raise ValueError("schedule is empty")
    f = noise.white_noise_fraction
    recs = []
    for idx, setting in enumerate(schedule):
        setting = check_setting(setting, n)
        p = (1 - f) * outcome_probabilities(rho, setting) + f / 2**n
        p = p / p.sum()
        counts = _setting_stream(noise.seed, idx).multinomial(int(noise.counts_per_setting), p)
        recs.append(CountRecord(setting, counts))
    return Dataset.from_records(recs, n)

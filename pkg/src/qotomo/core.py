"""Dense state-space primitives for multi-qubit polarization states.

Density matrices are plain ``complex128`` ndarrays of shape ``(2**n, 2**n)``.
Stokes tensors are real ndarrays of shape ``(4,) * n`` indexed by Pauli words,
so ``S[3, 3, 0, 0]`` is the coefficient of ``Z (x) Z (x) I (x) I``.

Qubit 0 is the leftmost tensor factor, and the most significant bit of any
basis-state index.
"""

from __future__ import annotations

import itertools
from functools import lru_cache, reduce

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9

SIGMA = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


class StateError(ValueError):
    """Raised when a matrix fails the checks required of a quantum state."""


def n_qubits_of(m: np.ndarray) -> int:
    """Number of qubits of a square matrix whose side is a power of two."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StateError(f"expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise StateError(f"dimension {dim} is not a power of two")
    return n


def _check_square(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StateError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise StateError(f"{name} has non-finite entries")
    return m


def tensor_product(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of square matrices, left factor most significant."""
    if not mats:
        raise ValueError("tensor_product needs at least one matrix")
    mats = [_check_square(m, "factor") for m in mats]
    return reduce(np.kron, mats)


def pauli_words(n: int, include_identity: bool = False) -> list[tuple[int, ...]]:
    """All Pauli words of length n in lexicographic order."""
    words = list(itertools.product(range(4), repeat=n))
    return words if include_identity else words[1:]


@lru_cache(maxsize=None)
def _pauli_word_matrix(word: tuple[int, ...]) -> np.ndarray:
    m = reduce(np.kron, [SIGMA[i] for i in word])
    m.setflags(write=False)
    return m


def pauli_word_matrix(word) -> np.ndarray:
    """Matrix of sigma_{i1} (x) ... (x) sigma_{in} (read-only, cached)."""
    return _pauli_word_matrix(tuple(int(i) for i in word))


@lru_cache(maxsize=None)
def _pauli_stack(n: int) -> np.ndarray:
    # shape (4**n, 2**n, 2**n), row-major over words
    stack = np.stack([_pauli_word_matrix(w) for w in pauli_words(n, True)])
    stack.setflags(write=False)
    return stack


def density_from_stokes(stokes: np.ndarray) -> np.ndarray:
    """rho = 2**-n * sum_w S_w sigma_w.

    The result is Hermitian with unit trace whenever ``S[0,...,0] == 1`` but
    it is not necessarily positive semidefinite.
    """
    stokes = np.asarray(stokes, dtype=float)
    n = stokes.ndim
    if stokes.shape != (4,) * n or n == 0:
        raise ValueError(f"Stokes tensor must have shape (4,)*n, got {stokes.shape}")
    flat = stokes.reshape(-1)
    rho = np.tensordot(flat, _pauli_stack(n), axes=1) / 2**n
    return rho


def stokes_from_density(rho: np.ndarray) -> np.ndarray:
    """S_w = Tr(sigma_w rho) for every Pauli word w."""
    rho = _check_square(rho, "rho")
    n = n_qubits_of(rho)
    # Tr(P rho) = sum_ij P_ij rho_ji
    vals = np.einsum("wij,ji->w", _pauli_stack(n), rho)
    return vals.real.reshape((4,) * n)


def check_density(rho: np.ndarray, name: str = "rho") -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity within tolerance."""
    rho = _check_square(rho, name)
    n_qubits_of(rho)
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise StateError(f"{name} is not Hermitian")
    if abs(np.trace(rho) - 1) > TRACE_TOL:
        raise StateError(f"{name} has trace {np.trace(rho).real:.3g}, expected 1")
    if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
        raise StateError(f"{name} is not positive semidefinite")
    return rho


def is_physical(rho: np.ndarray) -> bool:
    try:
        check_density(rho)
    except StateError:
        return False
    return True


def pure_density(psi: np.ndarray) -> np.ndarray:
    """|psi><psi| for a state vector, normalizing it first."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise StateError("zero state vector")
    psi = psi / norm
    return np.outer(psi, psi.conj())


def partial_trace(rho: np.ndarray, keep) -> np.ndarray:
    """Reduced density matrix on the qubits in ``keep`` (returned in ascending order)."""
    rho = _check_square(rho, "rho")
    n = n_qubits_of(rho)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one qubit")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"qubit index out of range for {n} qubits: {keep}")
    if len(keep) == n:
        return rho
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    # trace out from the highest index down so remaining axis numbers stay valid
    for q in reversed(drop):
        cur = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + cur)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))**2, clipped to [0, 1]."""
    a = _check_square(a, "a")
    b = _check_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    sa = _psd_sqrt((a + a.conj().T) / 2)
    inner = sa @ ((b + b.conj().T) / 2) @ sa
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    f = np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2
    return float(min(max(f, 0.0), 1.0))


def pure_fidelity(psi: np.ndarray, rho: np.ndarray) -> float:
    """<psi|rho|psi> for a normalized vector; equals ``fidelity`` for pure references."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return float(np.real(psi.conj() @ rho @ psi))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """-Tr(rho ln rho) in nats, with eigenvalues clipped to [0, 1]."""
    rho = _check_square(rho, "rho")
    w = np.clip(np.linalg.eigvalsh((rho + rho.conj().T) / 2), 0.0, 1.0)
    w = w[w > 0]
    return float(max(-np.sum(w * np.log(w)), 0.0))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = np.asarray(a) - np.asarray(b)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((d + d.conj().T) / 2))))


def project_to_physical(m: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues to zero and renormalize the trace.

    Already-physical inputs come back unchanged up to rounding.
    """
    m = _check_square(m, "matrix")
    n_qubits_of(m)
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise StateError("cannot project a non-Hermitian matrix")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total <= 0:
        raise StateError("matrix has no positive spectrum to keep")
    return (v * (w / total)) @ v.conj().T


def _simplex_projection(w: np.ndarray) -> np.ndarray:
    # Euclidean projection onto {x >= 0, sum x = 1}
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.nonzero(u - css / np.arange(1, len(u) + 1) > 0)[0][-1]
    return np.maximum(w - css[k] / (k + 1), 0.0)


def nearest_density(m: np.ndarray) -> np.ndarray:
    """Density matrix closest to a Hermitian matrix in Frobenius norm.

    Keeps the eigenvectors and projects the spectrum onto the probability
    simplex, so small positive eigenvalues absorb the negative ones instead
    of surviving as noise.
    """
    m = _check_square(m, "matrix")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * _simplex_projection(w)) @ v.conj().T


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Ginibre) measure."""
    d = 2**n
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return psi / np.linalg.norm(psi)

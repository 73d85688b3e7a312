"""Fidelity and entropy reports, and phase scans against the rotated reference state."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bayes import PosteriorSampleSet, interval_from_values, posterior_mean
from .core import (
    check_density,
    fidelity,
    n_qubits_of,
    partial_trace,
    pure_density,
    stokes_from_density,
    von_neumann_entropy,
)
from .qot import all_pairs

TIE_TOL = 1e-12

H = np.array([1, 0], dtype=complex)
V = np.array([0, 1], dtype=complex)


def reference_prime(theta1: float, theta2: float) -> np.ndarray:
    """(|D'V D''V> + |A'H A''H>)/sqrt(2) with D/A' = (H +/- e^{i theta1} V)/sqrt(2).

    Angles in degrees; the doubly-primed pair uses ``theta2``.
    """
    return _reference_prime_grid(np.atleast_1d(theta1), np.atleast_1d(theta2))[0, 0]


def _reference_prime_grid(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """State vectors on the grid t1 x t2, shape (len(t1), len(t2), 16)."""
    e1 = np.exp(1j * np.radians(np.asarray(t1, dtype=float)))[:, None]
    e2 = np.exp(1j * np.radians(np.asarray(t2, dtype=float)))[:, None]
    s = 1 / np.sqrt(2)
    d1, a1 = s * (H + e1 * V), s * (H - e1 * V)  # (G1, 2)
    d2, a2 = s * (H + e2 * V), s * (H - e2 * V)  # (G2, 2)
    # |x V y V> and |x H y H> over all grid combinations
    first = np.einsum("ia,b,jc,d->ijabcd", d1, V, d2, V)
    second = np.einsum("ia,b,jc,d->ijabcd", a1, H, a2, H)
    psi = (first + second).reshape(len(t1), len(t2), 16) * s
    return psi / np.linalg.norm(psi, axis=-1, keepdims=True)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fidelity_batch(fixed: np.ndarray, others: np.ndarray) -> np.ndarray:
    """Uhlmann fidelity between one state and a stack of states of the same size."""
    sf = _psd_sqrt((fixed + fixed.conj().T) / 2)
    inner = sf @ others @ sf
    inner = (inner + np.swapaxes(inner.conj(), -1, -2)) / 2
    w = np.clip(np.linalg.eigvalsh(inner), 0, None)
    return np.clip(np.sum(np.sqrt(w), axis=-1) ** 2, 0.0, 1.0)


def entropy_batch(rhos: np.ndarray) -> np.ndarray:
    w = np.clip(np.linalg.eigvalsh(rhos), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0)), 0.0)
    return np.maximum(-terms.sum(axis=-1), 0.0)


@dataclass(frozen=True)
class PhaseScan:
    theta1: np.ndarray
    theta2: np.ndarray
    surface: np.ndarray  # [i, j] -> fidelity at (theta1[i], theta2[j])
    peak: tuple[float, float]
    peak_fidelity: float

    @property
    def normalized(self) -> np.ndarray:
        return self.surface / self.peak_fidelity if self.peak_fidelity > 0 else self.surface

    def rows(self):
        """(theta1, theta2, fidelity, normalized) in grid order."""
        norm = self.normalized
        for i, a in enumerate(self.theta1):
            for j, b in enumerate(self.theta2):
                yield float(a), float(b), float(self.surface[i, j]), float(norm[i, j])


def phase_grid(step: float, start: float = -180.0, stop: float = 180.0) -> np.ndarray:
    if not step > 0:
        raise ValueError("grid step must be positive")
    return np.arange(start, stop - 1e-9, step, dtype=float)


def phase_scan(
    estimate: np.ndarray,
    pair: tuple[int, int] | None = None,
    grid_step: float = 3.0,
    theta1_grid: np.ndarray | None = None,
    theta2_grid: np.ndarray | None = None,
) -> PhaseScan:
    """Fidelity of ``estimate`` with the rotated reference over a (theta1, theta2) grid.

    With ``pair`` given, ``estimate`` is a two-qubit state compared with the
    matching marginal of the reference. The peak is the first maximum in
    row-major order, i.e. the smallest theta1 and then theta2 among ties
    (values within ``TIE_TOL`` of the maximum).
    """
    if not grid_step > 0:
        raise ValueError("grid step must be positive")
    t1 = phase_grid(grid_step) if theta1_grid is None else np.asarray(theta1_grid, dtype=float)
    t2 = phase_grid(grid_step) if theta2_grid is None else np.asarray(theta2_grid, dtype=float)
    estimate = check_density(estimate, "estimate")
    psi = _reference_prime_grid(t1, t2)
    if pair is None:
        if n_qubits_of(estimate) != 4:
            raise ValueError("a full scan needs a 4-qubit estimate")
        surface = np.einsum("ija,ab,ijb->ij", psi.conj(), estimate, psi).real
    else:
        x1, x2 = sorted(pair)
        if n_qubits_of(estimate) != 2:
            raise ValueError("a pair scan needs a 2-qubit estimate")
        t = psi.reshape(len(t1), len(t2), 2, 2, 2, 2)
        drop = [q for q in range(4) if q not in (x1, x2)]
        # move kept qubits first, then contract the dropped ones
        t = np.moveaxis(t, [2 + x1, 2 + x2] + [2 + q for q in drop], [2, 3, 4, 5])
        t = t.reshape(len(t1), len(t2), 4, 4)
        reduced = np.einsum("ijak,ijbk->ijab", t, t.conj())
        surface = fidelity_batch(estimate, reduced)
    surface = np.clip(surface, 0.0, 1.0)
    # values equal up to rounding count as ties
    first = np.flatnonzero(surface.reshape(-1) >= surface.max() - TIE_TOL)[0]
    i, j = np.unravel_index(first, surface.shape)
    return PhaseScan(t1, t2, surface, (float(t1[i]), float(t2[j])), float(surface[i, j]))


class Estimate(NamedTuple):
    """A scalar summary.

    With samples, ``value`` is the posterior mean of the scalar and ``lo``/``hi``
    its central credible interval. ``at_estimate`` is the scalar evaluated on
    the point-estimate state; without samples it is also ``value``.
    """

    value: float
    lo: float | None = None
    hi: float | None = None
    at_estimate: float | None = None


@dataclass(frozen=True)
class Reconstructed:
    """A state estimate, optionally backed by the posterior samples it came from."""

    state: np.ndarray
    samples: PosteriorSampleSet | None = None

    @classmethod
    def of(cls, x) -> "Reconstructed":
        if isinstance(x, Reconstructed):
            return x
        if isinstance(x, PosteriorSampleSet):
            return cls(posterior_mean(x), x)
        return cls(check_density(np.asarray(x), "estimate"))


def _estimate(at_estimate: float, values: np.ndarray | None, level: float) -> Estimate:
    if values is None:
        return Estimate(float(at_estimate), at_estimate=float(at_estimate))
    lo, hi = interval_from_values(values, level)
    return Estimate(float(np.mean(values)), lo, hi, float(at_estimate))


def _paired(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evenly thin two sample stacks to a common length."""
    m = min(len(a), len(b))
    ia = np.linspace(0, len(a) - 1, m).round().astype(int)
    ib = np.linspace(0, len(b) - 1, m).round().astype(int)
    return a[ia], b[ib]


def _pair_fidelities(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([fidelity(x, y) for x, y in zip(*_paired(a, b))])


@dataclass
class PairRow:
    pair: tuple[int, int]
    fst_fidelity: Estimate | None = None
    qot_fidelity: Estimate | None = None
    cross_fidelity: Estimate | None = None
    fst_entropy: Estimate | None = None
    qot_entropy: Estimate | None = None


_ROW_FIELDS = ("fst_fidelity", "qot_fidelity", "cross_fidelity", "fst_entropy", "qot_entropy")


def _enc(e):
    return None if e is None else e._asdict()


def _dec(e):
    return None if e is None else Estimate(**e)


@dataclass
class ComparisonReport:
    n_qubits: int
    rows: list[PairRow] = field(default_factory=list)
    full_fidelity: Estimate | None = None
    level: float = 0.95

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "level": self.level,
            "full_fidelity": _enc(self.full_fidelity),
            "pairs": [
                {"pair": list(r.pair), **{f: _enc(getattr(r, f)) for f in _ROW_FIELDS}}
                for r in self.rows
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        rows = [
            PairRow(tuple(r["pair"]), **{f: _dec(r.get(f)) for f in _ROW_FIELDS})
            for r in d["pairs"]
        ]
        return cls(d["n_qubits"], rows, _dec(d["full_fidelity"]), d["level"])

    def estimates(self):
        """Every (label, Estimate) in the report."""
        if self.full_fidelity is not None:
            yield "full_fidelity", self.full_fidelity
        for r in self.rows:
            for f in _ROW_FIELDS:
                e = getattr(r, f)
                if e is not None:
                    yield f"{f}{r.pair}", e

    def to_table(self) -> str:
        def fmt(e):
            if e is None:
                return "-"
            if e.lo is None:
                return f"{e.value:.4f}"
            return f"{e.value:.4f} [{e.lo:.4f}, {e.hi:.4f}]"

        header = ["pair", "F(FST)", "F(QOT)", "F(QOT,FST)", "S(FST)", "S(QOT)"]
        body = [[f"{r.pair[0]},{r.pair[1]}"] + [fmt(getattr(r, f)) for f in _ROW_FIELDS]
                for r in self.rows]
        # drop columns that are empty in every row
        cols = [i for i in range(len(header)) if i == 0 or any(b[i] != "-" for b in body)]
        header = [header[i] for i in cols]
        body = [[b[i] for i in cols] for b in body]
        widths = [max(len(x) for x in col) for col in zip(header, *body)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
        lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in body]
        if self.full_fidelity is not None:
            lines.append(f"full-state fidelity: {fmt(self.full_fidelity)}")
        return "\n".join(lines)


def _sample_densities(samples: PosteriorSampleSet) -> np.ndarray:
    return np.stack(list(samples.densities()))


def build_report(
    reference: np.ndarray,
    fst=None,
    qot: Mapping | None = None,
    level: float = 0.95,
) -> ComparisonReport:
    """Per-pair fidelities with the reference marginals and entropies, with intervals.

    ``fst`` is a full-state estimate and ``qot`` maps each pair to a two-qubit
    estimate. Either may be a density matrix, a ``PosteriorSampleSet`` (whose
    posterior mean is the point estimate) or a ``Reconstructed``. Point values
    come from the samples when present (see ``Estimate``); the cross fidelity
    pairs FST-marginal and QOT samples index by index.
    """
    if fst is None and qot is None:
        raise ValueError("build_report needs an FST estimate, QOT estimates, or both")
    ref = np.asarray(reference)
    ref = pure_density(ref) if ref.ndim == 1 else check_density(ref, "reference")
    n = n_qubits_of(ref)
    report = ComparisonReport(n, level=level)
    if fst is not None:
        fst = Reconstructed.of(fst)
        if n_qubits_of(fst.state) != n:
            raise ValueError(
                f"FST estimate has {n_qubits_of(fst.state)} qubits, reference has {n}")
        vals = None
        if fst.samples is not None:
            if np.allclose(ref @ ref, ref, atol=1e-10):
                # Tr(ref rho) is linear in the Stokes values
                s_ref = stokes_from_density(ref).reshape(-1)
                vals = np.clip((1 + fst.samples.retained @ s_ref[1:]) / 2**n, 0, 1)
            else:
                vals = fidelity_batch(ref, _sample_densities(fst.samples))
        report.full_fidelity = _estimate(fidelity(ref, fst.state), vals, level)
    if qot is not None:
        qot = {tuple(k): Reconstructed.of(v) for k, v in qot.items()}
    for pair in all_pairs(n):
        row = PairRow(pair)
        ref_pair = partial_trace(ref, pair)
        f_state = f_rhos = None
        if fst is not None:
            f_state = partial_trace(fst.state, pair)
            rhos = None if fst.samples is None else _sample_densities(fst.samples.marginal(pair))
            f_rhos = rhos
            row.fst_fidelity = _estimate(
                fidelity(ref_pair, f_state),
                None if rhos is None else fidelity_batch(ref_pair, rhos), level)
            row.fst_entropy = _estimate(
                von_neumann_entropy(f_state),
                None if rhos is None else entropy_batch(rhos), level)
        if qot is not None:
            if pair not in qot:
                raise ValueError(f"QOT estimates missing pair {pair}")
            q = qot[pair]
            if q.state.shape != (4, 4):
                raise ValueError(f"QOT estimate for pair {pair} is not a two-qubit state")
            rhos = None if q.samples is None else _sample_densities(q.samples)
            row.qot_fidelity = _estimate(
                fidelity(ref_pair, q.state),
                None if rhos is None else fidelity_batch(ref_pair, rhos), level)
            row.qot_entropy = _estimate(
                von_neumann_entropy(q.state),
                None if rhos is None else entropy_batch(rhos), level)
            if f_state is not None:
                both = rhos is not None and f_rhos is not None
                row.cross_fidelity = _estimate(
                    fidelity(f_state, q.state),
                    _pair_fidelities(f_rhos, rhos) if both else None, level)
        report.rows.append(row)
    return report

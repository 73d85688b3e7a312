"""Polarization-qubit state tomography: full linear inversion, overlapping
tomography of two-qubit marginals, and Bayesian mean estimation."""

from .analysis import (
    ComparisonReport,
    Estimate,
    PhaseScan,
    Reconstructed,
    build_report,
    phase_scan,
    reference_prime,
)
from .bayes import (
    PAIR_CONFIG,
    PosteriorSampleSet,
    SamplerConfig,
    credible_interval,
    estimate_full,
    estimate_pairs,
    gibbs_sample,
    posterior_mean,
)
from .core import (
    StateError,
    density_from_stokes,
    fidelity,
    nearest_density,
    partial_trace,
    project_to_physical,
    pure_density,
    stokes_from_density,
    von_neumann_entropy,
)
from .exact import IncompleteScheduleError, full_schedule, reconstruct_full, sign_pattern
from .io import read_count_file, write_count_file
from .measurement import CountRecord, Dataset, exact_dataset, outcome_probabilities
from .qot import generate_divides, pair_stokes, qot_schedule, reconstruct_pairs
from .source import NoiseSpec, SourceParams, four_photon_state, ghz_state, simulate_dataset

__version__ = "0.1.0"
